#pragma once

#include "fedsim/msgflow/registry.hpp"

#include <set>
#include <string>
#include <utility>
#include <variant>

namespace fedsim::msgflow
{
    // "start" and "termination" are reserved node names.
    inline constexpr const char *kStartNode = "start";
    inline constexpr const char *kTerminationNode = "termination";

    class FlowGraph
    {
    public:
        using Edge = std::pair<std::string, std::string>;

        FlowGraph();

        void add_node(const std::string &node) { m_nodes.insert(node); }
        // Adds both endpoints. Edges into "start" or out of "termination" are rejected.
        void add_edge(const std::string &from, const std::string &to);

        const std::set<std::string> &nodes() const noexcept { return m_nodes; }
        const std::set<Edge> &edges() const noexcept { return m_edges; }
        bool has_edge(const std::string &from, const std::string &to) const
        {
            return m_edges.contains({from, to});
        }

        std::set<std::string> reachable_from(const std::string &node) const;

        std::string to_dot() const;

    private:
        std::set<std::string> m_nodes;
        std::set<Edge> m_edges;
    };

    FlowGraph build_flow_graph(const HandlerRegistry &registry);

    struct Complete
    {
    };
    struct CompleteWithWarnings
    {
        std::set<std::string> unreachable;
    };
    struct Incomplete
    {
    };
    using Completeness = std::variant<Complete, CompleteWithWarnings, Incomplete>;

    Completeness check_completeness(const FlowGraph &graph);

    std::string describe(const Completeness &c);
} // namespace fedsim::msgflow
