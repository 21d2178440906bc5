#include "fedsim/msgflow/flow_graph.hpp"

#include "fedsim/errors.hpp"

#include <deque>
#include <sstream>

namespace fedsim::msgflow
{
    FlowGraph::FlowGraph()
    {
        m_nodes.insert(kStartNode);
        m_nodes.insert(kTerminationNode);
    }

    void FlowGraph::add_edge(const std::string &from, const std::string &to)
    {
        if (to == kStartNode || from == kTerminationNode)
        {
            throw ValidationError("edge " + from + " -> " + to + " violates start/termination orientation");
        }
        m_nodes.insert(from);
        m_nodes.insert(to);
        m_edges.insert({from, to});
    }

    std::set<std::string> FlowGraph::reachable_from(const std::string &node) const
    {
        std::set<std::string> seen{node};
        std::deque<std::string> frontier{node};
        while (!frontier.empty())
        {
            const std::string cur = frontier.front();
            frontier.pop_front();
            for (auto it = m_edges.lower_bound({cur, std::string{}}); it != m_edges.end() && it->first == cur; ++it)
            {
                if (seen.insert(it->second).second)
                {
                    frontier.push_back(it->second);
                }
            }
        }
        return seen;
    }

    std::string FlowGraph::to_dot() const
    {
        std::ostringstream os;
        os << "digraph flow {\n";
        for (const auto &n : m_nodes)
        {
            os << "  \"" << n << "\"";
            if (n == kStartNode || n == kTerminationNode)
            {
                os << " [shape=doublecircle]";
            }
            os << ";\n";
        }
        for (const auto &[a, b] : m_edges)
        {
            os << "  \"" << a << "\" -> \"" << b << "\";\n";
        }
        os << "}\n";
        return os.str();
    }

    FlowGraph build_flow_graph(const HandlerRegistry &registry)
    {
        FlowGraph g;
        for (const auto &[event, decl] : registry.bindings())
        {
            for (const auto &m : decl.consumes)
            {
                g.add_node(m);
            }
            for (const auto &m : decl.produces)
            {
                g.add_node(m);
            }

            if (decl.consumes.empty())
            {
                for (const auto &out : decl.produces)
                {
                    g.add_edge(kStartNode, out);
                }
            }
            if (decl.produces.empty())
            {
                for (const auto &in : decl.consumes)
                {
                    g.add_edge(in, kTerminationNode);
                }
            }
            for (const auto &in : decl.consumes)
            {
                for (const auto &out : decl.produces)
                {
                    g.add_edge(in, out);
                }
            }
        }
        return g;
    }

    Completeness check_completeness(const FlowGraph &graph)
    {
        const auto reachable = graph.reachable_from(kStartNode);
        if (!reachable.contains(kTerminationNode))
        {
            return Incomplete{};
        }
        std::set<std::string> unreachable;
        for (const auto &n : graph.nodes())
        {
            if (!reachable.contains(n))
            {
                unreachable.insert(n);
            }
        }
        if (unreachable.empty())
        {
            return Complete{};
        }
        return CompleteWithWarnings{std::move(unreachable)};
    }

    std::string describe(const Completeness &c)
    {
        if (std::holds_alternative<Complete>(c))
        {
            return "complete";
        }
        if (const auto *w = std::get_if<CompleteWithWarnings>(&c))
        {
            std::string s = "complete with redundant nodes:";
            for (const auto &n : w->unreachable)
            {
                s += " " + n;
            }
            return s;
        }
        return "incomplete: no path from start to termination";
    }
} // namespace fedsim::msgflow
