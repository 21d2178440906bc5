#include "fedsim/errors.hpp"
#include "fedsim/msgflow/codec.hpp"
#include "fedsim/msgflow/flow_graph.hpp"
#include "fedsim/msgflow/message.hpp"
#include "fedsim/msgflow/payload.hpp"
#include "fedsim/msgflow/registry.hpp"
#include "flow_shapes.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <random>

using namespace fedsim;
using namespace fedsim::msgflow;

namespace
{
    HandlerDecl decl(std::string id, std::set<std::string> consumes, std::set<std::string> produces,
                     Role role = Role::Server)
    {
        return {std::move(id), std::move(consumes), std::move(produces), role};
    }

    Payload random_payload(std::mt19937_64 &rng, int depth)
    {
        Payload p;
        const int n = std::uniform_int_distribution<int>(0, 5)(rng);
        for (int i = 0; i < n; ++i)
        {
            const std::string name = "e" + std::to_string(i);
            switch (std::uniform_int_distribution<int>(0, depth > 0 ? 4 : 3)(rng))
            {
            case 0:
                p.set(name, std::bit_cast<double>(rng()));
                break;
            case 1:
                p.set(name, static_cast<std::int64_t>(rng()));
                break;
            case 2:
            {
                std::string s(std::uniform_int_distribution<int>(0, 12)(rng), 'x');
                for (auto &c : s)
                {
                    c = static_cast<char>(rng() & 0xff);
                }
                p.set(name, s);
                break;
            }
            case 3:
            {
                std::vector<double> v(std::uniform_int_distribution<int>(0, 6)(rng));
                for (auto &x : v)
                {
                    x = std::normal_distribution<double>()(rng);
                }
                p.set(name, v);
                break;
            }
            default:
                p.set(name, random_payload(rng, depth - 1));
            }
        }
        return p;
    }

    // Reachability by Warshall closure over an adjacency matrix, independent of FlowGraph.
    struct Oracle
    {
        bool complete;
        std::set<std::string> unreachable;
    };

    Oracle brute_force(const std::vector<std::string> &names, const std::set<std::pair<int, int>> &edges)
    {
        const auto n = names.size();
        std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i)
        {
            r[i][i] = true;
        }
        for (auto [a, b] : edges)
        {
            r[a][b] = true;
        }
        for (std::size_t k = 0; k < n; ++k)
        {
            for (std::size_t i = 0; i < n; ++i)
            {
                for (std::size_t j = 0; j < n; ++j)
                {
                    r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
                }
            }
        }
        Oracle o{static_cast<bool>(r[0][1]), {}};
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!r[0][i])
            {
                o.unreachable.insert(names[i]);
            }
        }
        return o;
    }

    void check_against_oracle(const std::vector<std::string> &names, const std::set<std::pair<int, int>> &edges)
    {
        FlowGraph g;
        for (const auto &n : names)
        {
            g.add_node(n);
        }
        for (auto [a, b] : edges)
        {
            g.add_edge(names[a], names[b]);
        }
        const auto verdict = check_completeness(g);
        const auto oracle = brute_force(names, edges);
        if (!oracle.complete)
        {
            CHECK(std::holds_alternative<Incomplete>(verdict));
        }
        else if (oracle.unreachable.empty())
        {
            CHECK(std::holds_alternative<Complete>(verdict));
        }
        else
        {
            const auto *w = std::get_if<CompleteWithWarnings>(&verdict);
            REQUIRE(w != nullptr);
            CHECK(w->unreachable == oracle.unreachable);
        }
    }

    std::vector<std::string> node_names(int n)
    {
        std::vector<std::string> names{kStartNode, kTerminationNode};
        for (int i = 2; i < n; ++i)
        {
            names.push_back("M" + std::to_string(i - 1));
        }
        return names;
    }

    bool allowed(int from, int to) { return to != 0 && from != 1; }
} // namespace

TEST_CASE("registry: first registration binds without warning")
{
    HandlerRegistry r;
    const auto w = r.register_handler(EventKind::message("models"), decl("h1", {"models"}, {}));
    CHECK_FALSE(w.has_value());
    CHECK(r.dispatch(EventKind::message("models")) == "h1");
    CHECK(r.warnings().empty());
}

TEST_CASE("registry: overwrite keeps the latest handler and warns about the older one")
{
    HandlerRegistry r;
    r.register_handler(EventKind::message("models"), decl("h1", {"models"}, {}));
    const auto w = r.register_handler(EventKind::message("models"), decl("h2", {"models"}, {}));
    REQUIRE(w.has_value());
    CHECK(w->displaced == "h1");
    CHECK(w->replacement == "h2");
    CHECK(w->describe().find("h1") != std::string::npos);
    CHECK(r.dispatch(EventKind::message("models")) == "h2");
    CHECK(r.warnings().size() == 1);
}

TEST_CASE("registry: disjoint events do not interfere")
{
    HandlerRegistry r;
    r.register_handler(EventKind::message("a"), decl("h1", {"a"}, {}));
    r.register_handler(EventKind::message("b"), decl("h2", {"b"}, {}));
    CHECK(r.dispatch(EventKind::message("a")) == "h1");
    CHECK(r.dispatch(EventKind::message("b")) == "h2");
    CHECK(r.warnings().empty());
}

TEST_CASE("registry: dispatching an unbound event throws MissingHandler naming it")
{
    HandlerRegistry r;
    r.register_handler(EventKind::message("models"), decl("h2", {"models"}, {}));
    try
    {
        r.dispatch(EventKind::condition("time_up"));
        FAIL("expected MissingHandler");
    }
    catch (const MissingHandler &e)
    {
        CHECK(std::string(e.what()).find("time_up") != std::string::npos);
    }
    CHECK(EventKind::message("models").label() == "receiving_models");
    CHECK(EventKind::condition("time_up").label() == "time_up");
}

TEST_CASE("registry property: dispatch returns the last registration and the log replays to the same bindings")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial)
    {
        HandlerRegistry r;
        std::map<EventKind, std::string> last;
        std::map<std::string, HandlerDecl> decls;
        const int n = std::uniform_int_distribution<int>(1, 20)(rng);
        for (int i = 0; i < n; ++i)
        {
            const auto e = std::uniform_int_distribution<int>(0, 4)(rng);
            const EventKind ev = e % 2 == 0 ? EventKind::message("m" + std::to_string(e))
                                            : EventKind::condition("c" + std::to_string(e));
            auto d = decl("h" + std::to_string(i), {"m" + std::to_string(e)}, {});
            decls[d.id] = d;
            r.register_handler(ev, d);
            last[ev] = d.id;
        }
        for (const auto &[ev, id] : last)
        {
            CHECK(r.dispatch(ev) == id);
        }
        HandlerRegistry replay;
        for (const auto &entry : r.registration_log())
        {
            replay.register_handler(entry.event, decls.at(entry.handler_id));
        }
        CHECK(replay.bindings() == r.bindings());
        CHECK(replay.warnings().size() == r.warnings().size());
    }
}

TEST_CASE("codec: round trip of a single array entry")
{
    Payload p;
    p.set("w", std::vector<double>{1.0, 2.0});
    const auto bytes = encode_message(p);
    CHECK(decode_message(bytes) == p);
}

TEST_CASE("codec: structurally equal payloads encode identically")
{
    Payload a;
    a.set("x", 1.5).set("n", 3).set("s", "hi");
    Payload b;
    b.set("x", 1.5).set("n", 3).set("s", "hi");
    CHECK(encode_message(a) == encode_message(b));
}

TEST_CASE("codec: truncation reports the truncation offset")
{
    Payload inner;
    inner.set("k", 7).set("v", std::vector<double>{0.25, -1.0, 3.0});
    Payload p;
    p.set("w", std::vector<double>{1.0, 2.0}).set("name", "model").set("inner", inner).set("t", 0.5);
    const auto bytes = encode_message(p);
    for (std::size_t cut = 0; cut < bytes.size(); ++cut)
    {
        try
        {
            decode_message(std::span(bytes.data(), cut));
            FAIL("decode of a truncated stream succeeded at cut " << cut);
        }
        catch (const DecodeError &e)
        {
            CHECK(e.offset() == cut);
        }
    }
}

TEST_CASE("codec: trailing bytes and unknown tags are rejected")
{
    Payload p;
    p.set("a", 1);
    auto bytes = encode_message(p);
    bytes.push_back(0);
    CHECK_THROWS_AS(decode_message(bytes), DecodeError);

    bytes = encode_message(p);
    // u32 count, u32 name_len, 'a', tag
    bytes[4 + 4 + 1] = 42;
    try
    {
        decode_message(bytes);
        FAIL("unknown tag accepted");
    }
    catch (const DecodeError &e)
    {
        CHECK(e.offset() == 9);
    }
}

TEST_CASE("codec property: decode(encode(p)) == p and encoding is pure")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i)
    {
        const Payload p = random_payload(rng, 2);
        const auto bytes = encode_message(p);
        CHECK(encode_message(p) == bytes);
        CHECK(decode_message(bytes) == p);
    }
}

TEST_CASE("codec: NaN and signed zero survive bit-exactly")
{
    Payload p;
    p.set("nan", std::numeric_limits<double>::quiet_NaN()).set("nz", -0.0);
    const auto q = decode_message(encode_message(p));
    CHECK(std::isnan(q.real("nan")));
    CHECK(std::signbit(q.real("nz")));
}

TEST_CASE("message: payload conversion round-trips headers")
{
    Message m;
    m.msg_type = msg::kModelParam;
    m.sender = kServerId;
    m.receivers = {1, 3};
    m.timestamp = 2.5;
    m.round = 4;
    m.payload.set("w", std::vector<double>{1.0});
    const auto back = message_from_payload(to_payload(m));
    CHECK(back.msg_type == m.msg_type);
    CHECK(back.receivers == m.receivers);
    CHECK(back.timestamp == m.timestamp);
    CHECK(back.round == 4);
    CHECK(back.payload == m.payload);

    Message bad = m;
    bad.receivers = {0};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = m;
    bad.timestamp = -1.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("flow graph: FedAvg registry is a linear chain")
{
    HandlerRegistry r;
    r.register_handler(EventKind::condition(cond::kStart), decl("join", {}, {"join_in"}, Role::Client));
    r.register_handler(EventKind::message("join_in"), decl("handle_join_in", {"join_in"}, {"model_param"}));
    r.register_handler(EventKind::message("model_param"),
                       decl("handle_model", {"model_param"}, {"model_update"}, Role::Client));
    r.register_handler(EventKind::message("model_update"), decl("handle_update", {"model_update"}, {}));
    const auto g = build_flow_graph(r);
    const std::set<FlowGraph::Edge> expected{{"start", "join_in"},
                                             {"join_in", "model_param"},
                                             {"model_param", "model_update"},
                                             {"model_update", "termination"}};
    CHECK(g.edges() == expected);
    CHECK(std::holds_alternative<Complete>(check_completeness(g)));
}

TEST_CASE("flow graph: empty registry gives two isolated nodes")
{
    const auto g = build_flow_graph(HandlerRegistry{});
    CHECK(g.nodes() == std::set<std::string>{"start", "termination"});
    CHECK(g.edges().empty());
    CHECK(std::holds_alternative<Incomplete>(check_completeness(g)));
}

TEST_CASE("flow graph: a handler producing what it consumes adds a self-loop")
{
    HandlerRegistry r;
    r.register_handler(EventKind::message("m"), decl("h", {"m"}, {"m"}));
    CHECK(build_flow_graph(r).has_edge("m", "m"));
}

TEST_CASE("flow graph: edges into start or out of termination are rejected")
{
    FlowGraph g;
    CHECK_THROWS_AS(g.add_edge("a", kStartNode), ValidationError);
    CHECK_THROWS_AS(g.add_edge(kTerminationNode, "a"), ValidationError);
}

TEST_CASE("completeness: the three reference shapes")
{
    CHECK(std::holds_alternative<Complete>(check_completeness(build_flow_graph(test_support::complete_shape()))));
    const auto middle = check_completeness(build_flow_graph(test_support::redundant_shape()));
    REQUIRE(std::holds_alternative<CompleteWithWarnings>(middle));
    CHECK(std::get<CompleteWithWarnings>(middle).unreachable == std::set<std::string>{"M3", "M4"});
    CHECK(std::holds_alternative<Incomplete>(check_completeness(build_flow_graph(test_support::incomplete_shape()))));
}

TEST_CASE("completeness property: verdict is invariant under registration order")
{
    std::mt19937_64 rng(5);
    for (const auto &shape : {test_support::complete_shape(), test_support::redundant_shape(),
                              test_support::incomplete_shape()})
    {
        std::vector<std::pair<EventKind, HandlerDecl>> regs(shape.bindings().begin(), shape.bindings().end());
        const auto reference = describe(check_completeness(build_flow_graph(shape)));
        for (int i = 0; i < 20; ++i)
        {
            std::shuffle(regs.begin(), regs.end(), rng);
            HandlerRegistry r;
            for (const auto &[ev, d] : regs)
            {
                r.register_handler(ev, d);
            }
            CHECK(describe(check_completeness(build_flow_graph(r))) == reference);
        }
    }
}

TEST_CASE("completeness property: exhaustive agreement with a closure oracle on 4 nodes")
{
    const auto names = node_names(4);
    std::vector<std::pair<int, int>> slots;
    for (int a = 0; a < 4; ++a)
    {
        for (int b = 0; b < 4; ++b)
        {
            if (allowed(a, b))
            {
                slots.emplace_back(a, b);
            }
        }
    }
    const auto graphs = 1u << slots.size();
    for (unsigned mask = 0; mask < graphs; ++mask)
    {
        std::set<std::pair<int, int>> edges;
        for (std::size_t i = 0; i < slots.size(); ++i)
        {
            if (mask & (1u << i))
            {
                edges.insert(slots[i]);
            }
        }
        check_against_oracle(names, edges);
    }
}

TEST_CASE("completeness property: random graphs up to 8 nodes agree with the closure oracle")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 3000; ++trial)
    {
        const int n = std::uniform_int_distribution<int>(2, 8)(rng);
        const double density = std::uniform_real_distribution<double>(0.05, 0.4)(rng);
        const auto names = node_names(n);
        std::set<std::pair<int, int>> edges;
        for (int a = 0; a < n; ++a)
        {
            for (int b = 0; b < n; ++b)
            {
                if (allowed(a, b) && std::bernoulli_distribution(density)(rng))
                {
                    edges.insert({a, b});
                }
            }
        }
        check_against_oracle(names, edges);
    }
}
