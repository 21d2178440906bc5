#include "fedsim/fedcore/course.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/learnkit/aggregator.hpp"
#include "fedsim/util/overloaded.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <limits>
#include <ostream>

namespace fedsim::fedcore
{
    namespace
    {
        using json = nlohmann::json;
        using learnkit::ParamVector;
        using msgflow::EventKind;
        using msgflow::HandlerDecl;
        using msgflow::Message;
        using msgflow::Payload;
        using msgflow::Role;
        using simnet::Purpose;
        using simnet::SeededRng;

        namespace msg = msgflow::msg;
        namespace cond = msgflow::cond;

        constexpr const char *kMagic = "fedsim-checkpoint";
        constexpr std::int64_t kCheckpointFormat = 1;
        // Conditions raised by message handlers sit at depth 1; a condition
        // handler may raise one more (depth 2). Deeper raises are logged and ignored.
        constexpr int kMaxConditionDepth = 2;
        constexpr const char *kTimeUpTimer = "time_up";

        HandlerDecl decl(std::string id, std::set<std::string> consumes, std::set<std::string> produces, Role role)
        {
            return HandlerDecl{std::move(id), std::move(consumes), std::move(produces), role};
        }

        std::string trigger_event(const Trigger &t)
        {
            return std::visit(Overloaded{[](const AllReceived &) { return std::string(cond::kAllReceived); },
                                         [](const GoalAchieved &) { return std::string(cond::kGoalAchieved); },
                                         [](const TimeUp &) { return std::string(cond::kTimeUp); }},
                              t);
        }

        json to_json(const std::vector<ParticipantId> &ids)
        {
            json a = json::array();
            for (auto id : ids)
            {
                a.push_back(id);
            }
            return a;
        }

        Payload counters_payload(const RunCounters &c)
        {
            Payload p;
            p.set("messages", c.messages)
                .set("received", c.received)
                .set("contributed", c.contributed)
                .set("dropped_stale", c.dropped_stale)
                .set("dropped_released", c.dropped_released)
                .set("rejected", c.rejected)
                .set("after_finish", c.after_finish)
                .set("max_simultaneous_sends", c.max_simultaneous_sends);
            return p;
        }

        RunCounters counters_from_payload(const Payload &p)
        {
            RunCounters c;
            c.messages = p.integer("messages");
            c.received = p.integer("received");
            c.contributed = p.integer("contributed");
            c.dropped_stale = p.integer("dropped_stale");
            c.dropped_released = p.integer("dropped_released");
            c.rejected = p.integer("rejected");
            c.after_finish = p.integer("after_finish");
            c.max_simultaneous_sends = p.integer("max_simultaneous_sends");
            return c;
        }

        std::vector<simnet::ClientProfile> profiles_of(const World &w)
        {
            std::vector<simnet::ClientProfile> out;
            for (const auto &c : w.clients)
            {
                out.push_back(c.profile);
            }
            return out;
        }
    } // namespace

    const std::set<std::string> &builtin_handler_ids()
    {
        static const std::set<std::string> ids{"join",           "handle_model",   "handle_model_ditto", "handle_finish",
                                               "handle_join_in", "start_training", "handle_update",      "aggregate",
                                               "handle_time_up", "terminate"};
        return ids;
    }

    msgflow::HandlerRegistry build_registry(const CourseConfig &config)
    {
        msgflow::HandlerRegistry r;
        const std::set<std::string> after_update{msg::kModelParam, msg::kFinish};
        r.register_handler(EventKind::condition(cond::kStart), decl("join", {}, {msg::kJoinIn}, Role::Client));
        r.register_handler(EventKind::message(msg::kModelParam),
                           decl("handle_model", {msg::kModelParam}, {msg::kModelUpdate}, Role::Client));
        r.register_handler(EventKind::message(msg::kFinish), decl("handle_finish", {msg::kFinish}, {}, Role::Client));
        r.register_handler(EventKind::message(msg::kJoinIn),
                           decl("handle_join_in", {msg::kJoinIn}, {msg::kModelParam}, Role::Server));
        r.register_handler(EventKind::condition(cond::kAllJoinedIn),
                           decl("start_training", {msg::kJoinIn}, after_update, Role::Server));
        r.register_handler(EventKind::message(msg::kModelUpdate),
                           decl("handle_update", {msg::kModelUpdate}, after_update, Role::Server));
        const std::string trigger = trigger_event(config.strategy.trigger);
        const std::string trigger_handler = trigger == cond::kTimeUp ? "handle_time_up" : "aggregate";
        r.register_handler(EventKind::condition(trigger),
                           decl(trigger_handler, {msg::kModelUpdate}, after_update, Role::Server));
        r.register_handler(EventKind::condition(cond::kEarlyStop),
                           decl("terminate", {msg::kModelUpdate}, {msg::kFinish}, Role::Server));
        r.register_handler(EventKind::condition(cond::kMaxRoundsReached),
                           decl("terminate", {msg::kModelUpdate}, {msg::kFinish}, Role::Server));
        if (config.trainer.ditto_lambda)
        {
            r.register_handler(EventKind::message(msg::kModelParam),
                               decl("handle_model_ditto", {msg::kModelParam}, {msg::kModelUpdate}, Role::Client));
        }
        for (const auto &o : config.overrides)
        {
            r.register_handler(o.event, o.decl);
        }
        return r;
    }

    struct ClientState
    {
        ParamVector local_state;
        // Personalized model under Ditto; empty until the first job.
        ParamVector personal;
        std::int64_t jobs = 0;
        bool finished = false;
    };

    struct Course::Impl
    {
        using Handler = void (Impl::*)(ParticipantId self, const Message *m, int depth);

        CourseConfig config;
        World world;
        std::ostream *log = nullptr;
        msgflow::HandlerRegistry registry;
        ClientSampler sampler;

        simnet::VirtualClock clock;
        simnet::EventQueue queue;
        ServerState server;
        std::vector<ClientState> clients;
        std::set<ParticipantId> joined;
        bool finished = false;
        bool done = false;
        VirtualTime finish_time = 0.0;
        std::string stop_reason;
        double best_val = std::numeric_limits<double>::infinity();
        std::int64_t since_best = 0;
        std::int64_t timer_generation = 0;
        std::int64_t sample_counter = 0;
        std::map<ParticipantId, std::int64_t> sent_count;
        RunCounters counters;

        Impl(CourseConfig cfg, World w, std::ostream *out)
            : config(std::move(cfg)), world(std::move(w)), log(out), registry(build_registry(config)),
              sampler(config.strategy.sampler, profiles_of(world))
        {
            config.aggregator.share_list = config.trainer.share_list;
            validate_setup();
        }

        std::size_t num_clients() const noexcept { return world.clients.size(); }
        VirtualTime now() const noexcept { return clock.now(); }

        // ---- construction -------------------------------------------------

        void validate_setup()
        {
            if (world.clients.empty())
            {
                throw ValidationError("a course needs at least one client");
            }
            for (std::size_t i = 0; i < world.clients.size(); ++i)
            {
                if (world.clients[i].profile.client != static_cast<ParticipantId>(i + 1))
                {
                    throw ValidationError("client profiles must be numbered 1..M in order");
                }
                simnet::validate(world.clients[i].profile.comp_time);
                simnet::validate(world.clients[i].profile.comm_time);
                if (world.clients[i].data.train.empty())
                {
                    throw ValidationError("client " + std::to_string(i + 1) + " has no training rows");
                }
            }
            validate(config.strategy, num_clients());
            learnkit::validate(config.trainer);
            for (const auto &c : config.candidates)
            {
                learnkit::validate(c);
                if (c.share_list != config.trainer.share_list)
                {
                    throw ConfigError("trainer.candidates", "candidates must share the trainer's share list");
                }
            }
            if (config.max_rounds < 0)
            {
                throw ConfigError("termination.max_rounds", "must be non-negative");
            }
            if (config.eval_cadence < 1)
            {
                throw ConfigError("eval.cadence", "must be at least 1");
            }
            if (config.patience < 0)
            {
                throw ConfigError("termination.patience", "must be non-negative");
            }
            if (!(config.dp_sigma >= 0.0))
            {
                throw ConfigError("dp.sigma", "must be non-negative");
            }
            if (config.aggregator.kind == AggregatorKind::Krum)
            {
                const std::size_t need = config.aggregator.krum_f + 3;
                const std::size_t per_round =
                    std::visit(Overloaded{[&](const AllReceived &) { return config.strategy.target_in_flight(); },
                                          [](const GoalAchieved &g) { return g.goal; },
                                          [](const TimeUp &t) { return t.min_feedback; }},
                               config.strategy.trigger);
                if (per_round < need)
                {
                    throw ConfigError("aggregator", "krum with f=" + std::to_string(config.aggregator.krum_f) +
                                                        " needs at least " + std::to_string(need) +
                                                        " updates per aggregation");
                }
            }
            for (const auto &[event, d] : registry.bindings())
            {
                if (!builtin_handler_ids().contains(d.id))
                {
                    throw ConfigError("handlers.override",
                                      "no implementation for handler '" + d.id + "' bound to " + event.label());
                }
            }
            const auto verdict = msgflow::check_completeness(msgflow::build_flow_graph(registry));
            if (std::holds_alternative<msgflow::Incomplete>(verdict))
            {
                throw IncompleteCourse(msgflow::describe(verdict));
            }
        }

        void start_fresh()
        {
            SeededRng init_rng(config.seed, {Purpose::ModelInit, 0, 0});
            server.global_params = learnkit::init_params(config.trainer.model, init_rng);
            clients.assign(num_clients(), {});
            for (auto &c : clients)
            {
                c.local_state = server.global_params;
            }
            write_header();
            for (std::size_t i = 0; i < num_clients(); ++i)
            {
                raise(cond::kStart, static_cast<ParticipantId>(i + 1), 1);
            }
        }

        void write_header()
        {
            const auto &s = config.strategy;
            json h{{"kind", "header"},
                   {"schema", kRunLogSchema},
                   {"seed", config.seed},
                   {"strategy", s.name()},
                   {"trigger", trigger_name(s.trigger)},
                   {"manner", to_string(s.manner)},
                   {"sampler", sampler_name(s.sampler)},
                   {"concurrency", s.concurrency},
                   {"target_in_flight", s.target_in_flight()},
                   {"tau_max", s.staleness.tau_max},
                   {"discount", to_string(s.staleness.discount)},
                   {"aggregator", config.aggregator.kind == AggregatorKind::Krum ? "krum" : "fedavg"},
                   {"weighted", config.aggregator.weighted},
                   {"max_rounds", config.max_rounds},
                   {"num_clients", num_clients()},
                   {"handlers", registry.describe_bindings()}};
            emit(h);
            for (const auto &w : registry.warnings())
            {
                emit({{"kind", "warning"}, {"t", 0.0}, {"source", "registry"}, {"message", w.describe()}});
            }
            const auto verdict = msgflow::check_completeness(msgflow::build_flow_graph(registry));
            if (const auto *cw = std::get_if<msgflow::CompleteWithWarnings>(&verdict))
            {
                spdlog::warn("{}", msgflow::describe(verdict));
                emit({{"kind", "warning"},
                      {"t", 0.0},
                      {"source", "flow_graph"},
                      {"message", msgflow::describe(verdict)},
                      {"unreachable", cw->unreachable}});
            }
        }

        void emit(const json &record)
        {
            if (log != nullptr)
            {
                *log << record.dump() << '\n';
            }
        }

        // ---- dispatch -----------------------------------------------------

        static const std::map<std::string, Handler> &handlers()
        {
            static const std::map<std::string, Handler> table{
                {"join", &Impl::h_join},
                {"handle_model", &Impl::h_handle_model},
                {"handle_model_ditto", &Impl::h_handle_model_ditto},
                {"handle_finish", &Impl::h_handle_finish},
                {"handle_join_in", &Impl::h_handle_join_in},
                {"start_training", &Impl::h_start_training},
                {"handle_update", &Impl::h_handle_update},
                {"aggregate", &Impl::h_aggregate},
                {"handle_time_up", &Impl::h_handle_time_up},
                {"terminate", &Impl::h_terminate},
            };
            return table;
        }

        void invoke(const EventKind &event, ParticipantId self, const Message *m, int depth)
        {
            const std::string &id = registry.dispatch(event);
            const HandlerDecl &d = registry.binding(event);
            if ((self == kServerId) != (d.role == Role::Server))
            {
                throw ProtocolError("handler '" + id + "' for " + event.label() + " is declared for the " +
                                    msgflow::to_string(d.role) + " but participant " + std::to_string(self) +
                                    " received it");
            }
            (this->*handlers().at(id))(self, m, depth);
        }

        void raise(const std::string &condition, ParticipantId self, int depth)
        {
            if (depth > kMaxConditionDepth)
            {
                spdlog::warn("condition '{}' raised at chain depth {} ignored", condition, depth);
                emit({{"kind", "warning"},
                      {"t", now()},
                      {"source", "engine"},
                      {"message", "condition '" + condition + "' raised at chain depth " + std::to_string(depth) +
                                      " ignored"}});
                return;
            }
            invoke(EventKind::condition(condition), self, nullptr, depth);
        }

        void step()
        {
            auto entry = queue.next_event(clock);
            std::visit(Overloaded{[&](const Message &m) { on_message(entry.seq, m); },
                                  [&](const simnet::Timer &t) { on_timer(entry.seq, t); }},
                       entry.item);
        }

        void on_message(std::uint64_t seq, const Message &m)
        {
            ++counters.messages;
            json extra = json::object();
            if (m.msg_type == msg::kModelUpdate)
            {
                extra["model_version"] = m.payload.integer("model_version");
                extra["num_samples"] = m.payload.real("num_samples");
            }
            else if (m.msg_type == msg::kModelParam)
            {
                extra["version"] = m.payload.integer("version");
            }
            emit({{"kind", "event"},
                  {"t", m.timestamp},
                  {"seq", seq},
                  {"msg_type", m.msg_type},
                  {"sender", m.sender},
                  {"receivers", to_json(m.receivers)},
                  {"round", m.round},
                  {"extra", extra}});
            for (auto r : m.receivers)
            {
                invoke(EventKind::message(m.msg_type), r, &m, 0);
            }
        }

        void on_timer(std::uint64_t seq, const simnet::Timer &t)
        {
            const bool stale = finished || t.generation != timer_generation;
            emit({{"kind", "timer"},
                  {"t", now()},
                  {"seq", seq},
                  {"name", t.name},
                  {"round", t.round},
                  {"stale", stale}});
            if (!stale)
            {
                raise(t.name, t.owner, 1);
            }
        }

        void send(Message m)
        {
            msgflow::validate(m);
            queue.schedule(clock, std::move(m));
        }

        void arm_timer()
        {
            ++timer_generation;
            if (std::holds_alternative<TimeUp>(config.strategy.trigger) && !finished)
            {
                queue.schedule(clock, server.deadline,
                               simnet::Timer{kTimeUpTimer, kServerId, server.version, timer_generation});
            }
        }

        // ---- client handlers ----------------------------------------------

        void h_join(ParticipantId self, const Message *, int)
        {
            send(Message{msg::kJoinIn, self, {kServerId}, now(), -1, {}});
        }

        void h_handle_model(ParticipantId self, const Message *m, int) { train(self, *m, false); }
        void h_handle_model_ditto(ParticipantId self, const Message *m, int) { train(self, *m, true); }

        void h_handle_finish(ParticipantId self, const Message *, int)
        {
            clients.at(static_cast<std::size_t>(self - 1)).finished = true;
        }

        void train(ParticipantId self, const Message &m, bool ditto)
        {
            auto &cs = clients.at(static_cast<std::size_t>(self - 1));
            const auto &setup = world.clients.at(static_cast<std::size_t>(self - 1));
            const std::int64_t job = cs.jobs++;
            const std::int64_t version = m.payload.integer("version");

            learnkit::TrainerConfig cfg = config.trainer;
            if (!config.candidates.empty())
            {
                SeededRng hook(config.seed, {Purpose::ConfigHook, self, job});
                const std::size_t pick = hook.index(config.candidates.size());
                cfg = config.candidates[pick];
                emit({{"kind", "assign"},
                      {"t", now()},
                      {"round", version},
                      {"client", self},
                      {"candidate", pick},
                      {"learning_rate", cfg.learning_rate},
                      {"local_steps", cfg.local_steps}});
            }

            const auto &share = config.trainer.share_list;
            const ParamVector received = learnkit::params_from_payload(m.payload.nested("params"));
            const ParamVector full = share.empty() ? received : learnkit::merge_shared(cs.local_state, received);
            SeededRng batches(config.seed, {Purpose::Batches, self, job});
            ParamVector delta;
            if (ditto)
            {
                if (cs.personal.num_groups() == 0)
                {
                    cs.personal = full;
                }
                auto res = learnkit::local_train_ditto(full, cs.personal, setup.data, cfg, batches);
                delta = std::move(res.shared_delta);
                cs.personal = std::move(res.new_local);
            }
            else
            {
                delta = learnkit::local_train_sgd(full, setup.data, cfg, batches);
            }
            cs.local_state = full + delta;

            ParamVector shared = share.empty() ? std::move(delta) : learnkit::filter_shared(delta, share);
            if (config.dp_sigma > 0.0 && world.noisy_clients.contains(self))
            {
                SeededRng noise(config.seed, {Purpose::DpNoise, self, job});
                shared = learnkit::inject_dp_noise(shared, config.dp_sigma, noise);
            }

            SeededRng comp_rng(config.seed, {Purpose::CompTime, self, job});
            SeededRng comm_rng(config.seed, {Purpose::CommUp, self, job});
            const double comp = simnet::draw(setup.profile.comp_time, comp_rng);
            const double comm = simnet::draw(setup.profile.comm_time, comm_rng);

            Payload p;
            p.set("delta", learnkit::to_payload(shared))
                .set("num_samples", static_cast<double>(setup.data.train.size()))
                .set("model_version", version)
                .set("sent_at", now() + comp);
            send(Message{msg::kModelUpdate, self, {kServerId}, now() + comp + comm, version, std::move(p)});
        }

        // ---- server handlers ----------------------------------------------

        void h_handle_join_in(ParticipantId, const Message *m, int depth)
        {
            joined.insert(m->sender);
            if (joined.size() == num_clients())
            {
                raise(cond::kAllJoinedIn, kServerId, depth + 1);
            }
        }

        void h_start_training(ParticipantId, const Message *, int depth)
        {
            if (config.max_rounds <= 0)
            {
                stop_reason = "max_rounds";
                raise(cond::kMaxRoundsReached, kServerId, depth + 1);
                return;
            }
            server.round_started_at = now();
            if (const auto *t = std::get_if<TimeUp>(&config.strategy.trigger))
            {
                server.deadline = now() + t->budget;
            }
            arm_timer();
            evaluate_round();
            send_to_idle(config.strategy.target_in_flight());
        }

        void h_handle_update(ParticipantId, const Message *m, int depth)
        {
            ++counters.received;
            Update upd;
            upd.client = m->sender;
            upd.delta = learnkit::params_from_payload(m->payload.nested("delta"));
            upd.num_samples = m->payload.real("num_samples");
            upd.model_version = m->payload.integer("model_version");
            upd.sent_at = m->payload.real("sent_at");
            upd.received_at = now();
            if (finished)
            {
                ++counters.after_finish;
                // Still training when the course ended.
                server.in_flight.erase(upd.client);
                server.released.erase(upd.client);
                log_drop(upd.client, "after_finish", server.version - upd.model_version);
                return;
            }
            const ParticipantId client = upd.client;
            auto out = on_update(server, std::move(upd), config.strategy, now());
            if (out.fate == UpdateFate::DroppedStale)
            {
                ++counters.dropped_stale;
                log_drop(client, to_string(out.fate), out.staleness);
            }
            else if (out.fate == UpdateFate::DroppedReleased)
            {
                ++counters.dropped_released;
                log_drop(client, to_string(out.fate), out.staleness);
            }
            if (!std::holds_alternative<TimeUp>(config.strategy.trigger))
            {
                if (out.decision == Decision::Yes)
                {
                    raise(trigger_event(config.strategy.trigger), kServerId, depth + 1);
                }
                else if (out.decision == Decision::Remedial)
                {
                    remedial(depth + 1);
                }
            }
            for (const auto &a : out.actions)
            {
                if (const auto *s = std::get_if<SendToIdle>(&a))
                {
                    send_to_idle(s->count);
                }
            }
        }

        void h_aggregate(ParticipantId, const Message *, int depth)
        {
            if (!finished)
            {
                do_aggregate(depth);
            }
        }

        void h_handle_time_up(ParticipantId, const Message *, int depth)
        {
            if (finished)
            {
                return;
            }
            const Decision d = should_aggregate(config.strategy, server, now());
            if (d == Decision::Yes)
            {
                do_aggregate(depth);
            }
            else if (d == Decision::Remedial)
            {
                remedial(depth);
            }
        }

        void h_terminate(ParticipantId, const Message *, int)
        {
            if (finished)
            {
                return;
            }
            if (stop_reason.empty())
            {
                stop_reason = "terminated";
            }
            finished = true;
            finish_time = now();
            ++timer_generation;
            for (std::size_t i = 0; i < num_clients(); ++i)
            {
                send(Message{msg::kFinish, kServerId, {static_cast<ParticipantId>(i + 1)}, now(), server.version, {}});
            }
        }

        // ---- server internals ---------------------------------------------

        void log_drop(ParticipantId client, const std::string &reason, std::int64_t staleness)
        {
            emit({{"kind", "drop"},
                  {"t", now()},
                  {"round", server.version},
                  {"client", client},
                  {"reason", reason},
                  {"staleness", staleness}});
        }

        void remedial(int depth)
        {
            const auto actions = remedial_action(config.strategy, server, now());
            for (const auto &a : actions)
            {
                emit({{"kind", "remedial"},
                      {"t", now()},
                      {"round", server.version},
                      {"buffered", server.buffer.size()},
                      {"action", describe(a)}});
                std::visit(Overloaded{[&](const SendToIdle &s) { send_to_idle(s.count); },
                                      [&](const ExtendBudget &e) {
                                          server.deadline = e.deadline;
                                          ++server.extensions;
                                          arm_timer();
                                      },
                                      [&](const AggregateNow &) { do_aggregate(depth); },
                                      [&](const RestartRound &) {
                                          const auto released = restart_round(server, config.strategy, now());
                                          emit({{"kind", "restart"},
                                                {"t", now()},
                                                {"round", server.version},
                                                {"released", to_json(released)},
                                                {"restarts", server.restarts}});
                                          arm_timer();
                                          send_to_idle(config.strategy.target_in_flight());
                                      }},
                           a);
            }
        }

        void do_aggregate(int depth)
        {
            const auto res = aggregate(server, config.strategy, config.aggregator, now());
            counters.contributed += static_cast<std::int64_t>(res.contributors.size());
            counters.rejected += static_cast<std::int64_t>(res.rejected.size());
            emit({{"kind", "agg"},
                  {"t", now()},
                  {"round", res.new_version},
                  {"clients", to_json(res.contributors)},
                  {"staleness", res.staleness},
                  {"weights", res.weights},
                  {"released", to_json(res.released)}});
            for (auto c : res.rejected)
            {
                log_drop(c, "rejected", -1);
            }
            arm_timer();
            bool stop_early = false;
            if (res.new_version % config.eval_cadence == 0 || res.new_version >= config.max_rounds)
            {
                stop_early = evaluate_round();
            }
            if (res.new_version >= config.max_rounds)
            {
                stop_reason = "max_rounds";
                raise(cond::kMaxRoundsReached, kServerId, depth + 1);
            }
            else if (stop_early)
            {
                stop_reason = "early_stop";
                raise(cond::kEarlyStop, kServerId, depth + 1);
            }
            if (finished)
            {
                return;
            }
            if (config.strategy.manner == Manner::AfterAggregating)
            {
                const std::size_t target = config.strategy.target_in_flight();
                if (server.in_flight.size() < target)
                {
                    send_to_idle(target - server.in_flight.size());
                }
            }
            else
            {
                send_to_idle(res.released.size());
            }
        }

        // Logs validation and test metrics of the global model; returns true
        // when patience is exhausted.
        bool evaluate_round()
        {
            for (auto split : {learnkit::Split::Validation, learnkit::Split::Test})
            {
                if (world.eval_data.split(split).empty())
                {
                    continue;
                }
                const auto r = learnkit::evaluate(config.trainer.model, server.global_params, world.eval_data, split);
                emit_eval(r, split, false);
                if (split == learnkit::Split::Validation)
                {
                    if (r.loss < best_val)
                    {
                        best_val = r.loss;
                        since_best = 0;
                    }
                    else
                    {
                        ++since_best;
                    }
                }
            }
            return config.patience > 0 && since_best >= config.patience;
        }

        void emit_eval(const learnkit::EvalResult &r, learnkit::Split split, bool final)
        {
            json e{{"kind", "eval"},
                   {"t", final ? finish_time : now()},
                   {"round", server.version},
                   {"split", split == learnkit::Split::Validation ? "validation" : "test"},
                   {"loss", r.loss},
                   {"count", r.count},
                   {"final", final}};
            e["acc"] = r.accuracy ? json(*r.accuracy) : json(nullptr);
            emit(e);
        }

        void send_to_idle(std::size_t count)
        {
            if (finished || count == 0)
            {
                return;
            }
            std::set<ParticipantId> idle;
            for (std::size_t i = 0; i < num_clients(); ++i)
            {
                const auto id = static_cast<ParticipantId>(i + 1);
                if (!server.in_flight.contains(id) && !server.released.contains(id) && !clients[i].finished)
                {
                    idle.insert(id);
                }
            }
            const std::size_t k = std::min(count, idle.size());
            if (k < count)
            {
                emit({{"kind", "warning"},
                      {"t", now()},
                      {"source", "sampler"},
                      {"message", InsufficientClients(count, idle.size()).what()}});
            }
            if (k == 0)
            {
                return;
            }
            SeededRng rng(config.seed, {Purpose::Sampling, 0, sample_counter++});
            const auto chosen = sampler.sample(idle, k, rng, static_cast<std::size_t>(server.version));
            const auto &share = config.trainer.share_list;
            const ParamVector outgoing =
                share.empty() ? server.global_params : learnkit::filter_shared(server.global_params, share);
            const Payload params = learnkit::to_payload(outgoing);
            for (auto c : chosen)
            {
                server.in_flight[c] = server.version;
                const auto &profile = world.clients[static_cast<std::size_t>(c - 1)].profile;
                SeededRng down(config.seed, {Purpose::CommDown, c, sent_count[c]++});
                const double delay = simnet::draw(profile.comm_time, down);
                Payload p;
                p.set("params", params).set("version", server.version);
                send(Message{msg::kModelParam, kServerId, {c}, now() + delay, server.version, std::move(p)});
            }
            counters.max_simultaneous_sends =
                std::max(counters.max_simultaneous_sends, static_cast<std::int64_t>(chosen.size()));
        }

        // ---- evaluation and finish -----------------------------------------

        learnkit::EvalResult evaluate_global(learnkit::Split split) const
        {
            return learnkit::evaluate(config.trainer.model, server.global_params, world.eval_data, split);
        }

        std::map<ParticipantId, double> client_accuracies() const
        {
            const bool ditto = registry.bound(EventKind::message(msg::kModelParam)) &&
                               registry.binding(EventKind::message(msg::kModelParam)).id == "handle_model_ditto";
            const auto &share = config.trainer.share_list;
            std::map<ParticipantId, double> out;
            for (std::size_t i = 0; i < num_clients(); ++i)
            {
                const auto &data = world.clients[i].data;
                if (data.test.empty())
                {
                    continue;
                }
                const auto &cs = clients[i];
                ParamVector model;
                if (ditto && cs.personal.num_groups() > 0)
                {
                    model = cs.personal;
                }
                else if (!share.empty())
                {
                    model = learnkit::merge_shared(cs.local_state, learnkit::filter_shared(server.global_params, share));
                }
                else
                {
                    model = server.global_params;
                }
                const auto r = learnkit::evaluate(config.trainer.model, model, data, learnkit::Split::Test);
                if (r.accuracy)
                {
                    out.emplace(static_cast<ParticipantId>(i + 1), *r.accuracy);
                }
            }
            return out;
        }

        void finalize()
        {
            if (done)
            {
                return;
            }
            done = true;
            json summary{{"kind", "summary"},
                         {"rounds", server.version},
                         {"final_time", finish_time},
                         {"stop_reason", stop_reason},
                         {"buffered_at_end", server.buffer.size()},
                         {"counters",
                          {{"messages", counters.messages},
                           {"received", counters.received},
                           {"contributed", counters.contributed},
                           {"dropped_stale", counters.dropped_stale},
                           {"dropped_released", counters.dropped_released},
                           {"rejected", counters.rejected},
                           {"after_finish", counters.after_finish}}},
                         {"max_simultaneous_sends", counters.max_simultaneous_sends}};
            if (!world.eval_data.test.empty())
            {
                const auto r = evaluate_global(learnkit::Split::Test);
                emit_eval(r, learnkit::Split::Test, true);
                summary["test_loss"] = r.loss;
                summary["test_acc"] = r.accuracy ? json(*r.accuracy) : json(nullptr);
            }
            json agg = json::object();
            for (std::size_t i = 0; i < num_clients(); ++i)
            {
                const auto id = static_cast<ParticipantId>(i + 1);
                const auto it = server.agg_count.find(id);
                agg[std::to_string(id)] = it == server.agg_count.end() ? 0 : it->second;
            }
            summary["agg_count"] = agg;
            if (config.clientwise_eval)
            {
                json acc = json::object();
                for (const auto &[id, a] : client_accuracies())
                {
                    acc[std::to_string(id)] = a;
                }
                summary["client_acc"] = acc;
            }
            emit(summary);
            spdlog::debug("course finished at t={} after {} rounds ({})", finish_time, server.version, stop_reason);
        }

        // ---- checkpoint ---------------------------------------------------

        Payload snapshot() const
        {
            Payload entries;
            std::size_t i = 0;
            for (const auto &e : queue.snapshot())
            {
                Payload item;
                item.set("time", e.time).set("seq", static_cast<std::int64_t>(e.seq));
                std::visit(Overloaded{[&](const Message &m) {
                                          item.set("type", "message").set("message", msgflow::to_payload(m));
                                      },
                                      [&](const simnet::Timer &t) {
                                          item.set("type", "timer")
                                              .set("name", t.name)
                                              .set("owner", t.owner)
                                              .set("round", t.round)
                                              .set("generation", t.generation);
                                      }},
                           e.item);
                entries.set(std::to_string(i++), std::move(item));
            }
            Payload q;
            q.set("next_seq", static_cast<std::int64_t>(queue.next_seq())).set("entries", std::move(entries));

            Payload cl;
            std::map<ParticipantId, std::int64_t> jobs;
            for (std::size_t c = 0; c < clients.size(); ++c)
            {
                Payload one;
                one.set("local_state", learnkit::to_payload(clients[c].local_state))
                    .set("personal", learnkit::to_payload(clients[c].personal))
                    .set("finished", static_cast<std::int64_t>(clients[c].finished));
                cl.set(std::to_string(c + 1), std::move(one));
                jobs[static_cast<ParticipantId>(c + 1)] = clients[c].jobs;
            }

            std::map<ParticipantId, std::int64_t> joined_map;
            for (auto j : joined)
            {
                joined_map[j] = 1;
            }
            Payload course;
            course.set("joined", to_payload(joined_map))
                .set("finished", static_cast<std::int64_t>(finished))
                .set("done", static_cast<std::int64_t>(done))
                .set("finish_time", finish_time)
                .set("stop_reason", stop_reason)
                .set("best_val", best_val)
                .set("since_best", since_best);

            Payload rng;
            rng.set("sample_counter", sample_counter)
                .set("timer_generation", timer_generation)
                .set("jobs", to_payload(jobs))
                .set("sent_count", to_payload(sent_count));

            Payload p;
            p.set("magic", kMagic)
                .set("format", kCheckpointFormat)
                .set("round", server.version)
                .set("seed", config.seed)
                .set("time", now())
                .set("rng", std::move(rng))
                .set("queue", std::move(q))
                .set("server", to_payload(server))
                .set("clients", std::move(cl))
                .set("course", std::move(course))
                .set("counters", counters_payload(counters));
            return p;
        }

        void load(const Payload &p)
        {
            if (!p.contains("magic") || p.text("magic") != kMagic)
            {
                throw ValidationError("not a checkpoint");
            }
            if (p.integer("format") != kCheckpointFormat)
            {
                throw ValidationError("unsupported checkpoint format " + std::to_string(p.integer("format")));
            }
            if (static_cast<std::uint64_t>(p.integer("seed")) != config.seed)
            {
                throw ValidationError("checkpoint seed differs from the configured seed");
            }
            clock.advance_to(p.real("time"));
            const auto &rng = p.nested("rng");
            sample_counter = rng.integer("sample_counter");
            timer_generation = rng.integer("timer_generation");
            sent_count = id_map_from_payload(rng.nested("sent_count"));
            const auto jobs = id_map_from_payload(rng.nested("jobs"));

            const auto &q = p.nested("queue");
            std::vector<simnet::QueueEntry> entries;
            for (const auto &e : q.nested("entries").entries())
            {
                const auto &item = q.nested("entries").nested(e.name);
                simnet::QueueEntry qe;
                qe.time = item.real("time");
                qe.seq = static_cast<std::uint64_t>(item.integer("seq"));
                if (item.text("type") == "message")
                {
                    qe.item = msgflow::message_from_payload(item.nested("message"));
                }
                else
                {
                    qe.item = simnet::Timer{item.text("name"), item.integer("owner"), item.integer("round"),
                                            item.integer("generation")};
                }
                entries.push_back(std::move(qe));
            }
            queue = simnet::EventQueue::restore(std::move(entries), static_cast<std::uint64_t>(q.integer("next_seq")));

            server = server_state_from_payload(p.nested("server"));
            const auto &cl = p.nested("clients");
            if (cl.size() != num_clients())
            {
                throw ValidationError("checkpoint holds " + std::to_string(cl.size()) + " clients, world has " +
                                      std::to_string(num_clients()));
            }
            clients.assign(num_clients(), {});
            for (std::size_t c = 0; c < num_clients(); ++c)
            {
                const auto &one = cl.nested(std::to_string(c + 1));
                clients[c].local_state = learnkit::params_from_payload(one.nested("local_state"));
                clients[c].personal = learnkit::params_from_payload(one.nested("personal"));
                clients[c].finished = one.integer("finished") != 0;
                clients[c].jobs = jobs.at(static_cast<ParticipantId>(c + 1));
            }
            const auto &course = p.nested("course");
            joined.clear();
            for (const auto &[id, v] : id_map_from_payload(course.nested("joined")))
            {
                joined.insert(id);
            }
            finished = course.integer("finished") != 0;
            done = course.integer("done") != 0;
            finish_time = course.real("finish_time");
            stop_reason = course.text("stop_reason");
            best_val = course.real("best_val");
            since_best = course.integer("since_best");
            counters = counters_from_payload(p.nested("counters"));
        }
    };

    Course::Course(CourseConfig config, World world, std::ostream *log)
        : m_impl(std::make_unique<Impl>(std::move(config), std::move(world), log))
    {
        m_impl->start_fresh();
    }

    Course::Course(std::unique_ptr<Impl> impl) : m_impl(std::move(impl)) {}
    Course::~Course() = default;
    Course::Course(Course &&) noexcept = default;
    Course &Course::operator=(Course &&) noexcept = default;

    void Course::run()
    {
        while (!m_impl->queue.empty())
        {
            m_impl->step();
        }
        if (!m_impl->finished)
        {
            throw CourseStalled("event queue drained at t=" + std::to_string(m_impl->now()) + " in round " +
                                std::to_string(m_impl->server.version) + " before the course terminated");
        }
        m_impl->finalize();
    }

    bool Course::run_until_round(std::int64_t k)
    {
        while (m_impl->server.version < k && !m_impl->queue.empty())
        {
            m_impl->step();
        }
        return m_impl->server.version >= k;
    }

    msgflow::Bytes Course::checkpoint() const { return msgflow::encode_message(m_impl->snapshot()); }

    Course Course::restore(CourseConfig config, World world, std::span<const std::uint8_t> bytes, std::ostream *log)
    {
        auto impl = std::make_unique<Impl>(std::move(config), std::move(world), log);
        impl->load(msgflow::decode_message(bytes));
        return Course(std::move(impl));
    }

    const ServerState &Course::server() const noexcept { return m_impl->server; }
    const RunCounters &Course::counters() const noexcept { return m_impl->counters; }
    const msgflow::HandlerRegistry &Course::registry() const noexcept { return m_impl->registry; }
    const CourseConfig &Course::config() const noexcept { return m_impl->config; }
    VirtualTime Course::now() const noexcept { return m_impl->now(); }
    bool Course::finished() const noexcept { return m_impl->finished; }
    bool Course::done() const noexcept { return m_impl->done; }

    learnkit::EvalResult Course::evaluate_global(learnkit::Split split) const
    {
        return m_impl->evaluate_global(split);
    }

    std::map<ParticipantId, double> Course::client_accuracies() const { return m_impl->client_accuracies(); }

    CheckpointInfo inspect_checkpoint(std::span<const std::uint8_t> bytes)
    {
        const auto p = msgflow::decode_message(bytes);
        if (!p.contains("magic") || p.text("magic") != kMagic)
        {
            throw ValidationError("not a checkpoint");
        }
        return CheckpointInfo{p.integer("format"), p.integer("round"), static_cast<std::uint64_t>(p.integer("seed")),
                              p.real("time")};
    }
} // namespace fedsim::fedcore
