#include "fedsim/app/config.hpp"

#include "fedsim/datasynth/synth.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/util/overloaded.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace fedsim::app
{
    namespace
    {
        int line_of(const YAML::Node &n)
        {
            const auto mark = n.Mark();
            return mark.is_null() ? -1 : mark.line + 1;
        }

        // Reads one mapping, remembering which keys were consumed so that
        // anything left over can be reported as unknown.
        class Section
        {
        public:
            Section(const YAML::Node &node, std::string prefix, std::map<std::string, int> &lines)
                : m_node(node), m_prefix(std::move(prefix)), m_lines(lines)
            {
                if (m_node && !m_node.IsNull() && !m_node.IsMap())
                {
                    throw ConfigError(m_prefix.empty() ? "<root>" : m_prefix, "expected a mapping", line_of(m_node));
                }
                if (m_node && m_node.IsMap())
                {
                    for (auto it = m_node.begin(); it != m_node.end(); ++it)
                    {
                        const std::string key = it->first.as<std::string>();
                        m_lines[full(key)] = line_of(it->first);
                    }
                }
            }

            std::string full(const std::string &key) const { return m_prefix.empty() ? key : m_prefix + "." + key; }

            YAML::Node child(const std::string &key)
            {
                m_seen.insert(key);
                if (!m_node || !m_node.IsMap())
                {
                    return YAML::Node();
                }
                return m_node[key];
            }

            template <class T>
            void get(const std::string &key, T &out)
            {
                const YAML::Node n = child(key);
                if (!n || n.IsNull())
                {
                    return;
                }
                out = convert<T>(n, key);
            }

            template <class T>
            void get(const std::string &key, std::optional<T> &out)
            {
                const YAML::Node n = child(key);
                if (!n || n.IsNull())
                {
                    return;
                }
                out = convert<T>(n, key);
            }

            template <class T>
            void get(const std::string &key, std::vector<T> &out)
            {
                const YAML::Node n = child(key);
                if (!n || n.IsNull())
                {
                    return;
                }
                if (!n.IsSequence())
                {
                    throw ConfigError(full(key), "expected a list", line_of(n));
                }
                out.clear();
                for (const auto &item : n)
                {
                    out.push_back(convert<T>(item, key));
                }
            }

            void finish() const
            {
                if (!m_node || !m_node.IsMap())
                {
                    return;
                }
                for (auto it = m_node.begin(); it != m_node.end(); ++it)
                {
                    const std::string key = it->first.as<std::string>();
                    if (!m_seen.contains(key))
                    {
                        throw ConfigError(full(key), "unknown key", line_of(it->first));
                    }
                }
            }

        private:
            template <class T>
            T convert(const YAML::Node &n, const std::string &key) const
            {
                if (!n.IsScalar())
                {
                    throw ConfigError(full(key), "expected a scalar", line_of(n));
                }
                try
                {
                    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>)
                    {
                        const auto v = n.as<long long>();
                        if (v < 0)
                        {
                            throw ConfigError(full(key), "must be non-negative", line_of(n));
                        }
                        return static_cast<T>(v);
                    }
                    else
                    {
                        return n.as<T>();
                    }
                }
                catch (const YAML::BadConversion &)
                {
                    throw ConfigError(full(key), "cannot read '" + n.Scalar() + "' as " + type_name<T>(), line_of(n));
                }
            }

            template <class T>
            static const char *type_name()
            {
                if constexpr (std::is_same_v<T, bool>)
                {
                    return "a boolean";
                }
                else if constexpr (std::is_floating_point_v<T>)
                {
                    return "a number";
                }
                else if constexpr (std::is_integral_v<T>)
                {
                    return "an integer";
                }
                else
                {
                    return "a string";
                }
            }

            YAML::Node m_node;
            std::string m_prefix;
            std::map<std::string, int> &m_lines;
            std::set<std::string> m_seen;
        };

        struct Checker
        {
            const std::map<std::string, int> &lines;

            int line(const std::string &key) const
            {
                const auto it = lines.find(key);
                return it == lines.end() ? -1 : it->second;
            }

            void operator()(bool ok, const std::string &key, const std::string &what) const
            {
                if (!ok)
                {
                    throw ConfigError(key, what, line(key));
                }
            }

            void one_of(const std::string &value, std::initializer_list<const char *> allowed,
                        const std::string &key) const
            {
                std::string list;
                for (const char *a : allowed)
                {
                    if (value == a)
                    {
                        return;
                    }
                    list += list.empty() ? "" : ", ";
                    list += a;
                }
                throw ConfigError(key, "'" + value + "' is not one of " + list, line(key));
            }
        };

        std::string canonical_trigger(const std::string &s)
        {
            if (s == "all" || s == "all_received")
            {
                return "all_received";
            }
            if (s == "goal" || s == "goal_achieved")
            {
                return "goal_achieved";
            }
            if (s == "time" || s == "time_up")
            {
                return "time_up";
            }
            return s;
        }

        std::string canonical_manner(const std::string &s)
        {
            if (s == "aggr" || s == "after_aggregating")
            {
                return "after_aggregating";
            }
            if (s == "rece" || s == "after_receiving")
            {
                return "after_receiving";
            }
            return s;
        }

        void validate(const ExperimentConfig &c, const std::map<std::string, int> &lines)
        {
            const Checker check{lines};
            const auto &d = c.data;
            check(d.num_clients >= 1, "data.num_clients", "must be at least 1");
            check(d.num_classes >= 2, "data.num_classes", "must be at least 2");
            check(d.dim >= d.num_classes, "data.dim", "must be at least data.num_classes");
            check(d.separation >= 0.0, "data.separation", "must be non-negative");
            check.one_of(d.partition, {"iid", "dirichlet"}, "data.partition");
            check(d.alpha > 0.0, "data.alpha", "must be positive");
            const std::size_t min_rows = std::max<std::size_t>(1, c.trainer.batch_size);
            check(d.pool_size() >= d.num_classes && d.pool_size() >= d.num_clients * min_rows,
                  d.n_total > 0 ? "data.n_total" : "data.samples_per_client",
                  "pool too small for every client to hold max(1, batch_size) rows");
            for (int y : d.rare_labels)
            {
                check(y >= 0 && static_cast<std::size_t>(y) < d.num_classes, "data.rare_labels",
                      "label " + std::to_string(y) + " does not exist");
            }
            check(d.slow_fraction > 0.0 && d.slow_fraction <= 1.0, "data.slow_fraction", "must lie in (0, 1]");
            check(d.train_fraction > 0.0 && d.train_fraction <= 1.0, "data.train_fraction", "must lie in (0, 1]");
            check(d.eval_size >= 1, "data.eval_size", "must be at least 1");

            const auto &l = c.latency;
            check.one_of(l.kind, {"lognormal", "degenerate"}, "latency.kind");
            check(l.comp_lo > 0.0 && l.comp_lo <= l.comp_hi, "latency.comp_lo", "need 0 < comp_lo <= comp_hi");
            check(l.comm_lo > 0.0 && l.comm_lo <= l.comm_hi, "latency.comm_lo", "need 0 < comm_lo <= comm_hi");
            check(l.sigma >= 0.0, "latency.sigma", "must be non-negative");
            check(l.stragglers >= 0.0 && l.stragglers <= 1.0, "latency.stragglers", "must lie in [0, 1]");
            check(l.straggler_factor > 0.0, "latency.straggler_factor", "must be positive");

            check.one_of(c.model.kind, {"quadratic", "logistic", "mlp"}, "model.kind");
            if (!c.model.loss.empty())
            {
                check.one_of(c.model.loss, {"squared_error", "logistic_ce"}, "model.loss");
            }
            check(c.model.hidden >= 1, "model.hidden", "must be at least 1");
            check(c.model.curvature.empty() || c.model.curvature.size() == d.dim, "model.curvature",
                  "needs one entry per data dimension");

            check(c.trainer.local_steps >= 1, "trainer.local_steps", "must be at least 1");
            check(c.trainer.learning_rate > 0.0, "trainer.learning_rate", "must be positive");
            check(!c.trainer.ditto_lambda || *c.trainer.ditto_lambda >= 0.0, "trainer.ditto_lambda",
                  "must be non-negative");
            for (const auto &cand : c.trainer.candidates)
            {
                check(cand.learning_rate > 0.0 && cand.local_steps >= 1, "trainer.candidates",
                      "candidates need learning_rate > 0 and local_steps >= 1");
            }

            check.one_of(c.aggregator.kind, {"fedavg", "krum"}, "aggregator.kind");

            const auto &s = c.strategy;
            check.one_of(s.trigger, {"all_received", "goal_achieved", "time_up"}, "strategy.trigger");
            check.one_of(s.manner, {"after_aggregating", "after_receiving"}, "strategy.manner");
            check.one_of(s.sampler, {"uniform", "responsiveness", "grouped"}, "strategy.sampler");
            check.one_of(s.discount, {"inverse", "none"}, "strategy.discount");

            check(c.eval.cadence >= 1, "eval.cadence", "must be at least 1");
            check(c.eval.quantile > 0.0 && c.eval.quantile < 1.0, "eval.quantile", "must lie in (0, 1)");
            for (double t : c.eval.target_accuracy)
            {
                check(t >= 0.0 && t <= 1.0, "eval.target_accuracy", "targets must lie in [0, 1]");
            }
            check(c.termination.max_rounds >= 0, "termination.max_rounds", "must be non-negative");
            check(c.termination.patience >= 0, "termination.patience", "must be non-negative");
            check(c.dp.noisy_client_fraction >= 0.0 && c.dp.noisy_client_fraction <= 1.0,
                  "dp.noisy_client_fraction", "must lie in [0, 1]");
            check(c.dp.sigma >= 0.0, "dp.sigma", "must be non-negative");
            check.one_of(c.output.log_level, {"trace", "debug", "info", "warn", "error", "critical", "off"},
                         "output.log_level");
            for (const auto &o : c.overrides)
            {
                check(!o.event.empty() && !o.id.empty(), "handlers.override", "entries need an event and an id");
                check.one_of(o.kind, {"message", "condition"}, "handlers.override");
                check.one_of(o.role, {"server", "client"}, "handlers.override");
            }
        }

        std::string num(double v)
        {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            std::string s(buf, res.ptr);
            if (s.find_first_of(".eEni") == std::string::npos)
            {
                s += ".0";
            }
            return s;
        }

        template <class T>
        void emit_list(YAML::Emitter &out, const std::vector<T> &v)
        {
            out << YAML::Flow << YAML::BeginSeq;
            for (const auto &x : v)
            {
                if constexpr (std::is_floating_point_v<T>)
                {
                    out << num(x);
                }
                else
                {
                    out << x;
                }
            }
            out << YAML::EndSeq;
        }

        simnet::Duration make_duration(const LatencyConfig &l, double mean)
        {
            if (l.kind == "degenerate" || l.sigma == 0.0)
            {
                return simnet::Degenerate{mean};
            }
            return simnet::LogNormal::with_mean(mean, l.sigma);
        }

        double log_uniform(simnet::SeededRng &rng, double lo, double hi)
        {
            return lo == hi ? lo : std::exp(rng.uniform(std::log(lo), std::log(hi)));
        }
    } // namespace

    ExperimentConfig parse_config(const YAML::Node &root)
    {
        ExperimentConfig c;
        std::map<std::string, int> lines;
        Section top(root, "", lines);
        top.get("seed", c.seed);
        {
            Section s(top.child("data"), "data", lines);
            auto &d = c.data;
            s.get("num_clients", d.num_clients);
            s.get("num_classes", d.num_classes);
            s.get("dim", d.dim);
            s.get("samples_per_client", d.samples_per_client);
            s.get("n_total", d.n_total);
            s.get("separation", d.separation);
            s.get("partition", d.partition);
            s.get("alpha", d.alpha);
            s.get("rare_labels", d.rare_labels);
            s.get("slow_fraction", d.slow_fraction);
            s.get("train_fraction", d.train_fraction);
            s.get("eval_size", d.eval_size);
            s.finish();
        }
        {
            Section s(top.child("latency"), "latency", lines);
            auto &l = c.latency;
            s.get("kind", l.kind);
            s.get("comp_lo", l.comp_lo);
            s.get("comp_hi", l.comp_hi);
            s.get("comm_lo", l.comm_lo);
            s.get("comm_hi", l.comm_hi);
            s.get("sigma", l.sigma);
            s.get("stragglers", l.stragglers);
            s.get("straggler_factor", l.straggler_factor);
            s.finish();
        }
        {
            Section s(top.child("model"), "model", lines);
            s.get("kind", c.model.kind);
            s.get("loss", c.model.loss);
            s.get("hidden", c.model.hidden);
            s.get("curvature", c.model.curvature);
            s.finish();
        }
        {
            Section s(top.child("trainer"), "trainer", lines);
            auto &t = c.trainer;
            s.get("local_steps", t.local_steps);
            s.get("learning_rate", t.learning_rate);
            s.get("batch_size", t.batch_size);
            s.get("share_list", t.share_list);
            s.get("ditto_lambda", t.ditto_lambda);
            const YAML::Node cands = s.child("candidates");
            if (cands && !cands.IsNull())
            {
                if (!cands.IsSequence())
                {
                    throw ConfigError("trainer.candidates", "expected a list", line_of(cands));
                }
                for (const auto &item : cands)
                {
                    Section cs(item, "trainer.candidates", lines);
                    CandidateConfig cand{t.learning_rate, t.local_steps};
                    cs.get("learning_rate", cand.learning_rate);
                    cs.get("local_steps", cand.local_steps);
                    cs.finish();
                    t.candidates.push_back(cand);
                }
            }
            s.finish();
        }
        {
            Section s(top.child("aggregator"), "aggregator", lines);
            s.get("kind", c.aggregator.kind);
            s.get("krum_f", c.aggregator.krum_f);
            s.get("weighted", c.aggregator.weighted);
            s.finish();
        }
        {
            Section s(top.child("strategy"), "strategy", lines);
            auto &st = c.strategy;
            s.get("trigger", st.trigger);
            s.get("goal", st.goal);
            s.get("time_budget", st.time_budget);
            s.get("min_feedback", st.min_feedback);
            s.get("manner", st.manner);
            s.get("sampler", st.sampler);
            s.get("num_groups", st.num_groups);
            s.get("concurrency", st.concurrency);
            s.get("over_selection_extra", st.over_selection_extra);
            s.get("tau_max", st.tau_max);
            s.get("discount", st.discount);
            s.finish();
            st.trigger = canonical_trigger(st.trigger);
            st.manner = canonical_manner(st.manner);
        }
        {
            Section s(top.child("eval"), "eval", lines);
            s.get("cadence", c.eval.cadence);
            const YAML::Node target = s.child("target_accuracy");
            if (target && target.IsScalar())
            {
                double t = 0.0;
                s.get("target_accuracy", t);
                c.eval.target_accuracy = {t};
            }
            else
            {
                s.get("target_accuracy", c.eval.target_accuracy);
            }
            s.get("clientwise", c.eval.clientwise);
            s.get("quantile", c.eval.quantile);
            s.finish();
        }
        {
            Section s(top.child("termination"), "termination", lines);
            s.get("max_rounds", c.termination.max_rounds);
            s.get("patience", c.termination.patience);
            s.finish();
        }
        {
            Section s(top.child("dp"), "dp", lines);
            s.get("noisy_client_fraction", c.dp.noisy_client_fraction);
            s.get("sigma", c.dp.sigma);
            s.finish();
        }
        {
            Section s(top.child("output"), "output", lines);
            s.get("dir", c.output.dir);
            s.get("log_level", c.output.log_level);
            s.finish();
        }
        {
            Section s(top.child("handlers"), "handlers", lines);
            const YAML::Node list = s.child("override");
            if (list && !list.IsNull())
            {
                if (!list.IsSequence())
                {
                    throw ConfigError("handlers.override", "expected a list", line_of(list));
                }
                for (const auto &item : list)
                {
                    Section os(item, "handlers.override", lines);
                    OverrideSection o;
                    os.get("event", o.event);
                    os.get("kind", o.kind);
                    os.get("id", o.id);
                    os.get("consumes", o.consumes);
                    os.get("produces", o.produces);
                    os.get("role", o.role);
                    os.finish();
                    c.overrides.push_back(std::move(o));
                }
            }
            s.finish();
        }
        top.finish();

        validate(c, lines);
        const Checker check{lines};
        try
        {
            const auto course = to_course_config(c);
            fedcore::validate(course.strategy, c.data.num_clients);
            learnkit::validate(course.trainer);
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(e.key(), e.reason(), check.line(e.key()));
        }
        catch (const ValidationError &e)
        {
            throw ConfigError("config", e.what());
        }
        return c;
    }

    ExperimentConfig parse_config_text(const std::string &text)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException &e)
        {
            throw ConfigError("<syntax>", e.msg, e.mark.is_null() ? -1 : e.mark.line + 1);
        }
        return parse_config(root);
    }

    ExperimentConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ConfigError("<file>", "cannot open " + path.string());
        }
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_config_text(ss.str());
    }

    std::string to_yaml(const ExperimentConfig &c)
    {
        YAML::Emitter out;
        out << YAML::BeginMap;
        out << YAML::Key << "seed" << YAML::Value << c.seed;

        out << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "num_clients" << YAML::Value << c.data.num_clients;
        out << YAML::Key << "num_classes" << YAML::Value << c.data.num_classes;
        out << YAML::Key << "dim" << YAML::Value << c.data.dim;
        out << YAML::Key << "samples_per_client" << YAML::Value << c.data.samples_per_client;
        out << YAML::Key << "n_total" << YAML::Value << c.data.n_total;
        out << YAML::Key << "separation" << YAML::Value << num(c.data.separation);
        out << YAML::Key << "partition" << YAML::Value << c.data.partition;
        out << YAML::Key << "alpha" << YAML::Value << num(c.data.alpha);
        out << YAML::Key << "rare_labels" << YAML::Value;
        emit_list(out, c.data.rare_labels);
        out << YAML::Key << "slow_fraction" << YAML::Value << num(c.data.slow_fraction);
        out << YAML::Key << "train_fraction" << YAML::Value << num(c.data.train_fraction);
        out << YAML::Key << "eval_size" << YAML::Value << c.data.eval_size;
        out << YAML::EndMap;

        out << YAML::Key << "latency" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << c.latency.kind;
        out << YAML::Key << "comp_lo" << YAML::Value << num(c.latency.comp_lo);
        out << YAML::Key << "comp_hi" << YAML::Value << num(c.latency.comp_hi);
        out << YAML::Key << "comm_lo" << YAML::Value << num(c.latency.comm_lo);
        out << YAML::Key << "comm_hi" << YAML::Value << num(c.latency.comm_hi);
        out << YAML::Key << "sigma" << YAML::Value << num(c.latency.sigma);
        out << YAML::Key << "stragglers" << YAML::Value << num(c.latency.stragglers);
        out << YAML::Key << "straggler_factor" << YAML::Value << num(c.latency.straggler_factor);
        out << YAML::EndMap;

        out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << c.model.kind;
        if (!c.model.loss.empty())
        {
            out << YAML::Key << "loss" << YAML::Value << c.model.loss;
        }
        out << YAML::Key << "hidden" << YAML::Value << c.model.hidden;
        out << YAML::Key << "curvature" << YAML::Value;
        emit_list(out, c.model.curvature);
        out << YAML::EndMap;

        out << YAML::Key << "trainer" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "local_steps" << YAML::Value << c.trainer.local_steps;
        out << YAML::Key << "learning_rate" << YAML::Value << num(c.trainer.learning_rate);
        out << YAML::Key << "batch_size" << YAML::Value << c.trainer.batch_size;
        out << YAML::Key << "share_list" << YAML::Value;
        emit_list(out, c.trainer.share_list);
        if (c.trainer.ditto_lambda)
        {
            out << YAML::Key << "ditto_lambda" << YAML::Value << num(*c.trainer.ditto_lambda);
        }
        out << YAML::Key << "candidates" << YAML::Value << YAML::BeginSeq;
        for (const auto &cand : c.trainer.candidates)
        {
            out << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "learning_rate" << YAML::Value << num(cand.learning_rate);
            out << YAML::Key << "local_steps" << YAML::Value << cand.local_steps;
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::EndMap;

        out << YAML::Key << "aggregator" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << c.aggregator.kind;
        out << YAML::Key << "krum_f" << YAML::Value << c.aggregator.krum_f;
        out << YAML::Key << "weighted" << YAML::Value << c.aggregator.weighted;
        out << YAML::EndMap;

        const auto &s = c.strategy;
        out << YAML::Key << "strategy" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "trigger" << YAML::Value << s.trigger;
        out << YAML::Key << "goal" << YAML::Value << s.goal;
        out << YAML::Key << "time_budget" << YAML::Value << num(s.time_budget);
        out << YAML::Key << "min_feedback" << YAML::Value << s.min_feedback;
        out << YAML::Key << "manner" << YAML::Value << s.manner;
        out << YAML::Key << "sampler" << YAML::Value << s.sampler;
        out << YAML::Key << "num_groups" << YAML::Value << s.num_groups;
        out << YAML::Key << "concurrency" << YAML::Value << s.concurrency;
        out << YAML::Key << "over_selection_extra" << YAML::Value << num(s.over_selection_extra);
        out << YAML::Key << "tau_max" << YAML::Value << s.tau_max;
        out << YAML::Key << "discount" << YAML::Value << s.discount;
        out << YAML::EndMap;

        out << YAML::Key << "eval" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "cadence" << YAML::Value << c.eval.cadence;
        out << YAML::Key << "target_accuracy" << YAML::Value;
        emit_list(out, c.eval.target_accuracy);
        out << YAML::Key << "clientwise" << YAML::Value << c.eval.clientwise;
        out << YAML::Key << "quantile" << YAML::Value << num(c.eval.quantile);
        out << YAML::EndMap;

        out << YAML::Key << "termination" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "max_rounds" << YAML::Value << c.termination.max_rounds;
        out << YAML::Key << "patience" << YAML::Value << c.termination.patience;
        out << YAML::EndMap;

        out << YAML::Key << "dp" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "noisy_client_fraction" << YAML::Value << num(c.dp.noisy_client_fraction);
        out << YAML::Key << "sigma" << YAML::Value << num(c.dp.sigma);
        out << YAML::EndMap;

        out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "dir" << YAML::Value << c.output.dir;
        out << YAML::Key << "log_level" << YAML::Value << c.output.log_level;
        out << YAML::EndMap;

        out << YAML::Key << "handlers" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "override" << YAML::Value << YAML::BeginSeq;
        for (const auto &o : c.overrides)
        {
            out << YAML::BeginMap;
            out << YAML::Key << "event" << YAML::Value << o.event;
            out << YAML::Key << "kind" << YAML::Value << o.kind;
            out << YAML::Key << "id" << YAML::Value << o.id;
            out << YAML::Key << "consumes" << YAML::Value;
            emit_list(out, o.consumes);
            out << YAML::Key << "produces" << YAML::Value;
            emit_list(out, o.produces);
            out << YAML::Key << "role" << YAML::Value << o.role;
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::EndMap;

        out << YAML::EndMap;
        return std::string(out.c_str()) + "\n";
    }

    fedcore::CourseConfig to_course_config(const ExperimentConfig &c)
    {
        fedcore::CourseConfig cc;
        cc.seed = c.seed;

        learnkit::ModelSpec spec;
        spec.kind = learnkit::parse_model_kind(c.model.kind);
        spec.loss = !c.model.loss.empty() ? learnkit::parse_loss_kind(c.model.loss)
                    : spec.kind == learnkit::ModelKind::Quadratic ? learnkit::LossKind::SquaredError
                                                                  : learnkit::LossKind::LogisticCE;
        spec.input_dim = c.data.dim;
        spec.num_classes = c.data.num_classes;
        spec.hidden = c.model.hidden;
        spec.curvature = c.model.curvature;

        cc.trainer.model = spec;
        cc.trainer.local_steps = c.trainer.local_steps;
        cc.trainer.learning_rate = c.trainer.learning_rate;
        cc.trainer.batch_size = c.trainer.batch_size;
        cc.trainer.share_list = {c.trainer.share_list.begin(), c.trainer.share_list.end()};
        cc.trainer.ditto_lambda = c.trainer.ditto_lambda;
        for (const auto &cand : c.trainer.candidates)
        {
            auto t = cc.trainer;
            t.learning_rate = cand.learning_rate;
            t.local_steps = cand.local_steps;
            cc.candidates.push_back(std::move(t));
        }

        cc.aggregator.kind = c.aggregator.kind == "krum" ? fedcore::AggregatorKind::Krum : fedcore::AggregatorKind::FedAvg;
        cc.aggregator.krum_f = c.aggregator.krum_f;
        cc.aggregator.weighted = c.aggregator.weighted;

        const auto &s = c.strategy;
        auto &st = cc.strategy;
        if (s.trigger == "goal_achieved")
        {
            st.trigger = fedcore::GoalAchieved{s.goal};
        }
        else if (s.trigger == "time_up")
        {
            st.trigger = fedcore::TimeUp{s.time_budget, s.min_feedback};
        }
        else
        {
            st.trigger = fedcore::AllReceived{};
        }
        st.manner = s.manner == "after_receiving" ? fedcore::Manner::AfterReceiving : fedcore::Manner::AfterAggregating;
        if (s.sampler == "responsiveness")
        {
            st.sampler = fedcore::ResponsivenessSampler{};
        }
        else if (s.sampler == "grouped")
        {
            st.sampler = fedcore::GroupedSampler{s.num_groups};
        }
        else
        {
            st.sampler = fedcore::UniformSampler{};
        }
        st.staleness.tau_max = s.tau_max;
        st.staleness.discount = s.discount == "none" ? fedcore::Discount::None : fedcore::Discount::Inverse;
        st.concurrency = s.concurrency;
        st.over_selection_extra = s.over_selection_extra;

        cc.max_rounds = c.termination.max_rounds;
        cc.patience = c.termination.patience;
        cc.eval_cadence = c.eval.cadence;
        cc.clientwise_eval = c.eval.clientwise;
        cc.dp_sigma = c.dp.sigma;

        for (const auto &o : c.overrides)
        {
            fedcore::HandlerOverride ho;
            ho.event = o.kind == "condition" ? msgflow::EventKind::condition(o.event)
                                             : msgflow::EventKind::message(o.event);
            ho.decl.id = o.id;
            ho.decl.consumes = {o.consumes.begin(), o.consumes.end()};
            ho.decl.produces = {o.produces.begin(), o.produces.end()};
            ho.decl.role = o.role == "client" ? msgflow::Role::Client : msgflow::Role::Server;
            cc.overrides.push_back(std::move(ho));
        }
        return cc;
    }

    fedcore::World build_world(const ExperimentConfig &c)
    {
        using simnet::Purpose;
        const auto &d = c.data;
        const auto pool = datasynth::gen_classification(d.num_classes, d.dim, d.pool_size(), d.separation, c.seed);
        const auto eval_pool = datasynth::gen_classification(
            d.num_classes, d.dim, 2 * d.eval_size, d.separation,
            simnet::derive_stream_seed(c.seed, {Purpose::Data, 0, 1}));

        // Latency profiles.
        std::vector<simnet::ClientProfile> profiles;
        std::vector<ParticipantId> ids(d.num_clients);
        std::iota(ids.begin(), ids.end(), ParticipantId{1});
        std::set<ParticipantId> stragglers;
        {
            simnet::SeededRng rng(c.seed, {Purpose::Latency, 0, 1});
            auto order = ids;
            std::shuffle(order.begin(), order.end(), rng.engine());
            const auto n = static_cast<std::size_t>(std::ceil(c.latency.stragglers * static_cast<double>(order.size())));
            stragglers.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n, order.size())));
        }
        for (auto id : ids)
        {
            simnet::SeededRng rng(c.seed, {Purpose::Latency, id, 0});
            double comp = log_uniform(rng, c.latency.comp_lo, c.latency.comp_hi);
            double comm = log_uniform(rng, c.latency.comm_lo, c.latency.comm_hi);
            if (stragglers.contains(id))
            {
                comp *= c.latency.straggler_factor;
                comm *= c.latency.straggler_factor;
            }
            profiles.push_back({id, make_duration(c.latency, comp), make_duration(c.latency, comm)});
        }

        // Partition, then optional rare-label coupling.
        const std::size_t min_rows = std::max<std::size_t>(1, c.trainer.batch_size);
        auto partition = d.partition == "iid"
                             ? datasynth::partition_iid(pool, d.num_clients, c.seed)
                             : datasynth::partition_dirichlet(pool, d.num_clients, d.alpha, c.seed, min_rows);
        if (!d.rare_labels.empty())
        {
            partition = datasynth::couple_rare_labels(partition, pool, profiles,
                                                      {d.rare_labels.begin(), d.rare_labels.end()}, d.slow_fraction);
        }

        fedcore::World world;
        for (std::size_t i = 0; i < d.num_clients; ++i)
        {
            const auto id = ids[i];
            world.clients.push_back(
                {profiles[i], datasynth::to_dataset(pool, partition.assignment.at(id), d.train_fraction,
                                                    simnet::derive_stream_seed(c.seed, {Purpose::Data, id, 2}))});
        }

        // Global evaluation data: first half validation, second half test.
        std::vector<std::size_t> all(eval_pool.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        world.eval_data = datasynth::to_dataset(eval_pool, all, 1.0, c.seed);
        world.eval_data.train.clear();
        for (std::size_t r = 0; r < eval_pool.size(); ++r)
        {
            (r < d.eval_size ? world.eval_data.validation : world.eval_data.test).push_back(r);
        }

        {
            simnet::SeededRng rng(c.seed, {Purpose::NoisyClients, 0, 0});
            auto order = ids;
            std::shuffle(order.begin(), order.end(), rng.engine());
            const auto n = static_cast<std::size_t>(
                std::llround(c.dp.noisy_client_fraction * static_cast<double>(order.size())));
            world.noisy_clients.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
        }
        return world;
    }

    void apply_assignment(YAML::Node &root, const autotune::Assignment &assignment)
    {
        for (const auto &[key, value] : assignment)
        {
            if (key == "seed" || key.rfind("data.", 0) == 0 || key.rfind("latency.", 0) == 0)
            {
                throw ConfigError(key, "cannot be searched: the world is built once per search");
            }
            const auto dot = key.find('.');
            YAML::Node target = dot == std::string::npos ? root : root[key.substr(0, dot)];
            const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
            if (leaf.find('.') != std::string::npos)
            {
                throw ConfigError(key, "search keys are at most section.key");
            }
            std::visit(Overloaded{[&](double v) { target[leaf] = v; }, [&](std::int64_t v) { target[leaf] = v; },
                                  [&](const std::string &v) { target[leaf] = v; }},
                       value);
        }
    }

    autotune::SearchSpace parse_search_space(const YAML::Node &root)
    {
        std::map<std::string, int> lines;
        Section top(root, "", lines);
        const YAML::Node dims = top.child("dimensions");
        top.finish();
        if (!dims || !dims.IsSequence())
        {
            throw ConfigError("dimensions", "expected a list of search dimensions", line_of(root));
        }
        autotune::SearchSpace space;
        for (const auto &item : dims)
        {
            Section s(item, "dimensions", lines);
            autotune::Dimension d;
            std::string scale = "linear";
            s.get("name", d.name);
            s.get("scale", scale);
            s.get("lo", d.lo);
            s.get("hi", d.hi);
            s.get("choices", d.choices);
            s.finish();
            if (!d.choices.empty())
            {
                d.scale = autotune::Scale::Categorical;
            }
            else if (scale == "log")
            {
                d.scale = autotune::Scale::Log;
            }
            else if (scale == "int" || scale == "integer")
            {
                d.scale = autotune::Scale::Integer;
            }
            else if (scale == "linear")
            {
                d.scale = autotune::Scale::Linear;
            }
            else
            {
                throw ConfigError("dimensions.scale", "'" + scale + "' is not one of linear, log, int",
                                  line_of(item));
            }
            space.dims.push_back(std::move(d));
        }
        try
        {
            autotune::validate(space);
        }
        catch (const ValidationError &e)
        {
            throw ConfigError("dimensions", e.what());
        }
        return space;
    }

    autotune::SearchSpace load_search_space(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ConfigError("<file>", "cannot open " + path.string());
        }
        std::stringstream ss;
        ss << in.rdbuf();
        try
        {
            return parse_search_space(YAML::Load(ss.str()));
        }
        catch (const YAML::ParserException &e)
        {
            throw ConfigError("<syntax>", e.msg, e.mark.is_null() ? -1 : e.mark.line + 1);
        }
    }
} // namespace fedsim::app
