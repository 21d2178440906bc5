#include "fedsim/app/commands.hpp"

#include "fedsim/analytics/metrics.hpp"
#include "fedsim/analytics/runlog.hpp"
#include "fedsim/app/config.hpp"
#include "fedsim/autotune/fl_objective.hpp"
#include "fedsim/autotune/search.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/fedcore/course.hpp"
#include "fedsim/msgflow/flow_graph.hpp"
#include "fedsim/util/overloaded.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace fedsim::app
{
    namespace fs = std::filesystem;

    namespace
    {
        std::ofstream open_out(const fs::path &path, std::ios::openmode mode = std::ios::out)
        {
            std::ofstream os(path, mode);
            if (!os)
            {
                throw Error("cannot write " + path.string());
            }
            return os;
        }

        void write_metrics_csv(const fs::path &path, const analytics::RunLog &log)
        {
            auto os = open_out(path);
            os << "t,round,split,loss,acc,final\n";
            for (const auto &e : log.eval_points)
            {
                os << fmt::format("{},{},{},{},{},{}\n", e.t, e.round, e.split, e.loss,
                                  e.acc ? fmt::format("{}", *e.acc) : std::string(), e.final ? 1 : 0);
            }
        }

        YAML::Node load_yaml(const fs::path &path)
        {
            std::ifstream in(path);
            if (!in)
            {
                throw ConfigError("<file>", "cannot open " + path.string());
            }
            try
            {
                return YAML::Load(in);
            }
            catch (const YAML::ParserException &e)
            {
                throw ConfigError("<syntax>", e.msg, e.mark.is_null() ? -1 : e.mark.line + 1);
            }
        }

        // Shared error reporting for all subcommands.
        template <class F>
        int guarded(std::ostream &err, F &&body)
        {
            try
            {
                return body();
            }
            catch (const IncompleteCourse &e)
            {
                err << "incomplete course: " << e.what() << "\n";
                return kExitIncomplete;
            }
            catch (const CourseStalled &e)
            {
                err << "course stalled: " << e.what() << "\n";
                return kExitStalled;
            }
            catch (const ConfigError &e)
            {
                err << "config error: " << e.what() << "\n";
                return kExitError;
            }
            catch (const std::exception &e)
            {
                err << "error: " << e.what() << "\n";
                return kExitError;
            }
        }
    } // namespace

    void configure_logging(const std::string &fallback)
    {
        const char *env = std::getenv("FEDSIM_LOG");
        const std::string level = env != nullptr && *env != '\0' ? env : fallback;
        // Diagnostics go to stderr so stdout stays machine-readable.
        if (!spdlog::get("fedsim"))
        {
            spdlog::set_default_logger(spdlog::stderr_color_mt("fedsim"));
        }
        spdlog::set_level(spdlog::level::from_str(level));
    }

    int cmd_run(const RunOptions &options, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            auto config = load_config(options.config);
            if (options.seed)
            {
                config.seed = *options.seed;
            }
            if (options.out)
            {
                config.output.dir = options.out->string();
            }
            configure_logging(config.output.log_level);

            const fs::path dir = config.output.dir;
            fs::create_directories(dir);
            open_out(dir / "effective_config.yaml") << to_yaml(config);

            auto course_config = to_course_config(config);
            {
                std::ofstream log = open_out(dir / "runlog.jsonl", std::ios::out | std::ios::binary);
                fedcore::Course course(std::move(course_config), build_world(config), &log);
                course.run();
                const auto bytes = course.checkpoint();
                auto ck = open_out(dir / "checkpoint.bin", std::ios::out | std::ios::binary);
                ck.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            }

            const auto log = analytics::load_run_log(dir / "runlog.jsonl");
            write_metrics_csv(dir / "metrics.csv", log);
            out << fmt::format("{}: {} rounds, final time {:.3f}, stop reason {}\n", log.strategy, log.rounds,
                               log.final_time, log.stop_reason);
            for (const auto &e : log.eval_points)
            {
                if (e.final && e.split == "test")
                {
                    out << fmt::format("test loss {:.6f}", e.loss);
                    if (e.acc)
                    {
                        out << fmt::format(", test accuracy {:.4f}", *e.acc);
                    }
                    out << "\n";
                }
            }
            out << "outputs in " << dir.string() << "\n";
            return kExitOk;
        });
    }

    int cmd_check(const CheckOptions &options, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            const auto config = load_config(options.config);
            configure_logging(config.output.log_level);
            const auto registry = fedcore::build_registry(to_course_config(config));
            const auto graph = msgflow::build_flow_graph(registry);
            if (options.dot)
            {
                open_out(*options.dot) << graph.to_dot();
            }
            const auto result = msgflow::check_completeness(graph);
            return std::visit(Overloaded{[&](const msgflow::Complete &) {
                                             out << "complete\n";
                                             return kExitOk;
                                         },
                                         [&](const msgflow::CompleteWithWarnings &) {
                                             err << "warning: " << msgflow::describe(result) << "\n";
                                             out << "complete with warnings\n";
                                             return kExitOk;
                                         },
                                         [&](const msgflow::Incomplete &) {
                                             err << msgflow::describe(result) << "\n";
                                             return kExitIncomplete;
                                         }},
                              result);
        });
    }

    int cmd_report(const ReportOptions &options, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            const auto log = analytics::load_run_log(options.runlog);
            const fs::path dir = options.out ? *options.out : options.runlog.parent_path() / "report";
            fs::create_directories(dir);
            out << analytics::write_report(log, dir, options.targets, options.quantile) << "\n";
            return kExitOk;
        });
    }

    int cmd_hpo(const HpoOptions &options, std::ostream &out, std::ostream &err)
    {
        return guarded(err, [&] {
            const YAML::Node base = load_yaml(options.config);
            auto config = parse_config(base);
            if (options.seed)
            {
                config.seed = *options.seed;
            }
            configure_logging(config.output.log_level);
            const auto space = load_search_space(options.space);
            const fs::path dir = options.out ? *options.out : fs::path(config.output.dir) / "hpo";
            fs::create_directories(dir);

            // Trials stop on round count alone: the search decides how long each one runs.
            const auto seed = config.seed;
            std::mutex yaml_mutex;
            auto factory = [&](const autotune::Assignment &a) {
                std::lock_guard lock(yaml_mutex);
                YAML::Node node = YAML::Clone(base);
                apply_assignment(node, a);
                node["termination"]["max_rounds"] = 1000000;
                node["termination"]["patience"] = 0;
                auto c = parse_config(node);
                c.seed = seed;
                return to_course_config(c);
            };
            const autotune::FlObjective objective(factory,
                                                  std::make_shared<const fedcore::World>(build_world(config)));
            const autotune::SearchOptions search{seed, options.workers};

            autotune::SearchResult result;
            if (options.method == "rs")
            {
                result = autotune::random_search(space, options.budget, options.rounds, objective, search);
            }
            else if (options.method == "sha")
            {
                result = autotune::successive_halving(space, options.budget, options.rate, options.rungs,
                                                      options.rounds, objective, search);
            }
            else
            {
                throw ConfigError("method", "'" + options.method + "' is not one of rs, sha");
            }

            {
                auto csv = open_out(dir / "trials.csv");
                autotune::write_trials_csv(csv, result);
            }

            YAML::Node best = YAML::Clone(base);
            apply_assignment(best, result.best);
            auto best_config = parse_config(best);
            best_config.seed = seed;
            open_out(dir / "best_config.yaml") << to_yaml(best_config);

            out << fmt::format("best trial {} with validation loss {:.6f} after {} total rounds\n",
                               result.best_index, result.best_loss, result.total_rounds);
            for (const auto &[key, value] : result.best)
            {
                out << "  " << key << " = " << autotune::to_string(value) << "\n";
            }
            out << "outputs in " << dir.string() << "\n";
            return kExitOk;
        });
    }
} // namespace fedsim::app
