#include "fedsim/analytics/runlog.hpp"

#include "fedsim/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>

namespace fedsim::analytics
{
    namespace
    {
        using json = nlohmann::json;

        void apply_record(RunLog &log, const json &r)
        {
            const std::string kind = r.at("kind").get<std::string>();
            if (kind == "header")
            {
                log.schema = r.at("schema").get<int>();
                log.seed = r.at("seed").get<std::uint64_t>();
                log.strategy = r.at("strategy").get<std::string>();
                log.tau_max = r.at("tau_max").get<std::int64_t>();
                log.num_clients = r.at("num_clients").get<std::int64_t>();
            }
            else if (kind == "event")
            {
                if (r.at("msg_type").get<std::string>() == msgflow::msg::kModelUpdate)
                {
                    ++log.updates_received;
                }
            }
            else if (kind == "eval")
            {
                EvalPoint e;
                e.t = r.at("t").get<double>();
                e.round = r.at("round").get<std::int64_t>();
                e.split = r.at("split").get<std::string>();
                e.loss = r.at("loss").get<double>();
                if (!r.at("acc").is_null())
                {
                    e.acc = r.at("acc").get<double>();
                }
                e.final = r.at("final").get<bool>();
                log.eval_points.push_back(std::move(e));
            }
            else if (kind == "agg")
            {
                AggEvent a;
                a.t = r.at("t").get<double>();
                a.round = r.at("round").get<std::int64_t>();
                a.clients = r.at("clients").get<std::vector<ParticipantId>>();
                a.staleness = r.at("staleness").get<std::vector<std::int64_t>>();
                a.weights = r.at("weights").get<std::vector<double>>();
                a.released = r.at("released").get<std::vector<ParticipantId>>();
                log.agg_events.push_back(std::move(a));
            }
            else if (kind == "drop")
            {
                DropEvent d;
                d.t = r.at("t").get<double>();
                d.round = r.at("round").get<std::int64_t>();
                d.client = r.at("client").get<ParticipantId>();
                d.reason = r.at("reason").get<std::string>();
                d.staleness = r.at("staleness").get<std::int64_t>();
                log.drops.push_back(std::move(d));
            }
            else if (kind == "summary")
            {
                log.has_summary = true;
                log.rounds = r.at("rounds").get<std::int64_t>();
                log.final_time = r.at("final_time").get<double>();
                log.stop_reason = r.at("stop_reason").get<std::string>();
                log.buffered_at_end = r.at("buffered_at_end").get<std::int64_t>();
                log.max_simultaneous_sends = r.at("max_simultaneous_sends").get<std::int64_t>();
                if (r.contains("client_acc"))
                {
                    for (const auto &[k, v] : r.at("client_acc").items())
                    {
                        log.client_acc.emplace(std::stoll(k), v.get<double>());
                    }
                }
            }
        }
    } // namespace

    RunLog parse_run_log(std::istream &in)
    {
        RunLog log;
        std::string line;
        int number = 0;
        while (std::getline(in, line))
        {
            ++number;
            if (line.empty())
            {
                continue;
            }
            try
            {
                apply_record(log, json::parse(line));
            }
            catch (const json::exception &e)
            {
                throw ValidationError("run log line " + std::to_string(number) + ": " + e.what());
            }
            log.lines.push_back(std::move(line));
        }
        return log;
    }

    RunLog load_run_log(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ValidationError("cannot open run log " + path.string());
        }
        return parse_run_log(in);
    }
} // namespace fedsim::analytics
