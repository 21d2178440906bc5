#include "fedsim/analytics/metrics.hpp"

#include "fedsim/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fedsim::analytics
{
    std::optional<VirtualTime> time_to_target(const RunLog &log, double target, const std::string &split)
    {
        std::optional<VirtualTime> best;
        for (const auto &e : log.eval_points)
        {
            if (e.split == split && e.acc && *e.acc >= target && (!best || e.t < *best))
            {
                best = e.t;
            }
        }
        return best;
    }

    std::int64_t Histogram::total() const noexcept
    {
        std::int64_t n = 0;
        for (const auto &[k, c] : counts)
        {
            n += c;
        }
        return n;
    }

    std::map<std::int64_t, double> Histogram::normalized() const
    {
        std::map<std::int64_t, double> out;
        const double n = static_cast<double>(total());
        for (const auto &[k, c] : counts)
        {
            out[k] = n > 0 ? static_cast<double>(c) / n : 0.0;
        }
        return out;
    }

    double Histogram::mean() const noexcept
    {
        const auto n = total();
        if (n == 0)
        {
            return 0.0;
        }
        double s = 0.0;
        for (const auto &[k, c] : counts)
        {
            s += static_cast<double>(k) * static_cast<double>(c);
        }
        return s / static_cast<double>(n);
    }

    std::map<ParticipantId, std::int64_t> agg_counts(const RunLog &log)
    {
        std::map<ParticipantId, std::int64_t> out;
        for (ParticipantId c = 1; c <= log.num_clients; ++c)
        {
            out[c] = 0;
        }
        for (const auto &a : log.agg_events)
        {
            for (auto c : a.clients)
            {
                ++out[c];
            }
        }
        return out;
    }

    Histogram agg_count_distribution(const RunLog &log)
    {
        Histogram h;
        if (log.agg_events.empty() && log.num_clients == 0)
        {
            return h;
        }
        for (const auto &[c, n] : agg_counts(log))
        {
            ++h.counts[n];
        }
        return h;
    }

    StalenessDistribution staleness_distribution(const RunLog &log)
    {
        StalenessDistribution d;
        for (const auto &a : log.agg_events)
        {
            for (auto tau : a.staleness)
            {
                ++d.hist.counts[tau];
            }
        }
        for (const auto &drop : log.drops)
        {
            if (drop.reason != "after_finish")
            {
                ++d.dropped;
            }
        }
        return d;
    }

    ClientwiseStats clientwise_stats(const std::map<ParticipantId, double> &per_client_acc, double q)
    {
        if (per_client_acc.empty())
        {
            throw ValidationError("client-wise statistics need at least one client");
        }
        if (!(q > 0.0 && q < 1.0))
        {
            throw ValidationError("quantile level must lie in (0, 1)");
        }
        std::vector<double> v;
        v.reserve(per_client_acc.size());
        for (const auto &[c, a] : per_client_acc)
        {
            v.push_back(a);
        }
        std::sort(v.begin(), v.end());
        ClientwiseStats s;
        s.count = v.size();
        const double n = static_cast<double>(v.size());
        for (double a : v)
        {
            s.mean += a;
        }
        s.mean /= n;
        double var = 0.0;
        for (double a : v)
        {
            var += (a - s.mean) * (a - s.mean);
        }
        s.stddev = std::sqrt(var / n);
        const auto rank = static_cast<std::size_t>(std::ceil(q * n));
        s.quantile = v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
        return s;
    }

    Reconciliation reconcile(const RunLog &log)
    {
        Reconciliation r;
        r.received = log.updates_received;
        for (const auto &a : log.agg_events)
        {
            r.contributed += static_cast<std::int64_t>(a.clients.size());
        }
        r.dropped = static_cast<std::int64_t>(log.drops.size());
        r.buffered_at_end = log.buffered_at_end;
        return r;
    }

    std::string write_report(const RunLog &log, const std::filesystem::path &dir, const std::vector<double> &targets,
                             double quantile)
    {
        using json = nlohmann::json;
        std::filesystem::create_directories(dir);
        auto open = [&](const char *name) {
            std::ofstream f(dir / name);
            if (!f)
            {
                throw ValidationError("cannot write " + (dir / name).string());
            }
            f.precision(17);
            return f;
        };

        json summary{{"strategy", log.strategy},
                     {"seed", log.seed},
                     {"rounds", log.rounds},
                     {"final_time", log.final_time},
                     {"stop_reason", log.stop_reason},
                     {"max_simultaneous_sends", log.max_simultaneous_sends}};

        {
            auto f = open("time_to_target.csv");
            f << "target,time\n";
            json ttt = json::object();
            for (double t : targets)
            {
                const auto hit = time_to_target(log, t);
                f << t << ',';
                if (hit)
                {
                    f << *hit;
                }
                f << '\n';
                ttt[fmt::format("{}", t)] = hit ? json(*hit) : json(nullptr);
            }
            summary["time_to_target"] = ttt;
        }
        {
            auto f = open("eval.csv");
            f << "t,round,split,loss,acc,final\n";
            for (const auto &e : log.eval_points)
            {
                f << e.t << ',' << e.round << ',' << e.split << ',' << e.loss << ',';
                if (e.acc)
                {
                    f << *e.acc;
                }
                f << ',' << (e.final ? 1 : 0) << '\n';
            }
        }
        {
            const auto h = agg_count_distribution(log);
            auto f = open("agg_count_hist.csv");
            f << "agg_count,clients,fraction\n";
            const auto norm = h.normalized();
            for (const auto &[k, c] : h.counts)
            {
                f << k << ',' << c << ',' << norm.at(k) << '\n';
            }
            summary["zero_contribution_fraction"] = norm.contains(0) ? norm.at(0) : 0.0;
        }
        {
            const auto d = staleness_distribution(log);
            auto f = open("staleness_hist.csv");
            f << "staleness,updates,fraction\n";
            const auto norm = d.hist.normalized();
            for (const auto &[k, c] : d.hist.counts)
            {
                f << k << ',' << c << ',' << norm.at(k) << '\n';
            }
            summary["mean_staleness"] = d.hist.mean();
            summary["dropped"] = d.dropped;
        }
        {
            auto f = open("clientwise.csv");
            f << "mean,quantile_level,quantile,stddev,clients\n";
            if (!log.client_acc.empty())
            {
                const auto s = clientwise_stats(log.client_acc, quantile);
                f << s.mean << ',' << quantile << ',' << s.quantile << ',' << s.stddev << ',' << s.count << '\n';
                summary["clientwise"] = {{"mean", s.mean}, {"quantile", s.quantile}, {"stddev", s.stddev}};
            }
        }
        const auto rec = reconcile(log);
        summary["reconciliation"] = {{"received", rec.received},
                                     {"contributed", rec.contributed},
                                     {"dropped", rec.dropped},
                                     {"buffered_at_end", rec.buffered_at_end},
                                     {"balanced", rec.balanced()}};
        for (auto it = log.eval_points.rbegin(); it != log.eval_points.rend(); ++it)
        {
            if (it->split == "test")
            {
                summary["final_test_loss"] = it->loss;
                summary["final_test_acc"] = it->acc ? json(*it->acc) : json(nullptr);
                break;
            }
        }
        const std::string text = summary.dump(2);
        auto f = open("summary.json");
        f << text << '\n';
        return text;
    }
} // namespace fedsim::analytics
