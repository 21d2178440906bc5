#include "fedsim/datasynth/synth.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/simnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <optional>
#include <random>
#include <span>
#include <string>

namespace fedsim::datasynth
{
    namespace
    {
        constexpr int kMaxDirichletDraws = 100;

        std::vector<double> dirichlet(std::size_t m, double alpha, simnet::SeededRng &rng)
        {
            std::gamma_distribution<double> gamma(alpha, 1.0);
            std::vector<double> p(m);
            double sum = 0.0;
            for (auto &v : p)
            {
                v = gamma(rng.engine());
                sum += v;
            }
            if (!(sum > 0.0))
            {
                // Every gamma draw underflowed; put all mass on one client.
                std::fill(p.begin(), p.end(), 0.0);
                p[rng.index(m)] = 1.0;
                return p;
            }
            for (auto &v : p)
            {
                v /= sum;
            }
            return p;
        }

        std::vector<std::vector<std::size_t>> rows_by_class(const LabeledPool &pool)
        {
            std::vector<std::vector<std::size_t>> by_class(pool.num_classes);
            for (std::size_t i = 0; i < pool.size(); ++i)
            {
                by_class[static_cast<std::size_t>(pool.labels[i])].push_back(i);
            }
            return by_class;
        }

        Partition from_lists(std::vector<std::vector<std::size_t>> lists)
        {
            Partition p;
            for (std::size_t c = 0; c < lists.size(); ++c)
            {
                std::sort(lists[c].begin(), lists[c].end());
                p.assignment.emplace(static_cast<ParticipantId>(c + 1), std::move(lists[c]));
            }
            return p;
        }
    } // namespace

    std::vector<std::size_t> LabeledPool::class_counts() const
    {
        std::vector<std::size_t> counts(num_classes, 0);
        for (int y : labels)
        {
            ++counts[static_cast<std::size_t>(y)];
        }
        return counts;
    }

    LabeledPool gen_classification(std::size_t num_classes, std::size_t dim, std::size_t n_total, double separation,
                                   std::uint64_t seed)
    {
        if (num_classes < 2 || n_total < num_classes || dim < num_classes)
        {
            throw ValidationError("gen_classification needs num_classes >= 2, n_total >= num_classes and "
                                  "dim >= num_classes");
        }
        simnet::SeededRng rng(seed, {simnet::Purpose::Data, 0, 0});
        LabeledPool pool;
        pool.dim = dim;
        pool.num_classes = num_classes;
        pool.labels.resize(n_total);
        for (std::size_t i = 0; i < n_total; ++i)
        {
            pool.labels[i] = static_cast<int>(i % num_classes);
        }
        std::shuffle(pool.labels.begin(), pool.labels.end(), rng.engine());
        pool.features.resize(n_total * dim);
        for (std::size_t i = 0; i < n_total; ++i)
        {
            for (std::size_t j = 0; j < dim; ++j)
            {
                const double centre = (static_cast<std::size_t>(pool.labels[i]) == j) ? separation : 0.0;
                pool.features[i * dim + j] = centre + rng.normal();
            }
        }
        return pool;
    }

    std::size_t Partition::total() const noexcept
    {
        std::size_t n = 0;
        for (const auto &[id, rows] : assignment)
        {
            n += rows.size();
        }
        return n;
    }

    void check_disjoint_cover(const Partition &p, std::size_t pool_size)
    {
        std::vector<char> seen(pool_size, 0);
        for (const auto &[id, rows] : p.assignment)
        {
            for (std::size_t r : rows)
            {
                if (r >= pool_size || seen[r])
                {
                    throw PartitionError("partition assigns row " + std::to_string(r) + " twice or out of range");
                }
                seen[r] = 1;
            }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        {
            throw PartitionError("partition drops rows of the pool");
        }
    }

    Partition partition_iid(const LabeledPool &pool, std::size_t num_clients, std::uint64_t seed)
    {
        if (num_clients == 0 || pool.size() < num_clients)
        {
            throw PartitionError("iid partition needs 1 <= clients <= pool size");
        }
        simnet::SeededRng rng(seed, {simnet::Purpose::Partition, 0, 0});
        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng.engine());
        std::vector<std::vector<std::size_t>> lists(num_clients);
        for (std::size_t i = 0; i < order.size(); ++i)
        {
            lists[i % num_clients].push_back(order[i]);
        }
        return from_lists(std::move(lists));
    }

    Partition partition_dirichlet(const LabeledPool &pool, std::size_t num_clients, double alpha, std::uint64_t seed,
                                  std::size_t min_size)
    {
        if (num_clients == 0)
        {
            throw PartitionError("dirichlet partition needs at least one client");
        }
        if (!(alpha > 0.0))
        {
            throw PartitionError("dirichlet alpha must be positive");
        }
        min_size = std::max<std::size_t>(1, min_size);
        if (pool.size() < num_clients * min_size)
        {
            throw PartitionError("pool of " + std::to_string(pool.size()) + " rows cannot give " +
                                 std::to_string(num_clients) + " clients " + std::to_string(min_size) + " rows each");
        }
        simnet::SeededRng rng(seed, {simnet::Purpose::Partition, 1, 0});
        auto by_class = rows_by_class(pool);
        for (auto &rows : by_class)
        {
            std::shuffle(rows.begin(), rows.end(), rng.engine());
        }

        std::vector<std::vector<std::size_t>> lists;
        for (int attempt = 0; attempt < kMaxDirichletDraws; ++attempt)
        {
            lists.assign(num_clients, {});
            for (const auto &rows : by_class)
            {
                const auto p = dirichlet(num_clients, alpha, rng);
                double cum = 0.0;
                std::size_t begin = 0;
                for (std::size_t c = 0; c < num_clients; ++c)
                {
                    cum += p[c];
                    std::size_t end = (c + 1 == num_clients)
                                          ? rows.size()
                                          : std::min(rows.size(), static_cast<std::size_t>(std::floor(
                                                                      cum * static_cast<double>(rows.size()))));
                    end = std::max(end, begin);
                    lists[c].insert(lists[c].end(), rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                    rows.begin() + static_cast<std::ptrdiff_t>(end));
                    begin = end;
                }
            }
            const bool ok = std::all_of(lists.begin(), lists.end(),
                                        [min_size](const auto &l) { return l.size() >= min_size; });
            if (ok)
            {
                return from_lists(std::move(lists));
            }
        }

        // Round-robin top-up from the currently largest client.
        for (std::size_t c = 0;; c = (c + 1) % num_clients)
        {
            const bool done = std::all_of(lists.begin(), lists.end(),
                                          [min_size](const auto &l) { return l.size() >= min_size; });
            if (done)
            {
                break;
            }
            if (lists[c].size() >= min_size)
            {
                continue;
            }
            auto donor = std::max_element(lists.begin(), lists.end(),
                                          [](const auto &a, const auto &b) { return a.size() < b.size(); });
            lists[c].push_back(donor->back());
            donor->pop_back();
        }
        return from_lists(std::move(lists));
    }

    std::set<ParticipantId> slowest_clients(const std::vector<simnet::ClientProfile> &profiles, double slow_fraction)
    {
        std::vector<const simnet::ClientProfile *> order;
        for (const auto &p : profiles)
        {
            order.push_back(&p);
        }
        std::stable_sort(order.begin(), order.end(), [](const auto *a, const auto *b) {
            const double sa = a->speed_score();
            const double sb = b->speed_score();
            return sa != sb ? sa < sb : a->client < b->client;
        });
        const auto count = static_cast<std::size_t>(std::ceil(slow_fraction * static_cast<double>(order.size())));
        std::set<ParticipantId> slow;
        for (std::size_t i = 0; i < std::min(count, order.size()); ++i)
        {
            slow.insert(order[i]->client);
        }
        return slow;
    }

    Partition couple_rare_labels(const Partition &partition, const LabeledPool &pool,
                                 const std::vector<simnet::ClientProfile> &profiles, const std::set<int> &rare_labels,
                                 double slow_fraction)
    {
        if (rare_labels.empty())
        {
            return partition;
        }
        for (int y : rare_labels)
        {
            if (y < 0 || static_cast<std::size_t>(y) >= pool.num_classes)
            {
                throw ConfigError("data.rare_labels", "label " + std::to_string(y) + " does not exist");
            }
        }
        const auto slow = slowest_clients(profiles, slow_fraction);
        if (slow.empty())
        {
            throw ConfigError("data.slow_fraction", "no client qualifies as slow");
        }

        Partition out = partition;
        auto is_rare = [&](std::size_t row) { return rare_labels.contains(pool.labels[row]); };
        std::vector<ParticipantId> slow_ids(slow.begin(), slow.end());
        std::size_t cursor = 0;

        // Pops a non-rare row from the next slow client that still has one.
        auto take_common_from_slow = [&](ParticipantId &from) -> std::optional<std::size_t> {
            for (std::size_t tried = 0; tried < slow_ids.size(); ++tried)
            {
                const ParticipantId s = slow_ids[(cursor + tried) % slow_ids.size()];
                auto &rows = out.assignment.at(s);
                auto it = std::find_if(rows.begin(), rows.end(), [&](std::size_t r) { return !is_rare(r); });
                if (it != rows.end())
                {
                    const std::size_t r = *it;
                    rows.erase(it);
                    from = s;
                    cursor = (cursor + tried + 1) % slow_ids.size();
                    return r;
                }
            }
            return std::nullopt;
        };

        for (auto &[client, rows] : out.assignment)
        {
            if (slow.contains(client))
            {
                continue;
            }
            std::vector<std::size_t> keep;
            std::vector<std::size_t> incoming;
            for (std::size_t r : rows)
            {
                if (!is_rare(r))
                {
                    keep.push_back(r);
                    continue;
                }
                ParticipantId donor = 0;
                if (auto common = take_common_from_slow(donor))
                {
                    out.assignment.at(donor).push_back(r);
                    incoming.push_back(*common);
                }
                else
                {
                    const ParticipantId s = slow_ids[cursor % slow_ids.size()];
                    cursor = (cursor + 1) % slow_ids.size();
                    out.assignment.at(s).push_back(r);
                }
            }
            keep.insert(keep.end(), incoming.begin(), incoming.end());
            rows = std::move(keep);
        }
        for (auto &[client, rows] : out.assignment)
        {
            std::sort(rows.begin(), rows.end());
        }
        return out;
    }

    std::vector<double> label_histogram(const LabeledPool &pool, const std::vector<std::size_t> &rows)
    {
        std::vector<double> h(pool.num_classes, 0.0);
        for (std::size_t r : rows)
        {
            h[static_cast<std::size_t>(pool.labels[r])] += 1.0;
        }
        return h;
    }

    double label_entropy(const LabeledPool &pool, const std::vector<std::size_t> &rows)
    {
        if (rows.empty())
        {
            return 0.0;
        }
        const auto h = label_histogram(pool, rows);
        const double n = static_cast<double>(rows.size());
        double e = 0.0;
        for (double c : h)
        {
            if (c > 0.0)
            {
                const double p = c / n;
                e -= p * std::log(p);
            }
        }
        return e;
    }

    double mean_label_entropy(const LabeledPool &pool, const Partition &partition)
    {
        if (partition.assignment.empty())
        {
            return 0.0;
        }
        double sum = 0.0;
        for (const auto &[id, rows] : partition.assignment)
        {
            sum += label_entropy(pool, rows);
        }
        return sum / static_cast<double>(partition.assignment.size());
    }

    learnkit::Dataset to_dataset(const LabeledPool &pool, const std::vector<std::size_t> &rows,
                                 double train_fraction, std::uint64_t seed)
    {
        learnkit::Dataset d;
        d.dim = pool.dim;
        for (std::size_t r : rows)
        {
            d.append(std::span<const double>(pool.features.data() + r * pool.dim, pool.dim),
                     static_cast<double>(pool.labels[r]));
        }
        std::vector<std::size_t> order(rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        simnet::SeededRng rng(seed, {simnet::Purpose::Data, 1, 0});
        std::shuffle(order.begin(), order.end(), rng.engine());
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
        if (!rows.empty())
        {
            n_train = std::clamp<std::size_t>(n_train, 1, rows.size());
        }
        d.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        d.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
        std::sort(d.train.begin(), d.train.end());
        std::sort(d.test.begin(), d.test.end());
        return d;
    }

    void write_columnar(std::ostream &os, const LabeledPool &pool, const Partition *partition)
    {
        os << "client\trow\tlabel";
        for (std::size_t j = 0; j < pool.dim; ++j)
        {
            os << "\tx" << j;
        }
        os << '\n';
        auto emit = [&](ParticipantId client, std::size_t r) {
            os << client << '\t' << r << '\t' << pool.labels[r];
            for (std::size_t j = 0; j < pool.dim; ++j)
            {
                os << '\t' << pool.features[r * pool.dim + j];
            }
            os << '\n';
        };
        if (partition == nullptr)
        {
            for (std::size_t r = 0; r < pool.size(); ++r)
            {
                emit(0, r);
            }
            return;
        }
        for (const auto &[client, rows] : partition->assignment)
        {
            for (std::size_t r : rows)
            {
                emit(client, r);
            }
        }
    }
} // namespace fedsim::datasynth
