#pragma once

#include "fedsim/learnkit/dataset.hpp"
#include "fedsim/msgflow/message.hpp"
#include "fedsim/simnet/latency.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <vector>

namespace fedsim::datasynth
{
    struct LabeledPool
    {
        std::size_t dim = 0;
        std::size_t num_classes = 0;
        // N x dim row-major.
        std::vector<double> features;
        std::vector<int> labels;

        std::size_t size() const noexcept { return labels.size(); }
        std::vector<std::size_t> class_counts() const;
    };

    // Class-conditional unit-covariance Gaussians. Class k is centred at
    // separation * e_k, so dim must be at least num_classes. Labels are
    // balanced (every class non-empty) and shuffled. Deterministic in seed.
    LabeledPool gen_classification(std::size_t num_classes, std::size_t dim, std::size_t n_total, double separation,
                                   std::uint64_t seed);

    // client id -> row indices into the pool. Clients are 1..M.
    struct Partition
    {
        std::map<ParticipantId, std::vector<std::size_t>> assignment;

        std::size_t num_clients() const noexcept { return assignment.size(); }
        std::size_t total() const noexcept;
    };

    // Throws PartitionError unless index lists are disjoint and cover [0, pool_size).
    void check_disjoint_cover(const Partition &p, std::size_t pool_size);

    // Shuffled round-robin split.
    Partition partition_iid(const LabeledPool &pool, std::size_t num_clients, std::uint64_t seed);

    // For every class, client proportions ~ Dirichlet(alpha). Proportions are
    // redrawn up to 100 times until every client holds at least
    // max(1, min_size) rows, after which the largest clients top up the
    // smallest round-robin. Throws PartitionError when the pool cannot satisfy
    // the guard.
    Partition partition_dirichlet(const LabeledPool &pool, std::size_t num_clients, double alpha, std::uint64_t seed,
                                  std::size_t min_size = 1);

    // Moves every instance of a rare class onto the slowest clients (the bottom
    // slow_fraction by speed score), swapping a non-rare instance back so that
    // client sizes stay unchanged where possible. Throws ConfigError when no
    // client counts as slow or a rare label does not exist.
    Partition couple_rare_labels(const Partition &partition, const LabeledPool &pool,
                                 const std::vector<simnet::ClientProfile> &profiles, const std::set<int> &rare_labels,
                                 double slow_fraction);

    // Slow clients as couple_rare_labels picks them.
    std::set<ParticipantId> slowest_clients(const std::vector<simnet::ClientProfile> &profiles, double slow_fraction);

    std::vector<double> label_histogram(const LabeledPool &pool, const std::vector<std::size_t> &rows);
    // Shannon entropy (nats) of a client's label distribution.
    double label_entropy(const LabeledPool &pool, const std::vector<std::size_t> &rows);
    double mean_label_entropy(const LabeledPool &pool, const Partition &partition);

    // Rows `rows` of the pool as a dataset whose splits follow `train_fraction`
    // (train first, remainder test) after a seeded shuffle.
    learnkit::Dataset to_dataset(const LabeledPool &pool, const std::vector<std::size_t> &rows,
                                 double train_fraction, std::uint64_t seed);

    // Columnar text export: a header line, then one line per row
    // "client<TAB>row<TAB>label<TAB>x0<TAB>x1...". client is 0 for the
    // unpartitioned pool.
    void write_columnar(std::ostream &os, const LabeledPool &pool, const Partition *partition);
} // namespace fedsim::datasynth
