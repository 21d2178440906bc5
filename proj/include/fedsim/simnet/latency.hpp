#pragma once

#include "fedsim/msgflow/message.hpp"
#include "fedsim/simnet/rng.hpp"

#include <variant>

namespace fedsim::simnet
{
    struct Degenerate
    {
        double value = 1.0;
    };

    // exp(N(mu, sigma^2)); mean is exp(mu + sigma^2 / 2).
    struct LogNormal
    {
        double mu = 0.0;
        double sigma = 0.5;

        static LogNormal with_mean(double mean, double sigma);
    };

    using Duration = std::variant<Degenerate, LogNormal>;

    double mean(const Duration &d);
    double draw(const Duration &d, SeededRng &rng);
    // Throws ValidationError unless every draw is guaranteed positive.
    void validate(const Duration &d);

    struct ClientProfile
    {
        ParticipantId client = 1;
        Duration comp_time = Degenerate{1.0};
        Duration comm_time = Degenerate{1.0};

        // 1 / (mean comp + 2 * mean comm): one training plus both transfer legs.
        double speed_score() const;
    };

    // receive_time + comp draw + comm draw (client -> server leg). Server-side
    // processing is free.
    VirtualTime client_reply_time(const ClientProfile &profile, VirtualTime receive_time, SeededRng &comp_rng,
                                  SeededRng &comm_rng);
    VirtualTime client_reply_time(const ClientProfile &profile, VirtualTime receive_time, SeededRng &rng);
} // namespace fedsim::simnet
