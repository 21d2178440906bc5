#include "fedsim/simnet/latency.hpp"

#include "fedsim/errors.hpp"

#include <cmath>

namespace fedsim::simnet
{
    LogNormal LogNormal::with_mean(double mean, double sigma)
    {
        if (!(mean > 0.0))
        {
            throw ValidationError("lognormal mean must be positive");
        }
        return LogNormal{std::log(mean) - 0.5 * sigma * sigma, sigma};
    }

    double mean(const Duration &d)
    {
        if (const auto *c = std::get_if<Degenerate>(&d))
        {
            return c->value;
        }
        const auto &ln = std::get<LogNormal>(d);
        return std::exp(ln.mu + 0.5 * ln.sigma * ln.sigma);
    }

    double draw(const Duration &d, SeededRng &rng)
    {
        if (const auto *c = std::get_if<Degenerate>(&d))
        {
            return c->value;
        }
        const auto &ln = std::get<LogNormal>(d);
        return std::lognormal_distribution<double>(ln.mu, ln.sigma)(rng.engine());
    }

    void validate(const Duration &d)
    {
        if (const auto *c = std::get_if<Degenerate>(&d))
        {
            if (!(c->value > 0.0) || !std::isfinite(c->value))
            {
                throw ValidationError("degenerate duration must be positive and finite");
            }
            return;
        }
        const auto &ln = std::get<LogNormal>(d);
        if (!std::isfinite(ln.mu) || !(ln.sigma >= 0.0) || !std::isfinite(ln.sigma))
        {
            throw ValidationError("lognormal duration needs finite mu and sigma >= 0");
        }
    }

    double ClientProfile::speed_score() const
    {
        return 1.0 / (mean(comp_time) + 2.0 * mean(comm_time));
    }

    VirtualTime client_reply_time(const ClientProfile &profile, VirtualTime receive_time, SeededRng &comp_rng,
                                  SeededRng &comm_rng)
    {
        return receive_time + draw(profile.comp_time, comp_rng) + draw(profile.comm_time, comm_rng);
    }

    VirtualTime client_reply_time(const ClientProfile &profile, VirtualTime receive_time, SeededRng &rng)
    {
        return client_reply_time(profile, receive_time, rng, rng);
    }
} // namespace fedsim::simnet
