#include "fedsim/learnkit/convergence.hpp"

#include "fedsim/errors.hpp"

#include <cmath>
#include <string>

namespace fedsim::learnkit
{
    namespace
    {
        void check(const ConvergenceBoundParams &p)
        {
            const double rate = p.mu * p.Q * p.eta;
            if (!(rate > 0.0 && rate < 1.0))
            {
                throw DomainError("convergence bound requires 0 < mu*Q*eta < 1, got " + std::to_string(rate));
            }
            if (!(p.mu <= p.L))
            {
                throw DomainError("convergence bound requires mu <= L");
            }
            if (p.T < 0 || p.tau_max < 0 || p.sigma_l < 0.0 || p.sigma_g < 0.0 || p.C < 0.0 || p.initial_gap < 0.0)
            {
                throw DomainError("convergence bound constants must be non-negative");
            }
        }
    } // namespace

    double convergence_floor(const ConvergenceBoundParams &p)
    {
        check(p);
        const double q = static_cast<double>(p.Q);
        const double tau = static_cast<double>(p.tau_max);
        const double noise = p.sigma_l * p.sigma_l + p.sigma_g * p.sigma_g + p.C;
        return 3.0 * p.L * q * p.eta / p.mu * noise * (p.eta * q * p.L * (tau * tau + 1.0) + 0.5);
    }

    double convergence_bound(const ConvergenceBoundParams &p)
    {
        const double floor = convergence_floor(p);
        const double contraction = std::pow(1.0 - p.mu * p.Q * p.eta, p.T);
        return contraction * p.initial_gap + floor;
    }
} // namespace fedsim::learnkit
