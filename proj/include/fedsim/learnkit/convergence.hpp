#pragma once

namespace fedsim::learnkit
{
    // Constants of the staleness-aware convergence bound for Q local SGD steps
    // at learning rate eta on an L-smooth, mu-strongly convex objective.
    struct ConvergenceBoundParams
    {
        double L = 1.0;
        double mu = 1.0;
        int Q = 1;
        double eta = 0.1;
        int T = 0;
        double sigma_l = 0.0;
        double sigma_g = 0.0;
        double C = 0.0;
        int tau_max = 0;
        double initial_gap = 0.0;
    };

    // (1 - mu Q eta)^T * gap0
    //   + (3 L Q eta / mu) (sigma_l^2 + sigma_g^2 + C) [eta Q L (tau_max^2 + 1) + 1/2]
    // Throws DomainError unless 0 < mu Q eta < 1, mu <= L and the remaining
    // constants are non-negative.
    double convergence_bound(const ConvergenceBoundParams &p);

    // The additive term that does not decay with T.
    double convergence_floor(const ConvergenceBoundParams &p);
} // namespace fedsim::learnkit
