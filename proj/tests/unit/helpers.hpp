#pragma once

#include "kylehft/model.hpp"
#include "oracle.hpp"

#include <cmath>

inline oracle::Coeffs to_oracle(const kylehft::Equilibrium& e, const kylehft::ModelParams& p) {
    const double s = p.sigma_v / p.sigma_2;
    return {e.A / s,
            e.beta1,
            e.beta21,
            e.beta22,
            e.beta23,
            e.Lambda1 * s,
            e.Lambda21 * s,
            e.Lambda22 * s,
            p.Gamma * s,
            p.sigma_v,
            std::sqrt(p.theta_eps) * p.sigma_2,
            std::sqrt(p.theta1) * p.sigma_2,
            p.sigma_2};
}

inline kylehft::ModelParams make_params(double theta1, double theta_eps, double Gamma, double sigma_v = 1.0,
                                        double sigma_2 = 1.0) {
    kylehft::ModelParams p;
    p.theta1 = theta1;
    p.theta_eps = theta_eps;
    p.Gamma = Gamma;
    p.sigma_v = sigma_v;
    p.sigma_2 = sigma_2;
    return p;
}
