// Solve one point, print the coefficients and outcomes, then check them by simulation.

#include "kylehft/monte_carlo.hpp"
#include "kylehft/solver.hpp"

#include <cstdio>

int main() {
    using namespace kylehft;
    ModelParams p;
    p.theta1 = 1.0;
    p.theta_eps = 1.0;
    p.Gamma = 1.0;

    const Equilibrium e = solve_robust(p).best();
    const Outcomes o = compute_outcomes(e, p);
    std::printf("Lambda1=%.6f Lambda21=%.6f Lambda22=%.6f A=%.6f\n", e.Lambda1, e.Lambda21, e.Lambda22, e.A);
    std::printf("beta1=%.6f beta21=%.6f beta22=%.6f beta23=%.6f role=%s\n", e.beta1, e.beta21, e.beta22, e.beta23,
                std::string(to_string(classify_role(e).variant)).c_str());

    SimConfig sim;
    sim.n_paths = 200000;
    const SimEstimates s = simulate(e, p, sim);
    std::printf("pi_IT  exact %.5f  simulated %.5f +- %.5f\n", o.pi_IT, s.pi_IT.mean, s.pi_IT.se);
    std::printf("pi_HFT exact %.5f  simulated %.5f +- %.5f\n", o.pi_HFT, s.pi_HFT.mean, s.pi_HFT.se);
    std::printf("err_p2 exact %.5f  simulated %.5f +- %.5f\n", o.err_p2, s.err_p2.mean, s.err_p2.se);
    return 0;
}
