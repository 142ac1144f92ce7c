// Solves the ruin-probability-constrained barrier for a range of risk
// tolerances and reports the induced cost of safety at a fixed start level.

#include "divbar/risk_solver.hpp"

#include <cstdio>

int main() {
    divbar::ModelParams p;
    p.mu = 2.0;
    p.sigma = std::sqrt(50.0);
    p.delta = 0.2;
    p.c = 0.05;
    p.alpha = 0.5;
    p.beta = 8.0;

    const double T = 10.0;
    const auto free_sol = divbar::solve(p);
    const double x = free_sol.b0;

    std::printf("epsilon,b_star,constrained,psi_at_b_star,value_at_b0,cost_of_safety\n");
    for (double eps : {0.5, 0.1, 0.05, 0.02, 0.01}) {
        const auto [opt, v] = divbar::optimal_value(x, p, T, eps);
        std::printf("%.4f,%.6f,%d,%.6e,%.6f,%.6f\n", eps, opt.b_star,
                    opt.constrained ? 1 : 0, opt.psi_b_star, v, opt.cost_of_safety);
    }
    return 0;
}
