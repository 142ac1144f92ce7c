// Prints the optimal value function, its free-barrier level, and the
// feedback control on a grid, as CSV on stdout.

#include "divbar/policy.hpp"
#include "divbar/value_function.hpp"

#include <cstdio>

int main() {
    divbar::ModelParams p;
    p.mu = 2.0;
    p.sigma = std::sqrt(50.0);
    p.delta = 0.2;
    p.c = 0.05;
    p.alpha = 0.5;
    p.beta = 8.0;

    const auto sol = divbar::solve(p);
    std::printf("# x_alpha=%.6f x_beta=%.6f b0=%.6f\n", sol.x_alpha, sol.x_beta, sol.b0);
    std::printf("x,f,f_prime,a_star\n");

    const int n = 120;
    const double hi = sol.b0 + 20.0;
    for (int i = 0; i <= n; ++i) {
        const double x = hi * i / n;
        std::printf("%.8f,%.8f,%.8f,%.8f\n", x, sol.value(x), sol.derivative(x),
                    sol.activity(x));
    }
    return 0;
}
