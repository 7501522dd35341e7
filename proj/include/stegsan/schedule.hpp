#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stegsan {

// Per-timestep diffusion constants for a fixed horizon T. Arrays are
// indexed 1..T with the index-0 convention alpha_bar[0] = 1 (so the
// posterior variance at t = 1 is exactly 0). All derived arrays are built
// from the cumulative product, so alpha_bar[t] = alpha_bar[t-1]*alpha[t]
// holds exactly even where beta is clipped.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> beta;        // beta[0] unused (= 0)
    std::vector<double> alpha;       // 1 - beta, alpha[0] = 1
    std::vector<double> alpha_bar;   // cumulative product, alpha_bar[0] = 1
    std::vector<double> sqrt_ab;     // sqrt(alpha_bar)
    std::vector<double> sqrt_1mab;   // sqrt(1 - alpha_bar)
    std::vector<double> post_var;    // (1-ab_{t-1})/(1-ab_t) * beta_t

    void check_t(int t) const {
        if (t < 1 || t > T) throw std::out_of_range("timestep out of [1,T]");
    }

    // mean coefficients of q(x_{t-1} | x_t, x0)
    double post_coef_x0(int t) const {
        check_t(t);
        return std::sqrt(alpha_bar[t - 1]) * beta[t] / (1.0 - alpha_bar[t]);
    }
    double post_coef_xt(int t) const {
        check_t(t);
        return std::sqrt(alpha[t]) * (1.0 - alpha_bar[t - 1]) / (1.0 - alpha_bar[t]);
    }
};

// Cosine schedule: alpha_bar(t) = f(t)/f(0) with
// f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2), beta_t = 1 - ab_t/ab_{t-1}
// clipped at max_beta. After clipping, alpha_bar is rebuilt as the running
// product so the schedule algebra stays exact.
inline NoiseSchedule cosine_schedule(int T, double s = 0.008, double max_beta = 0.999) {
    if (T < 1) throw std::invalid_argument("cosine_schedule: T must be >= 1");
    const double pi = 3.14159265358979323846;
    auto f = [&](double t) {
        double a = ((t / T + s) / (1.0 + s)) * pi / 2.0;
        double c = std::cos(a);
        return c * c;
    };
    const double f0 = f(0.0);

    NoiseSchedule sched;
    sched.T = T;
    sched.beta.assign(T + 1, 0.0);
    sched.alpha.assign(T + 1, 1.0);
    sched.alpha_bar.assign(T + 1, 1.0);
    sched.sqrt_ab.assign(T + 1, 1.0);
    sched.sqrt_1mab.assign(T + 1, 0.0);
    sched.post_var.assign(T + 1, 0.0);

    for (int t = 1; t <= T; ++t) {
        double ab_prev_target = f(static_cast<double>(t - 1)) / f0;
        double ab_target = f(static_cast<double>(t)) / f0;
        double b = 1.0 - ab_target / ab_prev_target;
        if (b > max_beta) b = max_beta;
        sched.beta[t] = b;
        sched.alpha[t] = 1.0 - b;
        sched.alpha_bar[t] = sched.alpha_bar[t - 1] * sched.alpha[t];
        sched.sqrt_ab[t] = std::sqrt(sched.alpha_bar[t]);
        sched.sqrt_1mab[t] = std::sqrt(1.0 - sched.alpha_bar[t]);
        sched.post_var[t] =
            (1.0 - sched.alpha_bar[t - 1]) / (1.0 - sched.alpha_bar[t]) * sched.beta[t];
    }
    return sched;
}

}  // namespace stegsan
