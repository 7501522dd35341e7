#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stegsan/diffusion.hpp"
#include "stegsan/rng.hpp"
#include "stegsan/schedule.hpp"

using namespace stegsan;

namespace {

// Closed-form alpha_bar for the cosine schedule, independent of the
// cumulative-product construction (valid while beta is unclipped).
double cosine_alpha_bar_closed_form(int t, int T, double s = 0.008) {
    const double pi = 3.14159265358979323846;
    auto f = [&](double u) {
        double c = std::cos(((u / T + s) / (1.0 + s)) * pi / 2.0);
        return c * c;
    };
    return f(static_cast<double>(t)) / f(0.0);
}

FloatImage random_float_image(int c, int h, int w, std::uint64_t seed, double scale = 1.0) {
    SeededRng rng(seed);
    FloatImage img = make_float_image(c, h, w);
    for (double& v : img.data) v = scale * rng.normal();
    return img;
}

}  // namespace

TEST_CASE("cosine schedule: endpoint, monotonicity, beta range, exact algebra") {
    NoiseSchedule sched = cosine_schedule(200);
    CHECK(sched.alpha_bar[0] == 1.0);
    for (int t = 1; t <= sched.T; ++t) {
        CHECK(sched.beta[t] > 0.0);
        CHECK(sched.beta[t] <= 0.999);
        CHECK(sched.alpha_bar[t] < sched.alpha_bar[t - 1]);
        CHECK(sched.alpha_bar[t] == sched.alpha_bar[t - 1] * sched.alpha[t]);
    }
    CHECK(sched.alpha_bar[sched.T] < 1e-3);
}

TEST_CASE("cosine schedule: T=1000 midpoint matches the closed form") {
    NoiseSchedule sched = cosine_schedule(1000);
    double expected = cosine_alpha_bar_closed_form(500, 1000);
    CHECK(sched.alpha_bar[500] == Catch::Approx(expected).epsilon(1e-9));
    CHECK(sched.alpha_bar[500] == Catch::Approx(0.4939).margin(2e-4));
}

TEST_CASE("q_sample: trivial limits and argument checks") {
    NoiseSchedule sched = cosine_schedule(200);
    FloatImage x0 = random_float_image(3, 4, 4, 1, 0.5);
    FloatImage zero = make_float_image(3, 4, 4);

    FloatImage xt = q_sample(x0, 100, zero, sched);
    for (std::size_t i = 0; i < x0.data.size(); ++i)
        CHECK(xt.data[i] == Catch::Approx(sched.sqrt_ab[100] * x0.data[i]).margin(1e-15));

    // smooth schedule, small t: alpha_bar near 1 so x_t is near x0
    FloatImage x1 = q_sample(x0, 1, zero, sched);
    for (std::size_t i = 0; i < x0.data.size(); ++i)
        CHECK(x1.data[i] == Catch::Approx(x0.data[i]).margin(1e-3));

    CHECK_THROWS(q_sample(x0, 0, zero, sched));
    CHECK_THROWS(q_sample(x0, 201, zero, sched));
}

TEST_CASE("q_sample: Monte-Carlo mean and variance match the forward marginal") {
    NoiseSchedule sched = cosine_schedule(200);
    const int t = 100;
    const int n = 10000;
    FloatImage x0 = make_float_image(1, 4, 4);
    for (std::size_t i = 0; i < x0.data.size(); ++i) x0.data[i] = 0.1 * static_cast<double>(i) / 16.0 + 0.3;

    SeededRng rng(777);
    std::vector<double> sum(x0.data.size(), 0.0), sumsq(x0.data.size(), 0.0);
    for (int k = 0; k < n; ++k) {
        FloatImage eps = make_float_image(1, 4, 4);
        for (double& v : eps.data) v = rng.normal();
        FloatImage xt = q_sample(x0, t, eps, sched);
        for (std::size_t i = 0; i < xt.data.size(); ++i) {
            sum[i] += xt.data[i];
            sumsq[i] += xt.data[i] * xt.data[i];
        }
    }
    const double want_var = 1.0 - sched.alpha_bar[t];
    const double se_mean = std::sqrt(want_var / n);
    const double se_var = want_var * std::sqrt(2.0 / n);
    for (std::size_t i = 0; i < sum.size(); ++i) {
        double mean = sum[i] / n;
        double var = sumsq[i] / n - mean * mean;
        CHECK(std::fabs(mean - sched.sqrt_ab[t] * x0.data[i]) < 4.0 * se_mean);
        CHECK(std::fabs(var - want_var) < 4.0 * se_var);
    }
}

TEST_CASE("posterior: variance conventions and coefficient identities") {
    NoiseSchedule sched = cosine_schedule(200);
    FloatImage x0 = random_float_image(1, 2, 2, 2);
    FloatImage xt = random_float_image(1, 2, 2, 3);

    // t=1 with alpha_bar[0]=1: zero posterior variance, mean collapses to x0
    Posterior p1 = posterior(x0, xt, 1, sched);
    CHECK(p1.variance == 0.0);
    CHECK(sched.post_coef_x0(1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(sched.post_coef_xt(1) == Catch::Approx(0.0).margin(1e-12));
    for (std::size_t i = 0; i < x0.data.size(); ++i)
        CHECK(p1.mean.data[i] == Catch::Approx(x0.data[i]).margin(1e-12));

    for (int t = 2; t <= sched.T; ++t) {
        // independent route: posterior precision = alpha_t/beta_t + 1/(1-ab_{t-1})
        double precision = sched.alpha[t] / sched.beta[t] + 1.0 / (1.0 - sched.alpha_bar[t - 1]);
        CHECK(sched.post_var[t] == Catch::Approx(1.0 / precision).epsilon(1e-10));

        // exact closed form of the coefficient sum, checked across all t:
        // c0 + ct = (sqrt(ab_{t-1}) + sqrt(alpha_t)) / (1 + sqrt(ab_{t-1} alpha_t))
        double u = std::sqrt(sched.alpha_bar[t - 1]);
        double v = std::sqrt(sched.alpha[t]);
        double sum = sched.post_coef_x0(t) + sched.post_coef_xt(t);
        CHECK(sum == Catch::Approx((u + v) / (1.0 + u * v)).epsilon(1e-10));

        // in the smooth region (alpha_t ~ 1) the sum is 1 up to (1-u)(1-v):
        // feeding x0 = x_t = v reproduces v to that tolerance
        double defect = (1.0 - u) * (1.0 - v);
        CHECK(std::fabs(sum - 1.0) <= defect + 1e-12);
    }

    // first half of the horizon: coefficient sum is 1 to within 2e-3,
    // so equal inputs map to themselves at that tolerance
    for (int t = 2; t <= sched.T / 2; ++t) {
        double sum = sched.post_coef_x0(t) + sched.post_coef_xt(t);
        CHECK(std::fabs(sum - 1.0) < 2e-3);
    }

    CHECK_THROWS(posterior(x0, xt, 0, sched));
    CHECK_THROWS(posterior(x0, xt, 201, sched));
}

TEST_CASE("predict_x0: exact inversion recovers x0 for every t") {
    NoiseSchedule sched = cosine_schedule(200);
    FloatImage x0 = random_float_image(3, 4, 4, 5, 0.7);
    SeededRng rng(6);
    for (int t = 1; t <= sched.T; ++t) {
        FloatImage eps = make_float_image(3, 4, 4);
        for (double& v : eps.data) v = rng.normal();
        FloatImage xt = q_sample(x0, t, eps, sched);
        FloatImage rec = predict_x0(xt, t, eps, sched, X0Mode::exact_inversion);
        for (std::size_t i = 0; i < x0.data.size(); ++i)
            CHECK(std::fabs(rec.data[i] - x0.data[i]) <= 1e-4);
    }
}

TEST_CASE("predict_x0: literal printed form matches its symbolic expansion") {
    // with the true eps, the printed one-step form equals
    // sqrt(ab_{t-1}) x0 + sqrt(alpha_t) (1 - ab_{t-1}) / sqrt(1 - ab_t) eps
    NoiseSchedule sched = cosine_schedule(200);
    FloatImage x0 = random_float_image(1, 3, 3, 7, 0.5);
    SeededRng rng(8);
    for (int t = 1; t <= sched.T; ++t) {
        FloatImage eps = make_float_image(1, 3, 3);
        for (double& v : eps.data) v = rng.normal();
        FloatImage xt = q_sample(x0, t, eps, sched);
        FloatImage got = predict_x0(xt, t, eps, sched, X0Mode::paper_eq7);
        double ca = std::sqrt(sched.alpha_bar[t - 1]);
        double cb = std::sqrt(sched.alpha[t]) * (1.0 - sched.alpha_bar[t - 1]) / sched.sqrt_1mab[t];
        for (std::size_t i = 0; i < x0.data.size(); ++i)
            CHECK(std::fabs(got.data[i] - (ca * x0.data[i] + cb * eps.data[i])) <= 1e-5);
    }
}

TEST_CASE("predict_x0: zero predicted noise rescales x_t") {
    NoiseSchedule sched = cosine_schedule(200);
    FloatImage xt = random_float_image(1, 2, 2, 9);
    FloatImage zero = make_float_image(1, 2, 2);
    FloatImage rec = predict_x0(xt, 80, zero, sched, X0Mode::exact_inversion);
    for (std::size_t i = 0; i < xt.data.size(); ++i)
        CHECK(rec.data[i] == Catch::Approx(xt.data[i] / sched.sqrt_ab[80]).epsilon(1e-12));
    CHECK_THROWS(predict_x0(xt, 0, zero, sched));
}

TEST_CASE("ancestral sampling with an oracle denoiser recovers the target image") {
    NoiseSchedule sched = cosine_schedule(100);
    // target inside (-1,1) so the final clamp cannot move it
    FloatImage target = make_float_image(1, 4, 4);
    {
        SeededRng trng(10);
        for (double& v : target.data) v = trng.uniform(-0.9, 0.9);
    }
    // the oracle knows the true noise for any x_t: eps = (x_t - a x0)/b
    NoisePredictor oracle = [&](const nn::Tensor& xt, int t) {
        nn::Tensor eps = xt;
        const double a = sched.sqrt_ab[t], b = sched.sqrt_1mab[t];
        for (std::size_t i = 0; i < eps.v.size(); ++i)
            eps.v[i] = (xt.v[i] - a * target.data[i]) / b;
        return eps;
    };
    SeededRng rng(11);
    auto samples = ancestral_sample(oracle, sched, 3, 1, 4, 4, rng);
    REQUIRE(samples.size() == 3);
    for (const auto& s : samples) {
        CHECK(s.channels == 1);
        CHECK(s.height == 4);
        CHECK(s.width == 4);
        for (std::size_t i = 0; i < s.data.size(); ++i)
            CHECK(s.data[i] == Catch::Approx(target.data[i]).margin(1e-9));
    }

    SeededRng r1(12), r2(12);
    auto s1 = ancestral_sample(oracle, sched, 1, 1, 4, 4, r1);
    auto s2 = ancestral_sample(oracle, sched, 1, 1, 4, 4, r2);
    CHECK(s1[0].data == s2[0].data);
}
