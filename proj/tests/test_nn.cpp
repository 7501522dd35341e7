#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <vector>

#include "stegsan/denoiser.hpp"
#include "stegsan/nn/adam.hpp"
#include "stegsan/nn/layers.hpp"
#include "stegsan/nn/serialize.hpp"
#include "stegsan/nn/tensor.hpp"
#include "stegsan/rng.hpp"

using namespace stegsan;
using nn::Tensor;

// ---------------------------------------------------------------------------
// Central finite-difference gradient checking. The loss is a fixed random
// linear functional of the output, so dL/dy is known exactly and every
// analytic gradient (input and parameters) can be compared against
// (L(x+h) - L(x-h)) / 2h.
// ---------------------------------------------------------------------------
namespace {

constexpr double kFdStep = 1e-6;
constexpr double kRelTol = 1e-3;  // required bound; doubles land far below it

double rel_err(double a, double b) {
    double denom = std::max({std::fabs(a), std::fabs(b), 1e-8});
    return std::fabs(a - b) / denom;
}

Tensor random_tensor(std::vector<int> shape, SeededRng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.v) v = scale * rng.normal();
    return t;
}

// forward: () -> Tensor (captures its input/params by reference)
// After calling backward through the caller, analytic grads are read back.
struct FdProblem {
    std::function<Tensor()> forward;
    Tensor loss_weights;

    double loss() {
        Tensor y = forward();
        double acc = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) acc += loss_weights.v[i] * y.v[i];
        return acc;
    }
};

void check_values(FdProblem& prob, std::vector<double>& values,
                  const std::vector<double>& analytic_grad, const char* what) {
    REQUIRE(values.size() == analytic_grad.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double keep = values[i];
        values[i] = keep + kFdStep;
        double lp = prob.loss();
        values[i] = keep - kFdStep;
        double lm = prob.loss();
        values[i] = keep;
        double fd = (lp - lm) / (2.0 * kFdStep);
        worst = std::max(worst, rel_err(fd, analytic_grad[i]));
    }
    INFO(what << ": worst relative error " << worst);
    CHECK(worst < kRelTol);
}

// Runs FD checks for a layer-like callable over input and all params.
template <typename Layer>
void check_layer(Layer& layer, Tensor x, std::uint64_t seed) {
    SeededRng rng(seed);
    FdProblem prob;
    prob.forward = [&]() { return layer.forward(x); };
    Tensor y0 = prob.forward();
    prob.loss_weights = random_tensor(y0.shape, rng);

    std::vector<nn::Param*> ps;
    layer.params(ps);
    nn::zero_grads(ps);
    Tensor y = layer.forward(x);
    Tensor gy = prob.loss_weights;
    Tensor gx = layer.backward(gy);

    check_values(prob, x.v, gx.v, "input");
    for (std::size_t pi = 0; pi < ps.size(); ++pi)
        check_values(prob, ps[pi]->w, ps[pi]->g, "param");
}

// Same for parameter-free elementwise layers.
template <typename Layer>
void check_stateless(Layer& layer, Tensor x, std::uint64_t seed) {
    SeededRng rng(seed);
    FdProblem prob;
    prob.forward = [&]() { return layer.forward(x); };
    Tensor y0 = prob.forward();
    prob.loss_weights = random_tensor(y0.shape, rng);
    layer.forward(x);
    Tensor gx = layer.backward(prob.loss_weights);
    check_values(prob, x.v, gx.v, "input");
}

}  // namespace

TEST_CASE("gradient check: Conv2d stride 1") {
    SeededRng rng(1);
    nn::Conv2d conv(2, 3, 3, 1, 1);
    conv.init(rng);
    for (double& b : conv.bias.w) b = rng.normal(0.0, 0.1);
    check_layer(conv, random_tensor({2, 6, 5}, rng), 11);
}

TEST_CASE("gradient check: Conv2d stride 2") {
    SeededRng rng(2);
    nn::Conv2d conv(2, 2, 3, 2, 1);
    conv.init(rng);
    check_layer(conv, random_tensor({2, 6, 6}, rng), 12);
}

TEST_CASE("gradient check: Conv1d") {
    SeededRng rng(3);
    nn::Conv1d conv(3, 2, 9, 1, 4);
    conv.init(rng);
    for (double& b : conv.bias.w) b = rng.normal(0.0, 0.1);
    check_layer(conv, random_tensor({3, 17}, rng), 13);
}

TEST_CASE("gradient check: Linear") {
    SeededRng rng(4);
    nn::Linear lin(7, 5);
    lin.init(rng);
    check_layer(lin, random_tensor({7}, rng), 14);
}

TEST_CASE("gradient check: SiLU and Tanh") {
    SeededRng rng(5);
    nn::SiLU silu;
    check_stateless(silu, random_tensor({2, 4, 3}, rng), 15);
    nn::Tanh tanh_layer;
    check_stateless(tanh_layer, random_tensor({10}, rng), 16);
}

TEST_CASE("gradient check: Upsample2x") {
    SeededRng rng(6);
    nn::Upsample2x up;
    check_stateless(up, random_tensor({2, 3, 4}, rng), 17);
}

TEST_CASE("gradient check: GroupNorm") {
    SeededRng rng(60);
    nn::GroupNorm gn(4, 2);
    for (double& v : gn.gamma.w) v = rng.normal(1.0, 0.2);
    for (double& v : gn.beta.w) v = rng.normal(0.0, 0.2);
    check_layer(gn, random_tensor({4, 3, 3}, rng), 61);

    // normalization property: zero mean, unit variance per group before affine
    nn::GroupNorm plain(4, 2);
    Tensor x = random_tensor({4, 5, 5}, rng, 3.0);
    Tensor y = plain.forward(x);
    for (int g = 0; g < 2; ++g) {
        double m = 0, v = 0;
        const std::size_t n = 2 * 25;
        for (std::size_t i = 0; i < n; ++i) m += y.v[g * n + i];
        m /= n;
        for (std::size_t i = 0; i < n; ++i) v += (y.v[g * n + i] - m) * (y.v[g * n + i] - m);
        v /= n;
        CHECK(std::fabs(m) < 1e-10);
        CHECK(v == Catch::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("gradient check: Magnitude") {
    SeededRng rng(7);
    nn::Magnitude mag;
    check_stateless(mag, random_tensor({2, 9}, rng), 18);
}

TEST_CASE("gradient check: Rfft and Irfft") {
    SeededRng rng(8);
    nn::Rfft fft(16);
    check_stateless(fft, random_tensor({1, 16}, rng), 19);
    nn::Irfft ifft(16);
    check_stateless(ifft, random_tensor({2, 9}, rng), 20);
}

TEST_CASE("Rfft is orthonormal and invertible") {
    SeededRng rng(9);
    nn::Rfft fft(64);
    Tensor x = random_tensor({1, 64}, rng);
    Tensor y = random_tensor({1, 64}, rng);
    Tensor fx = fft.forward(x), fy = fft.forward(y);
    double dot_x = 0, dot_f = 0;
    for (std::size_t i = 0; i < x.v.size(); ++i) dot_x += x.v[i] * y.v[i];
    for (std::size_t i = 0; i < fx.v.size(); ++i) dot_f += fx.v[i] * fy.v[i];
    CHECK(dot_f == Catch::Approx(dot_x).epsilon(1e-10));

    Tensor back = fft.adjoint(fx);
    for (std::size_t i = 0; i < x.v.size(); ++i)
        CHECK(back.v[i] == Catch::Approx(x.v[i]).margin(1e-10));
}

TEST_CASE("gradient check: ResBlock2d with timestep conditioning") {
    SeededRng rng(10);
    ResBlock2d rb(3, 6);
    rb.init(rng);
    Tensor x = random_tensor({3, 4, 4}, rng);
    Tensor temb = random_tensor({6}, rng);

    FdProblem prob;
    prob.forward = [&]() { return rb.forward(x, temb); };
    Tensor y0 = prob.forward();
    prob.loss_weights = random_tensor(y0.shape, rng);

    std::vector<nn::Param*> ps;
    rb.params(ps);
    nn::zero_grads(ps);
    rb.forward(x, temb);
    Tensor gtemb({6});
    Tensor gx = rb.backward(prob.loss_weights, gtemb);

    check_values(prob, x.v, gx.v, "input");
    check_values(prob, temb.v, gtemb.v, "temb");
    for (auto* p : ps) check_values(prob, p->w, p->g, "param");
}

TEST_CASE("gradient check: full image denoiser on a small instance") {
    SeededRng rng(21);
    Denoiser2d model(2, 8, 8, 4);
    model.init(SeededRng(77));
    Tensor x = random_tensor({2, 8, 8}, rng);
    const int t = 3;

    FdProblem prob;
    prob.forward = [&]() { return model.forward(x, t); };
    prob.loss_weights = random_tensor({2, 8, 8}, rng);

    auto ps = model.params();
    nn::zero_grads(ps);
    model.forward(x, t);
    Tensor gx = model.backward(prob.loss_weights);

    check_values(prob, x.v, gx.v, "input");
    // all parameters of every layer
    for (auto* p : ps) check_values(prob, p->w, p->g, "param");
}

TEST_CASE("gradient check: full audio denoiser on a small instance") {
    SeededRng rng(22);
    AudioDenoiser model(32, 4);
    model.init(SeededRng(78));
    Tensor x = random_tensor({1, 32}, rng);
    const int t = 5;

    FdProblem prob;
    prob.forward = [&]() { return model.forward(x, t); };
    prob.loss_weights = random_tensor({1, 32}, rng);

    auto ps = model.params();
    nn::zero_grads(ps);
    model.forward(x, t);
    Tensor gx = model.backward(prob.loss_weights);

    check_values(prob, x.v, gx.v, "input");
    for (auto* p : ps) check_values(prob, p->w, p->g, "param");
}

TEST_CASE("Adam updates are deterministic") {
    auto run = [] {
        SeededRng rng(55);
        nn::Linear lin(4, 4);
        lin.init(rng);
        std::vector<nn::Param*> ps;
        lin.params(ps);
        nn::Adam opt;
        opt.lr = 1e-2;
        opt.attach(ps);
        Tensor x = random_tensor({4}, rng);
        for (int i = 0; i < 20; ++i) {
            nn::zero_grads(ps);
            Tensor y = lin.forward(x);
            Tensor g(y.shape);
            for (std::size_t j = 0; j < g.v.size(); ++j) g.v[j] = y.v[j] - 1.0;
            lin.backward(g);
            opt.step(ps);
        }
        return lin.weight.w;
    };
    CHECK(run() == run());
}

TEST_CASE("model serialization round-trips bit exactly and validates metadata") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "stegsan_nn_test";
    fs::create_directories(dir);
    std::string path = (dir / "weights.bin").string();

    Denoiser2d a(3, 8, 8, 4);
    a.init(SeededRng(91));
    nn::ModelMeta meta;
    meta.kind = 1;
    meta.seed = 91;
    meta.horizon = 50;
    meta.schedule_kind = 1;
    meta.channels = 3;
    meta.height = 8;
    meta.width = 8;
    save_model(path, meta, a.params());

    Denoiser2d b(3, 8, 8, 4);
    nn::ModelMeta loaded = load_model(path, 1, b.params());
    CHECK(loaded == meta);
    auto pa = a.params(), pb = b.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->w == pb[i]->w);

    Denoiser2d c(3, 8, 8, 4);
    CHECK_THROWS(load_model(path, 2, c.params()));
    AudioDenoiser d(32, 4);
    CHECK_THROWS(load_model(path, 1, d.params()));
}
