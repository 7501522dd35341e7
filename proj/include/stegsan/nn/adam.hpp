#pragma once

#include <cmath>
#include <vector>

#include "stegsan/nn/layers.hpp"

namespace stegsan::nn {

struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<std::vector<double>> m, v;

    void attach(const std::vector<Param*>& ps) {
        m.clear();
        v.clear();
        for (const Param* p : ps) {
            m.emplace_back(p->w.size(), 0.0);
            v.emplace_back(p->w.size(), 0.0);
        }
        step_count = 0;
    }

    void step(const std::vector<Param*>& ps) {
        ++step_count;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        for (std::size_t pi = 0; pi < ps.size(); ++pi) {
            Param& p = *ps[pi];
            for (std::size_t i = 0; i < p.w.size(); ++i) {
                double g = p.g[i];
                m[pi][i] = beta1 * m[pi][i] + (1.0 - beta1) * g;
                v[pi][i] = beta2 * v[pi][i] + (1.0 - beta2) * g * g;
                double mh = m[pi][i] / bc1;
                double vh = v[pi][i] / bc2;
                p.w[i] -= lr * mh / (std::sqrt(vh) + eps);
            }
        }
    }
};

inline void zero_grads(const std::vector<Param*>& ps) {
    for (Param* p : ps) p->zero_grad();
}

}  // namespace stegsan::nn
