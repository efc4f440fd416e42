#pragma once

#include "rprae/tensor.hpp"

namespace rprae {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Per-parameter optimizer state.  `step` counts completed updates and drives
// the bias correction, so each parameter carries its own counter and a
// partially trained subset (e.g. a frozen branch) stays consistent.
struct ParamState {
    Tensor m;
    Tensor v;
    long long step = 0;

    explicit ParamState(const Shape& shape) : m(Tensor::zeros(shape)), v(Tensor::zeros(shape)) {}
    ParamState(Tensor m_, Tensor v_, long long step_) : m(std::move(m_)), v(std::move(v_)), step(step_) {}
};

// In-place Adam update: eps sits outside the square root.
void adam_step(Tensor& param, const Tensor& grad, ParamState& state, const AdamConfig& cfg);

}  // namespace rprae
