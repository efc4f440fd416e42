#include "rprae/adam.hpp"

#include <cmath>

namespace rprae {

void adam_step(Tensor& param, const Tensor& grad, ParamState& state, const AdamConfig& cfg) {
    if (!param.same_shape(grad) || !param.same_shape(state.m) || !param.same_shape(state.v))
        throw ShapeError("adam_step: shape mismatch between param " + param.shape_str() + " and grad " +
                         grad.shape_str());
    state.step += 1;
    const double b1t = std::pow(cfg.beta1, static_cast<double>(state.step));
    const double b2t = std::pow(cfg.beta2, static_cast<double>(state.step));
    const int n = param.size();
    for (int i = 0; i < n; ++i) {
        const double g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[i] / (1.0 - b1t);
        const double vhat = state.v[i] / (1.0 - b2t);
        param[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        if (!std::isfinite(param[i])) throw NumericError("adam_step: parameter became non-finite");
    }
}

}  // namespace rprae
