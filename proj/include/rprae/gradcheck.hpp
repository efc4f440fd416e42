#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rprae/graph.hpp"

namespace rprae {

// Builds a scalar loss on a fresh tape from the given leaf tensors and
// returns its node id.  Leaves must be created in order with Tape::leaf so
// their ids are 0..n-1.
using ScalarFn = std::function<int(Tape&, const std::vector<Tensor>&)>;

struct GradCheckResult {
    bool ok = true;
    double max_rel_err = 0.0;
    std::string worst;  // "leaf 2 element 7" style locator for the worst entry
};

// Central-difference check of Tape::backward against the scalar function.
// rel = |analytic - numeric| / max(|analytic|, |numeric|, floor).
GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor>& leaves, double h = 1e-5,
                           double tol = 1e-4, double floor = 1e-8);

}  // namespace rprae
