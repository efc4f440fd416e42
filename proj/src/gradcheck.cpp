#include "rprae/gradcheck.hpp"

#include <cmath>

namespace rprae {

namespace {

double eval(const ScalarFn& fn, const std::vector<Tensor>& leaves) {
    Tape tape;
    int loss = fn(tape, leaves);
    const Tensor& v = tape.value(loss);
    if (v.size() != 1) throw ShapeError("grad_check: fn must produce a scalar");
    return v[0];
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor>& leaves, double h, double tol,
                           double floor) {
    Tape tape;
    int loss = fn(tape, leaves);
    auto grads = tape.backward(loss);

    GradCheckResult res;
    std::vector<Tensor> work = leaves;
    for (size_t li = 0; li < leaves.size(); ++li) {
        for (int ei = 0; ei < leaves[li].size(); ++ei) {
            const double orig = work[li][ei];
            work[li][ei] = orig + h;
            const double fp = eval(fn, work);
            work[li][ei] = orig - h;
            const double fm = eval(fn, work);
            work[li][ei] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = grads[li][ei];
            const double denom = std::max({std::fabs(analytic), std::fabs(numeric), floor});
            const double rel = std::fabs(analytic - numeric) / denom;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst = "leaf " + std::to_string(li) + " element " + std::to_string(ei);
            }
        }
    }
    res.ok = res.max_rel_err <= tol;
    return res;
}

}  // namespace rprae
