#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rprae/gradcheck.hpp"

namespace rprae {

struct NamedGradCheck {
    std::string name;  // "op:matmul", "loss:shr", ...
    GradCheckResult result;
};

// Central-difference verification of every differentiable tape op, the LSTM
// cell, and the three model losses end to end. Deterministic in the seed.
std::vector<NamedGradCheck> run_gradcheck_suite(std::uint64_t seed);

}  // namespace rprae
