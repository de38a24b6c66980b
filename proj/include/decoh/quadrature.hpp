#pragma once

#include <array>
#include <cstddef>

namespace decoh::quadrature {

/// 61-point Gauss-Kronrod rule on [-1, 1] (QUADPACK qk61), in node order
/// -x_0 ... -x_29, 0, x_29 ... x_0. `gauss_weight` is zero at Kronrod-only nodes.
struct Gk61 {
    static constexpr std::size_t size = 61;
    std::array<double, size> node;
    std::array<double, size> kronrod_weight;
    std::array<double, size> gauss_weight;
};

const Gk61& gk61();

}  // namespace decoh::quadrature
