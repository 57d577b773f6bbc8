#pragma once

#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace test_support {

/// RNG for property loops. CAPILLARY1D_SEED overrides the default seed.
inline std::mt19937_64 rng() {
    std::uint64_t seed = 20251018;
    if (const char* s = std::getenv("CAPILLARY1D_SEED")) seed = std::strtoull(s, nullptr, 10);
    return std::mt19937_64(seed);
}

/// Adaptive Gauss-Kronrod with a tight tolerance, used as an oracle.
template <class F>
double integrate(F f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-14);
}

}  // namespace test_support
