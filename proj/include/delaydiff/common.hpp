#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace delaydiff {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. tau at t < 0).
struct DomainError : Error {
    using Error::Error;
};

/// A delay or signal descriptor violates its construction invariants.
struct ConstructionError : Error {
    using Error::Error;
};

/// A requested point falls outside the stored history support.
struct HistoryError : Error {
    using Error::Error;
};

/// The delay-iteration step cap was exceeded (positivity of the delay
/// infimum does not hold on the queried range).
struct StepCapError : Error {
    using Error::Error;
};

/// Numerical routine failed to converge or bracket its target.
struct NumericError : Error {
    using Error::Error;
};

/// Default seed for every stratified / randomized estimator in the library.
/// DELAYDIFF_SEED overrides it, so runs are reproducible by construction.
inline std::uint64_t default_seed() {
    if (const char* env = std::getenv("DELAYDIFF_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env) return static_cast<std::uint64_t>(v);
    }
    return 0x5eedULL;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

/// n equally spaced points covering [lo, hi] (endpoints included, n >= 2).
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out;
    out.reserve(n);
    if (n == 1) {
        out.push_back(lo);
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
}

inline bool nearly_equal(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace delaydiff
