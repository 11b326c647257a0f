#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace uclean {

// Input/structure problems: bad files, broken invariants, out-of-range arguments.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// State-space too large for exact enumeration.
struct CapExceededError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A solver cannot produce a plan for this input (wrong model, infeasible, too large).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Inverse standard normal CDF. Acklam's rational approximation polished with
// two Newton steps; good to ~1e-15 over (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -INFINITY;
        if (p == 1.0) return INFINITY;
        throw ValidationError("normal_quantile: p must be in [0,1], got " + std::to_string(p));
    }
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    for (int it = 0; it < 2; ++it) {
        double e = normal_cdf(x) - p;
        double u = e / normal_pdf(x);
        x = x - u / (1 + x * u / 2); // Halley step
    }
    return x;
}

// Splittable counter-based generator: every draw is a pure hash of
// (seed, stream, counter), so streams never perturb each other and parallel
// substreams reproduce the serial sequence.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return mix(mix(mix(seed_) ^ stream_) ^ counter_++); }

    // uniform in [0,1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1]
    double next_open_closed() { return 1.0 - next_double(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // inclusive bounds
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return mean + stddev * normal_quantile(next_open_closed());
    }

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

// Stable stream id for (object index, field) pairs used by the generators.
inline std::uint64_t field_stream(std::uint64_t object_index, std::uint64_t field) {
    return CounterRng::mix(object_index * 64 + field + 1);
}

} // namespace uclean
