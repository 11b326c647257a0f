#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "model.hpp"

namespace uclean {

enum class Family { UR, LN, SM, NormalMeanFixed };

inline Family parse_family(const std::string& s) {
    if (s == "ur" || s == "UR") return Family::UR;
    if (s == "ln" || s == "LN") return Family::LN;
    if (s == "sm" || s == "SM") return Family::SM;
    if (s == "normal" || s == "normal-meanfixed") return Family::NormalMeanFixed;
    throw ValidationError("unknown family '" + s + "' (expected ur|ln|sm|normal)");
}

struct CostModel {
    enum Kind { Uniform, Recency, TwoPoint } kind = Uniform;
    double a = 1, b = 10, jitter = 5; // uniform(lo,hi) | recency(base,step,jitter) | two-point(a,b)

    static CostModel uniform(double lo, double hi) { return {Uniform, lo, hi, 0}; }
    static CostModel recency(double base, double step, double jitter) {
        return {Recency, base, step, jitter};
    }
    static CostModel two_point(double a, double b) { return {TwoPoint, a, b, 0}; }
};

struct GenSpec {
    Family family = Family::UR;
    int n = 1;
    std::uint64_t seed = 0;
    CostModel cost_model = CostModel::uniform(1, 10);
    double support_min = 1;
    double support_max = 100;
};

namespace genfields {
// stream labels per object so adding draws to one field never shifts another
constexpr std::uint64_t kSize = 0, kValues = 1, kProbs = 2, kCost = 3, kSigma = 4, kCurrent = 5;
} // namespace genfields

namespace detail_gen {

inline double draw_cost(const CostModel& cm, int i, CounterRng& rng) {
    switch (cm.kind) {
        case CostModel::Uniform:
            // integer costs keep the exact DP path available
            return static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(cm.a),
                                                       static_cast<std::int64_t>(cm.b)));
        case CostModel::Recency:
            return cm.a - cm.b * i - rng.next_double() * cm.jitter;
        case CostModel::TwoPoint:
            return rng.next_double() < 0.5 ? cm.a : cm.b;
    }
    return 1;
}

inline std::vector<double> distinct_values(int count, double lo, double hi, CounterRng& rng) {
    std::vector<double> vals;
    while (static_cast<int>(vals.size()) < count) {
        double v = static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(lo),
                                                       static_cast<std::int64_t>(hi)));
        if (std::find(vals.begin(), vals.end(), v) == vals.end()) vals.push_back(v);
    }
    std::sort(vals.begin(), vals.end());
    return vals;
}

} // namespace detail_gen

inline Dataset generate(const GenSpec& spec) {
    if (spec.n < 1) throw ValidationError("generate: n must be >= 1");
    if (!(spec.support_min < spec.support_max))
        throw ValidationError("generate: empty support range");
    Dataset ds;
    for (int i = 0; i < spec.n; ++i) {
        CounterRng size_rng(spec.seed, field_stream(i, genfields::kSize));
        CounterRng value_rng(spec.seed, field_stream(i, genfields::kValues));
        CounterRng prob_rng(spec.seed, field_stream(i, genfields::kProbs));
        CounterRng cost_rng(spec.seed, field_stream(i, genfields::kCost));
        CounterRng sigma_rng(spec.seed, field_stream(i, genfields::kSigma));
        CounterRng current_rng(spec.seed, field_stream(i, genfields::kCurrent));
        UncertainObject o;
        o.id = "o" + std::to_string(i + 1);
        o.cost = detail_gen::draw_cost(spec.cost_model, i, cost_rng);
        if (spec.family == Family::NormalMeanFixed) {
            double mean = current_rng.uniform(spec.support_min, spec.support_max);
            double sigma = sigma_rng.uniform(1.0, 10.0);
            o.current_value = mean;
            o.dist = NormalSpec{mean, sigma};
            ds.objects.push_back(std::move(o));
            continue;
        }
        int size = static_cast<int>(size_rng.uniform_int(1, 6));
        DiscreteDist d;
        if (spec.family == Family::LN) {
            // equal-probability slices of LogNormal(0, sigma), representatives
            // just inside each slice's right end
            double sigma = sigma_rng.next_open_closed();
            std::vector<double> vals(size), dens(size);
            double left = 0; // quantile at 0
            for (int j = 0; j < size; ++j) {
                double p = (j == size - 1) ? 0.999 : static_cast<double>(j + 1) / size;
                double right = std::exp(sigma * normal_quantile(p));
                vals[j] = right - 0.01 * (right - left);
                double lx = std::log(vals[j]);
                dens[j] = std::exp(-lx * lx / (2 * sigma * sigma)) / (vals[j] * sigma);
                left = right;
            }
            double dsum = 0;
            for (double x : dens) dsum += x;
            for (int j = 0; j < size; ++j) d.support.emplace_back(vals[j], dens[j] / dsum);
        } else {
            std::vector<double> vals =
                detail_gen::distinct_values(size, spec.support_min, spec.support_max, value_rng);
            std::vector<double> ps(size);
            double psum = 0;
            for (int j = 0; j < size; ++j) {
                if (spec.family == Family::UR) {
                    ps[j] = prob_rng.next_open_closed();
                } else { // SM: mass drawn from the extremes (0,0.1] or [0.9,1)
                    bool low = prob_rng.next_double() < 0.5;
                    ps[j] = low ? 0.1 * prob_rng.next_open_closed() : prob_rng.uniform(0.9, 1.0);
                }
                psum += ps[j];
            }
            for (int j = 0; j < size; ++j) d.support.emplace_back(vals[j], ps[j] / psum);
        }
        // current (dirty) value: one draw from the distribution itself
        double u = current_rng.next_double(), acc = 0;
        o.current_value = d.support.back().first;
        for (auto& [v, p] : d.support) {
            acc += p;
            if (u < acc) {
                o.current_value = v;
                break;
            }
        }
        o.dist = std::move(d);
        ds.objects.push_back(std::move(o));
    }
    return ds;
}

// AR(1)-style covariance: Cov[i][j] = gamma^{|j-i|} sigma_i sigma_j.
// gamma = 1 makes the matrix rank one (fully correlated).
inline std::vector<std::vector<double>> inject_dependency(const std::vector<double>& sigmas,
                                                          double gamma) {
    if (gamma < 0 || gamma > 1)
        throw ValidationError("inject_dependency: gamma must be in [0,1]");
    int n = static_cast<int>(sigmas.size());
    std::vector<std::vector<double>> cov(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cov[i][j] = std::pow(gamma, std::abs(j - i)) * sigmas[i] * sigmas[j];
    return cov;
}

inline bool fully_correlated(double gamma) { return gamma == 1.0; }

// Bundled yearly series resembling a slowly drifting adoption count; stands in
// for real data at desk scale.
inline const std::array<double, 26>& adoption_series() {
    static const std::array<double, 26> series = {
        9743, 9512, 9301, 9488, 9122, 8951, 9210, 9365, 9047, 8898, 8744, 8912, 9033,
        9187, 8856, 8675, 8540, 8722, 8891, 9015, 8760, 9010, 9275, 9300, 9125, 9430};
    return series;
}

inline Dataset adoptions_like(int n, double std_hi, double cost_hi, std::uint64_t seed) {
    if (n < 1) throw ValidationError("adoptions_like: n must be >= 1");
    const auto& series = adoption_series();
    Dataset ds;
    for (int i = 0; i < n; ++i) {
        CounterRng sigma_rng(seed, field_stream(i, genfields::kSigma));
        CounterRng cost_rng(seed, field_stream(i, genfields::kCost));
        UncertainObject o;
        o.id = "y" + std::to_string(i + 1);
        o.current_value = series[i % series.size()];
        double sigma = std_hi <= 0 ? 0.0 : sigma_rng.uniform(1.0, std_hi);
        o.dist = NormalSpec{o.current_value, sigma};
        o.cost = cost_rng.uniform(1.0, std::max(1.0, cost_hi));
        ds.objects.push_back(std::move(o));
    }
    return ds;
}

} // namespace uclean
