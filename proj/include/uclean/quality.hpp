#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "claims.hpp"
#include "model.hpp"

namespace uclean {

enum class MeasureKind { Bias, Duplicity, Fragility };

inline MeasureKind parse_measure(const std::string& s) {
    if (s == "bias") return MeasureKind::Bias;
    if (s == "duplicity") return MeasureKind::Duplicity;
    if (s == "fragility") return MeasureKind::Fragility;
    throw ValidationError("unknown measure '" + s + "' (expected bias|duplicity|fragility)");
}

// Relative strength of one perturbation against the frozen baseline. For
// threshold claims the reference is the claim's own threshold.
inline double claim_delta(const Claim& claim, double baseline, const std::vector<double>& values) {
    if (auto* tc = std::get_if<ThresholdClaim>(&claim)) {
        double agg = evaluate_claim(claim, values);
        return tc->below ? tc->threshold - agg : agg - tc->threshold;
    }
    return relative_strength(evaluate_claim(claim, values), baseline);
}

inline double bias(const ClaimSystem& sys, double baseline, const std::vector<double>& values) {
    double b = 0;
    for (std::size_t k = 0; k < sys.perturbations.size(); ++k)
        b += sys.sensibilities[k] * claim_delta(sys.perturbations[k], baseline, values);
    return b;
}

// Counts perturbations at least as strong as the original. Delta-based claims
// count non-strictly (>= 0); threshold claims count strictly (an aggregate
// exactly at Gamma is not "as low as Gamma").
inline int duplicity(const ClaimSystem& sys, double baseline, const std::vector<double>& values) {
    int c = 0;
    for (const Claim& q : sys.perturbations) {
        double d = claim_delta(q, baseline, values);
        bool strict = std::holds_alternative<ThresholdClaim>(q);
        if (strict ? d > 0 : d >= 0) ++c;
    }
    return c;
}

inline double fragility(const ClaimSystem& sys, double baseline, const std::vector<double>& values) {
    double f = 0;
    for (std::size_t k = 0; k < sys.perturbations.size(); ++k) {
        double d = std::min(claim_delta(sys.perturbations[k], baseline, values), 0.0);
        f += sys.sensibilities[k] * d * d;
    }
    return f;
}

struct QualityMeasure {
    MeasureKind kind = MeasureKind::Bias;
    ClaimSystem system;
    double baseline = 0; // q°(u), frozen at construction

    QualityMeasure() = default;
    QualityMeasure(MeasureKind k, ClaimSystem sys, const std::vector<double>& current_values)
        : kind(k), system(std::move(sys)) {
        validate_claim_system(system);
        baseline = std::holds_alternative<ThresholdClaim>(system.original)
                       ? 0.0 // thresholds carry their own reference
                       : evaluate_claim(system.original, current_values);
    }

    double operator()(const std::vector<double>& values) const {
        switch (kind) {
            case MeasureKind::Bias: return bias(system, baseline, values);
            case MeasureKind::Duplicity: return duplicity(system, baseline, values);
            case MeasureKind::Fragility: return fragility(system, baseline, values);
        }
        return 0;
    }
};

// One additive piece of a query function, reading only `support`.
struct LocalTerm {
    std::vector<int> support; // sorted object indices
    std::function<double(const std::vector<double>&)> eval;
};

// The f of the two objectives: evaluable on a full assignment, optionally
// linear, optionally decomposable into claim-local terms.
struct QueryFunction {
    std::string name = "query";
    std::function<double(const std::vector<double>&)> eval;
    std::vector<LocalTerm> terms;                        // empty: not decomposable
    std::optional<std::vector<double>> linear_weights;   // set when f is affine
    double linear_offset = 0;

    double operator()(const std::vector<double>& values) const { return eval(values); }

    bool decomposable() const { return !terms.empty(); }
    bool linear() const { return linear_weights.has_value(); }

    // Union of all indices the function reads (empty terms: assume all).
    std::vector<int> support(int n) const {
        std::vector<int> s;
        if (linear_weights) {
            for (int i = 0; i < n; ++i)
                if ((*linear_weights)[i] != 0) s.push_back(i);
            return s;
        }
        if (terms.empty()) {
            s.resize(n);
            for (int i = 0; i < n; ++i) s[i] = i;
            return s;
        }
        for (const auto& t : terms) s.insert(s.end(), t.support.begin(), t.support.end());
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        return s;
    }
};

inline QueryFunction linear_query(std::vector<double> weights, double offset = 0,
                                  std::string name = "linear") {
    QueryFunction q;
    q.name = std::move(name);
    auto w = std::make_shared<std::vector<double>>(std::move(weights));
    q.eval = [w, offset](const std::vector<double>& x) {
        double s = offset;
        for (std::size_t i = 0; i < w->size(); ++i) s += (*w)[i] * x[i];
        return s;
    };
    // one local term per referenced object keeps the decomposition modular
    for (std::size_t i = 0; i < w->size(); ++i) {
        if ((*w)[i] == 0) continue;
        double wi = (*w)[i];
        int idx = static_cast<int>(i);
        q.terms.push_back({{idx}, [wi, idx](const std::vector<double>& x) { return wi * x[idx]; }});
    }
    q.linear_weights = *w;
    q.linear_offset = offset;
    return q;
}

// Sum of strict threshold indicators: f(x) = sum_k 1[agg_k < Gamma_k] (or >).
inline QueryFunction indicator_query(std::vector<ThresholdClaim> claims,
                                     std::string name = "indicator-sum") {
    QueryFunction q;
    q.name = std::move(name);
    auto cs = std::make_shared<std::vector<ThresholdClaim>>(std::move(claims));
    for (const ThresholdClaim& tc : *cs) {
        Claim c = tc;
        q.terms.push_back({claim_support(c), [tc](const std::vector<double>& x) {
                               double agg = 0;
                               for (int i : tc.member_indices) agg += x[i];
                               return (tc.below ? agg < tc.threshold : agg > tc.threshold) ? 1.0 : 0.0;
                           }});
    }
    q.eval = [cs](const std::vector<double>& x) {
        double s = 0;
        for (const ThresholdClaim& tc : *cs) {
            double agg = 0;
            for (int i : tc.member_indices) agg += x[i];
            if (tc.below ? agg < tc.threshold : agg > tc.threshold) s += 1.0;
        }
        return s;
    };
    return q;
}

// Wraps a quality measure as a query function, with per-claim local terms so
// the decomposed objective evaluation applies.
inline QueryFunction measure_query(const QualityMeasure& measure, int n) {
    QueryFunction q;
    switch (measure.kind) {
        case MeasureKind::Bias: q.name = "bias"; break;
        case MeasureKind::Duplicity: q.name = "duplicity"; break;
        case MeasureKind::Fragility: q.name = "fragility"; break;
    }
    auto m = std::make_shared<QualityMeasure>(measure);
    q.eval = [m](const std::vector<double>& x) { return (*m)(x); };
    const ClaimSystem& sys = m->system;
    bool all_linear = true;
    std::vector<double> wsum(n, 0.0);
    double osum = 0;
    for (std::size_t k = 0; k < sys.perturbations.size(); ++k) {
        const Claim& claim = sys.perturbations[k];
        double s_k = sys.sensibilities[k];
        double baseline = m->baseline;
        MeasureKind kind = m->kind;
        LocalTerm t;
        t.support = claim_support(claim);
        Claim local = claim;
        t.eval = [local, s_k, baseline, kind](const std::vector<double>& x) {
            double d = claim_delta(local, baseline, x);
            switch (kind) {
                case MeasureKind::Bias: return s_k * d;
                case MeasureKind::Duplicity: {
                    bool strict = std::holds_alternative<ThresholdClaim>(local);
                    return (strict ? d > 0 : d >= 0) ? 1.0 : 0.0;
                }
                case MeasureKind::Fragility: {
                    double neg = std::min(d, 0.0);
                    return s_k * neg * neg;
                }
            }
            return 0.0;
        };
        q.terms.push_back(std::move(t));
        std::vector<double> w;
        double off;
        if (!claim_linear_weights(claim, n, w, off)) {
            all_linear = false;
        } else if (measure.kind == MeasureKind::Bias) {
            for (int i = 0; i < n; ++i) wsum[i] += s_k * w[i];
            osum += s_k * (off - m->baseline);
        }
    }
    if (measure.kind == MeasureKind::Bias && all_linear) {
        q.linear_weights = wsum;
        q.linear_offset = osum;
    }
    return q;
}

// Exact distribution of the measure over a dataset conditioned on `cleaned`.
inline DiscreteDist quality_distribution(const QualityMeasure& measure, const Dataset& dataset,
                                         const Realization& cleaned,
                                         std::uint64_t cap = kDefaultEnumerationCap) {
    Dataset cond = condition(dataset, cleaned);
    std::vector<int> all(cond.size());
    for (std::size_t i = 0; i < cond.size(); ++i) all[i] = static_cast<int>(i);
    std::vector<std::pair<double, double>> atoms;
    for_each_realization(cond, all, [&](const std::vector<double>& vals, double prob) {
        atoms.emplace_back(measure(vals), prob);
    }, cap);
    std::sort(atoms.begin(), atoms.end());
    DiscreteDist out;
    for (auto& [v, p] : atoms) {
        if (!out.support.empty() &&
            std::abs(v - out.support.back().first) <= 1e-12 * std::max(1.0, std::abs(v)))
            out.support.back().second += p;
        else
            out.support.emplace_back(v, p);
    }
    return out;
}

} // namespace uclean
