#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "model.hpp"
#include "quality.hpp"

namespace uclean {

namespace detail {

inline std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline std::vector<int> set_minus(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<int> set_and(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<int> set_or(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::uint64_t state_count(const Dataset& ds, const std::vector<int>& idx, std::uint64_t cap) {
    std::uint64_t s = 1;
    for (int i : idx) {
        const Dist& d = ds.objects[i].dist;
        if (!is_discrete(d)) {
            if (is_point_mass(d)) continue;
            throw ValidationError("object '" + ds.objects[i].id +
                                  "' has a continuous distribution; discretize it first");
        }
        s *= std::get<DiscreteDist>(d).support.size();
        if (s > cap)
            throw CapExceededError("enumeration needs more than " + std::to_string(cap) + " states");
    }
    return s;
}

// Enumerates realizations of `idx` writing values into the shared work vector.
inline void scan(const Dataset& ds, const std::vector<int>& idx, std::vector<double>& work,
                 const std::function<void(double)>& fn, std::size_t k = 0, double prob = 1.0) {
    if (k == idx.size()) {
        fn(prob);
        return;
    }
    int i = idx[k];
    if (auto* n = std::get_if<NormalSpec>(&ds.objects[i].dist); n && n->stddev == 0) {
        work[i] = n->mean;
        scan(ds, idx, work, fn, k + 1, prob);
        return;
    }
    for (auto& [v, p] : std::get<DiscreteDist>(ds.objects[i].dist).support) {
        work[i] = v;
        scan(ds, idx, work, fn, k + 1, prob * p);
    }
}

} // namespace detail

// Exact Var[f(X) | assignment] by enumerating the unassigned objects f reads.
inline double conditional_variance(const QueryFunction& query, const Dataset& dataset,
                                   const Realization& assignment,
                                   std::uint64_t cap = kDefaultEnumerationCap) {
    if (dataset.covariance)
        throw ValidationError("conditional_variance requires an independent dataset");
    int n = static_cast<int>(dataset.size());
    std::vector<double> work = dataset.current_values();
    std::vector<int> assigned;
    for (auto& [i, v] : assignment.assignment) {
        work[i] = v;
        assigned.push_back(i);
    }
    std::sort(assigned.begin(), assigned.end());
    std::vector<int> free = detail::set_minus(query.support(n), assigned);
    free.erase(std::remove_if(free.begin(), free.end(),
                              [&](int i) { return is_point_mass(dataset.objects[i].dist); }),
               free.end());
    detail::state_count(dataset, free, cap);
    double e = 0, e2 = 0;
    detail::scan(dataset, free, work, [&](double p) {
        double f = query(work);
        e += p * f;
        e2 += p * f * f;
    });
    return std::max(0.0, e2 - e * e);
}

// EVar(T) = sum over realizations v of X_T of Pr[v] * Var[f | X_T = v].
inline double evar_bruteforce(const QueryFunction& query, const Dataset& dataset,
                              const std::vector<int>& subset,
                              std::uint64_t cap = kDefaultEnumerationCap) {
    if (dataset.covariance)
        throw ValidationError("evar_bruteforce requires an independent dataset");
    int n = static_cast<int>(dataset.size());
    std::vector<int> supp = query.support(n);
    auto not_random = [&](int i) { return is_point_mass(dataset.objects[i].dist); };
    // objects outside the query's support never change Var[f | v]
    std::vector<int> outer = detail::set_and(detail::sorted_unique(subset), supp);
    std::vector<int> inner = detail::set_minus(supp, outer);
    outer.erase(std::remove_if(outer.begin(), outer.end(), not_random), outer.end());
    inner.erase(std::remove_if(inner.begin(), inner.end(), not_random), inner.end());
    std::uint64_t so = detail::state_count(dataset, outer, cap);
    std::uint64_t si = detail::state_count(dataset, inner, cap);
    if (so > cap / std::max<std::uint64_t>(si, 1))
        throw CapExceededError("enumeration needs more than " + std::to_string(cap) + " states");
    std::vector<double> work = dataset.current_values();
    double total = 0;
    detail::scan(dataset, outer, work, [&](double pv) {
        double e = 0, e2 = 0;
        detail::scan(dataset, inner, work, [&](double p) {
            double f = query(work);
            e += p * f;
            e2 += p * f * f;
        });
        total += pv * std::max(0.0, e2 - e * e);
    });
    return total;
}

// Same value as the brute force, but exploiting additive structure: per-term
// expected conditional variances plus pairwise expected conditional
// covariances of overlapping terms. Runs in time local to the claim supports.
inline double evar_decomposed(const QueryFunction& query, const Dataset& dataset,
                              const std::vector<int>& subset,
                              std::uint64_t cap = kDefaultEnumerationCap) {
    if (dataset.covariance)
        throw ValidationError("evar_decomposed requires an independent dataset");
    if (!query.decomposable())
        throw ValidationError("evar_decomposed requires a decomposable query function");
    std::vector<int> T = detail::sorted_unique(subset);
    std::vector<double> work = dataset.current_values();
    double total = 0;
    const auto& terms = query.terms;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        std::vector<int> pinned = detail::set_and(terms[k].support, T);
        std::vector<int> free = detail::set_minus(terms[k].support, T);
        detail::state_count(dataset, terms[k].support, cap);
        detail::scan(dataset, pinned, work, [&](double pv) {
            double e = 0, e2 = 0;
            detail::scan(dataset, free, work, [&](double p) {
                double g = terms[k].eval(work);
                e += p * g;
                e2 += p * g * g;
            });
            total += pv * std::max(0.0, e2 - e * e);
        });
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
        for (std::size_t l = k + 1; l < terms.size(); ++l) {
            if (detail::set_and(terms[k].support, terms[l].support).empty())
                continue; // independent terms: zero covariance
            std::vector<int> both = detail::set_or(terms[k].support, terms[l].support);
            std::vector<int> pinned = detail::set_and(both, T);
            std::vector<int> free = detail::set_minus(both, T);
            detail::state_count(dataset, both, cap);
            detail::scan(dataset, pinned, work, [&](double pv) {
                double ek = 0, el = 0, ekl = 0;
                detail::scan(dataset, free, work, [&](double p) {
                    double gk = terms[k].eval(work);
                    double gl = terms[l].eval(work);
                    ek += p * gk;
                    el += p * gl;
                    ekl += p * gk * gl;
                });
                total += pv * 2.0 * (ekl - ek * el);
            });
        }
    }
    return std::max(0.0, total);
}

// Dependency mode: linear query over a covariance matrix. The cleaned set
// captures S(T) = sum_{i,j in T} a_i a_j Cov_ij of the total query variance.
inline double evar_linear_dependent(const std::vector<double>& weights,
                                    const std::vector<std::vector<double>>& cov,
                                    const std::vector<int>& subset) {
    int n = static_cast<int>(weights.size());
    double total = 0, captured = 0;
    std::vector<char> in(n, 0);
    for (int i : subset) in[i] = 1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double term = weights[i] * weights[j] * cov[i][j];
            total += term;
            if (in[i] && in[j]) captured += term;
        }
    return total - captured;
}

// Nested Monte Carlo estimate of EVar(T); used above the enumeration cap.
inline double evar_montecarlo(const QueryFunction& query, const Dataset& dataset,
                              const std::vector<int>& subset, int samples, std::uint64_t seed) {
    int n = static_cast<int>(dataset.size());
    std::vector<int> supp = query.support(n);
    std::vector<int> outer = detail::set_and(detail::sorted_unique(subset), supp);
    std::vector<int> inner = detail::set_minus(supp, outer);
    int m_outer = std::max(1, samples / 100);
    int m_inner = std::max(2, std::min(100, samples));
    auto draw = [&](int i, CounterRng& rng) {
        const Dist& d = dataset.objects[i].dist;
        if (auto* ns = std::get_if<NormalSpec>(&d)) return rng.normal(ns->mean, ns->stddev);
        const auto& sup = std::get<DiscreteDist>(d).support;
        double u = rng.next_double(), acc = 0;
        for (auto& [v, p] : sup) {
            acc += p;
            if (u < acc) return v;
        }
        return sup.back().first;
    };
    std::vector<double> work = dataset.current_values();
    double total = 0;
    for (int s = 0; s < m_outer; ++s) {
        CounterRng rng(seed, CounterRng::mix(s + 1));
        for (int i : outer) work[i] = draw(i, rng);
        double e = 0, e2 = 0;
        for (int t = 0; t < m_inner; ++t) {
            for (int i : inner) work[i] = draw(i, rng);
            double f = query(work);
            e += f;
            e2 += f * f;
        }
        e /= m_inner;
        e2 /= m_inner;
        total += std::max(0.0, (e2 - e * e) * m_inner / (m_inner - 1));
    }
    return total / m_outer;
}

struct EvarOptions {
    std::uint64_t cap = kDefaultEnumerationCap;
    int mc_samples = 20'000;
    std::uint64_t seed = 0;
};

// Memoized EVar oracle. Picks the cheapest exact strategy available and falls
// back to Monte Carlo above the cap (marking results approximate). Thread-safe.
class EvarEvaluator {
  public:
    EvarEvaluator(QueryFunction query, Dataset dataset, EvarOptions options = {})
        : query_(std::move(query)), dataset_(std::move(dataset)), options_(options) {
        if (dataset_.covariance && !query_.linear())
            throw ValidationError(
                "datasets with a covariance matrix support only linear query functions");
    }

    double evar(const std::vector<int>& subset) {
        std::vector<int> key = detail::sorted_unique(subset);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        double value = compute(key);
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.emplace(std::move(key), value);
        return value;
    }

    // EVar(T) - EVar(T + candidate); nonnegative for monotone objectives.
    double marginal_gain(const std::vector<int>& subset, int candidate) {
        std::vector<int> with = subset;
        with.push_back(candidate);
        return evar(subset) - evar(with);
    }

    bool approximate() const { return used_monte_carlo_; }

    const QueryFunction& query() const { return query_; }
    const Dataset& dataset() const { return dataset_; }

    void clear_cache() {
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.clear();
    }

  private:
    double compute(const std::vector<int>& subset) {
        if (dataset_.covariance)
            return evar_linear_dependent(*query_.linear_weights, *dataset_.covariance, subset);
        if (query_.linear()) {
            // independent objects: residual variance is modular, and this route also
            // covers continuous distributions that enumeration cannot
            const auto& w = *query_.linear_weights;
            double s = 0;
            for (int i = 0; i < static_cast<int>(dataset_.size()); ++i)
                if (std::find(subset.begin(), subset.end(), i) == subset.end())
                    s += w[i] * w[i] * variance(dataset_.objects[i].dist);
            return s;
        }
        try {
            if (query_.decomposable()) return evar_decomposed(query_, dataset_, subset, options_.cap);
            return evar_bruteforce(query_, dataset_, subset, options_.cap);
        } catch (const CapExceededError&) {
            used_monte_carlo_ = true;
            return evar_montecarlo(query_, dataset_, subset, options_.mc_samples, options_.seed);
        }
    }

    QueryFunction query_;
    Dataset dataset_;
    EvarOptions options_;
    std::map<std::vector<int>, double> cache_;
    std::mutex mutex_;
    bool used_monte_carlo_ = false;
};

// kappa = 1 - min_i (EVar(empty) - EVar({i})) / EVar(O minus {i}), skipping
// zero denominators. 1 flags the weak-guarantee regime.
inline double curvature(EvarEvaluator& ev) {
    int n = static_cast<int>(ev.dataset().size());
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    double e0 = ev.evar({});
    double best = INFINITY;
    bool any = false;
    for (int i = 0; i < n; ++i) {
        std::vector<int> rest;
        for (int j = 0; j < n; ++j)
            if (j != i) rest.push_back(j);
        double denom = ev.evar(rest);
        if (denom <= 1e-15) continue;
        any = true;
        best = std::min(best, (e0 - ev.evar({i})) / denom);
    }
    if (!any)
        throw ValidationError("curvature undefined: every EVar(O minus {i}) is zero");
    return 1.0 - best;
}

} // namespace uclean
