#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "evar.hpp"
#include "model.hpp"
#include "quality.hpp"

namespace uclean {

// Exact Pr[f(X) < f(u) - tau | X outside T pinned at u]. Strict inequality:
// realizations landing exactly on the threshold never count.
inline double maxpr_exact(const QueryFunction& query, const Dataset& dataset,
                          const std::vector<int>& subset, double tau,
                          std::uint64_t cap = kDefaultEnumerationCap) {
    if (tau < 0) throw ValidationError("maxpr requires tau >= 0");
    if (dataset.covariance)
        throw ValidationError("maxpr_exact requires an independent dataset");
    std::vector<double> work = dataset.current_values();
    double threshold = query(work) - tau;
    std::vector<int> idx = detail::sorted_unique(subset);
    idx.erase(std::remove_if(idx.begin(), idx.end(),
                             [&](int i) { return is_point_mass(dataset.objects[i].dist); }),
              idx.end());
    detail::state_count(dataset, idx, cap);
    double prob = 0;
    detail::scan(dataset, idx, work, [&](double p) {
        if (query(work) < threshold) prob += p;
    });
    return prob;
}

// Centered independent normal errors with a linear query: the deviation
// probability is Phi(-tau / sqrt(S)) with S = sum_{i in T} a_i^2 sigma_i^2.
inline double maxpr_normal_closed_form(const std::vector<double>& weights,
                                       const std::vector<double>& sigmas,
                                       const std::vector<int>& subset, double tau) {
    if (tau < 0) throw ValidationError("maxpr requires tau >= 0");
    double s = 0;
    for (int i : subset) s += weights[i] * weights[i] * sigmas[i] * sigmas[i];
    if (s == 0) {
        if (tau == 0)
            throw ValidationError(
                "maxpr closed form is ill-posed with tau = 0 and no residual variance");
        return 0.0;
    }
    return normal_cdf(-tau / std::sqrt(s));
}

// General independent-normal case: X_i ~ N(mu_i, sigma_i^2) need not be
// centered at the current values. Used by the competing-objectives harness.
inline double maxpr_normal_general(const std::vector<double>& weights,
                                   const std::vector<double>& mus,
                                   const std::vector<double>& sigmas,
                                   const std::vector<double>& current,
                                   const std::vector<int>& subset, double tau) {
    if (tau < 0) throw ValidationError("maxpr requires tau >= 0");
    double s = 0, shift = 0;
    for (int i : subset) {
        s += weights[i] * weights[i] * sigmas[i] * sigmas[i];
        shift += weights[i] * (mus[i] - current[i]);
    }
    if (s == 0) return (shift < -tau) ? 1.0 : 0.0;
    return normal_cdf((-tau - shift) / std::sqrt(s));
}

// Frequency estimate of the deviation probability with binomial stderr.
inline std::pair<double, double> maxpr_montecarlo(const QueryFunction& query, const Dataset& dataset,
                                                  const std::vector<int>& subset, double tau,
                                                  int samples, std::uint64_t seed) {
    if (samples < 1) throw ValidationError("maxpr_montecarlo needs samples >= 1");
    std::vector<double> work = dataset.current_values();
    double threshold = query(work) - tau;
    std::vector<int> idx = detail::sorted_unique(subset);
    CounterRng rng(seed, 0x6d61787072ULL);
    long hits = 0;
    for (int s = 0; s < samples; ++s) {
        for (int i : idx) {
            const Dist& d = dataset.objects[i].dist;
            if (auto* ns = std::get_if<NormalSpec>(&d)) {
                work[i] = ns->stddev == 0 ? ns->mean : rng.normal(ns->mean, ns->stddev);
            } else {
                const auto& sup = std::get<DiscreteDist>(d).support;
                double u = rng.next_double(), acc = 0;
                work[i] = sup.back().first;
                for (auto& [v, p] : sup) {
                    acc += p;
                    if (u < acc) {
                        work[i] = v;
                        break;
                    }
                }
            }
        }
        if (query(work) < threshold) ++hits;
    }
    double est = static_cast<double>(hits) / samples;
    double se = std::sqrt(std::max(est * (1 - est), 0.0) / samples);
    return {est, se};
}

// Unified MaxPr oracle for solvers: picks the closed form for normal linear
// instances, exact enumeration otherwise. Memoized like the EVar evaluator.
class MaxPrEvaluator {
  public:
    MaxPrEvaluator(QueryFunction query, Dataset dataset, double tau,
                   std::uint64_t cap = kDefaultEnumerationCap)
        : query_(std::move(query)), dataset_(std::move(dataset)), tau_(tau), cap_(cap) {
        bool all_normal = true;
        for (auto& o : dataset_.objects)
            if (!std::holds_alternative<NormalSpec>(o.dist)) all_normal = false;
        closed_form_ = all_normal && query_.linear() && !dataset_.covariance;
        if (closed_form_) {
            for (auto& o : dataset_.objects) {
                auto& ns = std::get<NormalSpec>(o.dist);
                mus_.push_back(ns.mean);
                sigmas_.push_back(ns.stddev);
            }
        }
    }

    double prob(const std::vector<int>& subset) {
        std::vector<int> key = detail::sorted_unique(subset);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        double p;
        if (closed_form_)
            p = maxpr_normal_general(*query_.linear_weights, mus_, sigmas_,
                                     dataset_.current_values(), key, tau_);
        else
            p = maxpr_exact(query_, dataset_, key, tau_, cap_);
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.emplace(std::move(key), p);
        return p;
    }

    double tau() const { return tau_; }

  private:
    QueryFunction query_;
    Dataset dataset_;
    double tau_;
    std::uint64_t cap_;
    bool closed_form_ = false;
    std::vector<double> mus_, sigmas_;
    std::map<std::vector<int>, double> cache_;
    std::mutex mutex_;
};

} // namespace uclean
