#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "common.hpp"

namespace uclean {

struct LinearClaim {
    std::vector<double> weights; // one per dataset object
    double offset = 0;
};

// Difference of two same-width window sums: sum(right window) - sum(left window).
// Starts are 0-based object indices.
struct WindowAggregateClaim {
    int left_start = 0;
    int right_start = 0;
    int window = 1;

    int end_index() const { return std::max(left_start, right_start) + window - 1; }
    bool fits(int n) const {
        return left_start >= 0 && right_start >= 0 && window >= 1 &&
               left_start + window <= n && right_start + window <= n;
    }
};

struct ThresholdClaim {
    std::vector<int> member_indices; // 0-based
    double threshold = 0;            // Gamma
    bool below = true;               // direction of a "strong" claim
};

using Claim = std::variant<LinearClaim, WindowAggregateClaim, ThresholdClaim>;

inline double evaluate_claim(const Claim& claim, const std::vector<double>& values) {
    if (auto* lc = std::get_if<LinearClaim>(&claim)) {
        if (lc->weights.size() > values.size())
            throw ValidationError("evaluate_claim: assignment has " + std::to_string(values.size()) +
                                  " values but the claim references " + std::to_string(lc->weights.size()));
        double s = lc->offset;
        for (std::size_t i = 0; i < lc->weights.size(); ++i) s += lc->weights[i] * values[i];
        return s;
    }
    if (auto* wc = std::get_if<WindowAggregateClaim>(&claim)) {
        if (!wc->fits(static_cast<int>(values.size())))
            throw ValidationError("evaluate_claim: window claim does not fit the assignment");
        double left = 0, right = 0;
        for (int k = 0; k < wc->window; ++k) {
            left += values[wc->left_start + k];
            right += values[wc->right_start + k];
        }
        return right - left;
    }
    const auto& tc = std::get<ThresholdClaim>(claim);
    double agg = 0;
    for (int i : tc.member_indices) {
        if (i < 0 || i >= static_cast<int>(values.size()))
            throw ValidationError("evaluate_claim: threshold member index " + std::to_string(i) +
                                  " missing from assignment");
        agg += values[i];
    }
    return agg;
}

// Object indices a claim reads.
inline std::vector<int> claim_support(const Claim& claim) {
    std::vector<int> s;
    if (auto* lc = std::get_if<LinearClaim>(&claim)) {
        for (std::size_t i = 0; i < lc->weights.size(); ++i)
            if (lc->weights[i] != 0) s.push_back(static_cast<int>(i));
    } else if (auto* wc = std::get_if<WindowAggregateClaim>(&claim)) {
        for (int k = 0; k < wc->window; ++k) {
            s.push_back(wc->left_start + k);
            s.push_back(wc->right_start + k);
        }
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    } else {
        s = std::get<ThresholdClaim>(claim).member_indices;
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return s;
}

// Linear weight vector of a claim if it has one (threshold claims do not).
inline bool claim_linear_weights(const Claim& claim, int n, std::vector<double>& weights, double& offset) {
    if (auto* lc = std::get_if<LinearClaim>(&claim)) {
        weights.assign(n, 0.0);
        for (std::size_t i = 0; i < lc->weights.size(); ++i) weights[i] = lc->weights[i];
        offset = lc->offset;
        return true;
    }
    if (auto* wc = std::get_if<WindowAggregateClaim>(&claim)) {
        weights.assign(n, 0.0);
        for (int k = 0; k < wc->window; ++k) {
            weights[wc->left_start + k] -= 1.0;
            weights[wc->right_start + k] += 1.0;
        }
        offset = 0;
        return true;
    }
    return false;
}

inline double relative_strength(double x, double y) { return x - y; }

struct ClaimSystem {
    Claim original;
    std::vector<Claim> perturbations;
    std::vector<double> sensibilities; // nonnegative, sum to 1
};

inline void validate_claim_system(const ClaimSystem& sys) {
    if (sys.perturbations.empty()) throw ValidationError("claim system needs at least one perturbation");
    if (sys.sensibilities.size() != sys.perturbations.size())
        throw ValidationError("claim system has " + std::to_string(sys.perturbations.size()) +
                              " perturbations but " + std::to_string(sys.sensibilities.size()) +
                              " sensibilities");
    double sum = 0;
    for (double s : sys.sensibilities) {
        if (s < 0) throw ValidationError("negative sensibility");
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ValidationError("sensibilities sum to " + std::to_string(sum) + ", expected 1");
}

// All same-shape time shifts of a window claim that fit in n objects, in
// increasing end-index order. The original shape is excluded unless requested.
// `count` asks for that many claims; fewer available is an error, more are
// truncated from the front (earliest end first).
inline std::vector<WindowAggregateClaim> window_perturbations(const WindowAggregateClaim& spec, int n,
                                                              int count, bool include_original = false) {
    if (count < 0) throw ValidationError("window_perturbations: negative count");
    if (count == 0) return {};
    std::vector<WindowAggregateClaim> all;
    int lag = spec.right_start - spec.left_start;
    int lo = std::min(0, lag), hi = std::max(0, lag);
    // shift s places left_start at s - min(0,lag) ... keep both windows in range
    for (int start = -lo; start + hi + spec.window <= n; ++start) {
        WindowAggregateClaim c = spec;
        c.left_start = start;
        c.right_start = start + lag;
        if (!include_original && c.left_start == spec.left_start) continue;
        all.push_back(c);
    }
    std::sort(all.begin(), all.end(), [](const WindowAggregateClaim& a, const WindowAggregateClaim& b) {
        return a.end_index() < b.end_index();
    });
    if (static_cast<int>(all.size()) < count)
        throw ValidationError("window_perturbations: only " + std::to_string(all.size()) +
                              " shifts fit in " + std::to_string(n) + " objects, " +
                              std::to_string(count) + " requested");
    all.resize(count);
    return all;
}

inline std::vector<double> sensibility_exp_decay(const std::vector<double>& distances, double rate) {
    if (distances.empty()) throw ValidationError("sensibility_exp_decay: empty distance list");
    if (!(rate > 0)) throw ValidationError("sensibility_exp_decay: rate must be positive");
    std::vector<double> s(distances.size());
    double sum = 0;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        s[i] = std::exp(-rate * distances[i]);
        sum += s[i];
    }
    for (double& v : s) v /= sum;
    return s;
}

} // namespace uclean
