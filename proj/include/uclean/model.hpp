#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "common.hpp"

namespace uclean {

struct DiscreteDist {
    // (value, probability), values strictly increasing, probabilities sum to 1
    std::vector<std::pair<double, double>> support;

    double mean() const {
        double m = 0;
        for (auto& [v, p] : support) m += v * p;
        return m;
    }
    double variance() const {
        double m = mean(), s = 0;
        for (auto& [v, p] : support) s += p * (v - m) * (v - m);
        return s;
    }
    bool point_mass() const { return support.size() == 1; }
};

struct NormalSpec {
    double mean = 0;
    double stddev = 0; // 0 denotes a point mass
};

using Dist = std::variant<DiscreteDist, NormalSpec>;

inline double variance(const Dist& d) {
    if (auto* n = std::get_if<NormalSpec>(&d)) return n->stddev * n->stddev;
    return std::get<DiscreteDist>(d).variance();
}

inline double dist_mean(const Dist& d) {
    if (auto* n = std::get_if<NormalSpec>(&d)) return n->mean;
    return std::get<DiscreteDist>(d).mean();
}

inline bool is_point_mass(const Dist& d) {
    if (auto* n = std::get_if<NormalSpec>(&d)) return n->stddev == 0;
    return std::get<DiscreteDist>(d).point_mass();
}

inline bool is_discrete(const Dist& d) { return std::holds_alternative<DiscreteDist>(d); }

struct UncertainObject {
    std::string id;
    double current_value = 0;
    double cost = 1;
    Dist dist;
};

struct Dataset {
    std::vector<UncertainObject> objects;
    // Optional covariance matrix (dependency mode); absence asserts independence.
    std::optional<std::vector<std::vector<double>>> covariance;

    std::size_t size() const { return objects.size(); }

    int index_of(const std::string& id) const {
        for (std::size_t i = 0; i < objects.size(); ++i)
            if (objects[i].id == id) return static_cast<int>(i);
        return -1;
    }

    std::vector<double> current_values() const {
        std::vector<double> u;
        u.reserve(objects.size());
        for (auto& o : objects) u.push_back(o.current_value);
        return u;
    }

    double total_cost() const {
        double t = 0;
        for (auto& o : objects) t += o.cost;
        return t;
    }
};

struct Realization {
    std::map<int, double> assignment; // object index -> realized value
    double probability = 1.0;
};

constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

// Streams all joint realizations of the given objects (lexicographic by object
// index, then support index). Requires discrete members and independence.
inline void for_each_realization(const Dataset& dataset, const std::vector<int>& subset,
                                 const std::function<void(const std::vector<double>&, double)>& fn,
                                 std::uint64_t cap = kDefaultEnumerationCap) {
    if (dataset.covariance)
        throw ValidationError("enumerate_realizations requires an independent dataset");
    std::vector<int> idx(subset);
    std::sort(idx.begin(), idx.end());
    std::uint64_t states = 1;
    for (int i : idx) {
        if (i < 0 || i >= static_cast<int>(dataset.size()))
            throw ValidationError("enumerate_realizations: object index out of range: " + std::to_string(i));
        const Dist& d = dataset.objects[i].dist;
        if (!is_discrete(d))
            throw ValidationError("enumerate_realizations: object '" + dataset.objects[i].id +
                                  "' has a continuous distribution; discretize it first");
        states *= std::get<DiscreteDist>(d).support.size();
        if (states > cap)
            throw CapExceededError("enumeration would produce at least " + std::to_string(states) +
                                   " states, above the cap of " + std::to_string(cap));
    }
    std::vector<double> values(idx.size());
    std::function<void(std::size_t, double)> rec = [&](std::size_t k, double prob) {
        if (k == idx.size()) {
            fn(values, prob);
            return;
        }
        for (auto& [v, p] : std::get<DiscreteDist>(dataset.objects[idx[k]].dist).support) {
            values[k] = v;
            rec(k + 1, prob * p);
        }
    };
    rec(0, 1.0);
}

inline std::vector<Realization> enumerate_realizations(const Dataset& dataset,
                                                       const std::vector<int>& subset,
                                                       std::uint64_t cap = kDefaultEnumerationCap) {
    std::vector<int> idx(subset);
    std::sort(idx.begin(), idx.end());
    std::vector<Realization> out;
    for_each_realization(dataset, idx, [&](const std::vector<double>& vals, double prob) {
        Realization r;
        r.probability = prob;
        for (std::size_t k = 0; k < idx.size(); ++k) r.assignment[idx[k]] = vals[k];
        out.push_back(std::move(r));
    }, cap);
    return out;
}

// Pins every assigned object to a point mass at its assigned value.
inline Dataset condition(const Dataset& dataset, const Realization& assignment) {
    Dataset out = dataset;
    for (auto& [i, v] : assignment.assignment) {
        if (i < 0 || i >= static_cast<int>(out.size()))
            throw ValidationError("condition: object index out of range: " + std::to_string(i));
        UncertainObject& o = out.objects[i];
        if (auto* dd = std::get_if<DiscreteDist>(&o.dist)) {
            bool found = false;
            for (auto& [val, p] : dd->support)
                if (val == v) { found = true; break; }
            if (!found)
                throw ValidationError("condition: value " + std::to_string(v) +
                                      " is not in the support of object '" + o.id + "'");
        }
        o.dist = DiscreteDist{{{v, 1.0}}};
    }
    return out;
}

// Equal-probability stratification with conditional-mean representatives.
// Mean-preserving; variance never exceeds the normal's.
inline DiscreteDist discretize_normal(const NormalSpec& spec, int points) {
    if (points < 1) throw ValidationError("discretize_normal: points must be >= 1");
    if (spec.stddev == 0 || points == 1) return DiscreteDist{{{spec.mean, 1.0}}};
    DiscreteDist out;
    out.support.reserve(points);
    double prev_z = -INFINITY, prev_pdf = 0; // pdf at -inf
    for (int j = 1; j <= points; ++j) {
        double z = (j == points) ? INFINITY : normal_quantile(static_cast<double>(j) / points);
        double pdf = (j == points) ? 0 : normal_pdf(z);
        // E[Z | a < Z < b] = (pdf(a) - pdf(b)) / (1/points)
        double cond_mean = (prev_pdf - pdf) * points;
        out.support.emplace_back(spec.mean + spec.stddev * cond_mean, 1.0 / points);
        prev_z = z;
        prev_pdf = pdf;
    }
    (void)prev_z;
    return out;
}

inline std::vector<std::string> validate_dataset(const Dataset& dataset) {
    std::vector<std::string> errors;
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& o = dataset.objects[i];
        if (++seen[o.id] == 2) errors.push_back("duplicate object id '" + o.id + "'");
        if (!(o.cost > 0))
            errors.push_back("object '" + o.id + "' has non-positive cost " + std::to_string(o.cost));
        if (auto* dd = std::get_if<DiscreteDist>(&o.dist)) {
            if (dd->support.empty()) {
                errors.push_back("object '" + o.id + "' has an empty support");
                continue;
            }
            double sum = 0;
            for (auto& [v, p] : dd->support) {
                sum += p;
                if (p < 0 || p > 1)
                    errors.push_back("object '" + o.id + "' has probability " + std::to_string(p) +
                                     " outside [0,1]");
            }
            if (std::abs(sum - 1.0) > 1e-12)
                errors.push_back("object '" + o.id + "' probabilities sum to " + std::to_string(sum) +
                                 " (off by " + std::to_string(sum - 1.0) + ")");
            for (std::size_t k = 1; k < dd->support.size(); ++k)
                if (!(dd->support[k - 1].first < dd->support[k].first)) {
                    errors.push_back("object '" + o.id + "' support values not strictly increasing");
                    break;
                }
        } else {
            auto& n = std::get<NormalSpec>(o.dist);
            if (n.stddev < 0)
                errors.push_back("object '" + o.id + "' has negative stddev " + std::to_string(n.stddev));
        }
    }
    if (dataset.covariance) {
        const auto& c = *dataset.covariance;
        std::size_t n = dataset.size();
        if (c.size() != n) {
            errors.push_back("covariance matrix has " + std::to_string(c.size()) + " rows, expected " +
                             std::to_string(n));
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                if (c[i].size() != n) {
                    errors.push_back("covariance row " + std::to_string(i) + " has wrong length");
                    continue;
                }
                double var = variance(dataset.objects[i].dist);
                if (std::abs(c[i][i] - var) > 1e-9)
                    errors.push_back("covariance diagonal [" + std::to_string(i) + "] = " +
                                     std::to_string(c[i][i]) + " does not match object variance " +
                                     std::to_string(var));
                for (std::size_t j = i + 1; j < n; ++j)
                    if (c[j].size() == n && std::abs(c[i][j] - c[j][i]) > 1e-12) {
                        errors.push_back("covariance matrix not symmetric at (" + std::to_string(i) +
                                         "," + std::to_string(j) + ")");
                    }
            }
        }
    }
    return errors;
}

} // namespace uclean
