#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "evar.hpp"
#include "maxpr.hpp"
#include "model.hpp"

namespace uclean {

struct PlanStep {
    int index = -1;
    double benefit = 0;
    double cost = 0;
};

struct CleaningPlan {
    std::vector<int> chosen; // selection order
    double total_cost = 0;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    std::string algorithm;
    bool approximate = false;
    std::string note;
    std::vector<PlanStep> trace;

    bool contains(int i) const { return std::find(chosen.begin(), chosen.end(), i) != chosen.end(); }
    std::vector<int> sorted() const {
        std::vector<int> s = chosen;
        std::sort(s.begin(), s.end());
        return s;
    }
};

// Greedy template: repeatedly take the affordable object with the best
// benefit/cost ratio, then swap in the best affordable singleton if it alone
// beats everything chosen. Ties break to the lowest index.
inline CleaningPlan greedy(const std::function<double(int, const std::vector<int>&)>& benefit,
                           const std::vector<double>& costs, double budget,
                           std::string name = "greedy", bool stop_on_nonpositive = false) {
    if (budget < 0) throw ValidationError("greedy: negative budget");
    int n = static_cast<int>(costs.size());
    CleaningPlan plan;
    plan.algorithm = std::move(name);
    std::vector<char> in(n, 0);
    double benefit_sum = 0;
    for (;;) {
        int best = -1;
        double best_ratio = 0, best_benefit = 0;
        for (int i = 0; i < n; ++i) {
            if (in[i] || costs[i] > budget - plan.total_cost) continue;
            double b = benefit(i, plan.chosen);
            double ratio = b / costs[i];
            if (best < 0 || ratio > best_ratio) {
                best = i;
                best_ratio = ratio;
                best_benefit = b;
            }
        }
        if (best < 0) break;
        if (stop_on_nonpositive && best_benefit <= 0) break;
        in[best] = 1;
        plan.chosen.push_back(best);
        plan.total_cost += costs[best];
        plan.trace.push_back({best, best_benefit, costs[best]});
        benefit_sum += best_benefit;
    }
    // 2-approximation check: best affordable single object vs the whole pick
    int single = -1;
    double single_benefit = 0;
    for (int i = 0; i < n; ++i) {
        if (in[i] || costs[i] > budget) continue;
        double b = benefit(i, {});
        if (single < 0 || b > single_benefit) {
            single = i;
            single_benefit = b;
        }
    }
    if (single >= 0 && single_benefit > benefit_sum) {
        plan.chosen = {single};
        plan.total_cost = costs[single];
        plan.trace = {{single, single_benefit, costs[single]}};
    }
    return plan;
}

inline std::vector<double> dataset_costs(const Dataset& ds) {
    std::vector<double> c;
    c.reserve(ds.size());
    for (auto& o : ds.objects) c.push_back(o.cost);
    return c;
}

// beta(o_i) = Var(X_i) for objects the query reads, 0 otherwise.
inline CleaningPlan greedy_naive(const QueryFunction& query, const Dataset& dataset, double budget,
                                 bool cost_blind = false) {
    int n = static_cast<int>(dataset.size());
    std::vector<double> var(n, 0.0);
    for (int i : query.support(n)) var[i] = variance(dataset.objects[i].dist);
    std::vector<double> costs = dataset_costs(dataset);
    if (!cost_blind)
        return greedy([&](int i, const std::vector<int>&) { return var[i]; }, costs, budget,
                      "greedy-naive");
    // descending variance, ignoring cost in the ordering
    CleaningPlan plan;
    plan.algorithm = "greedy-naive-cost-blind";
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return var[a] > var[b]; });
    for (int i : order) {
        if (costs[i] > budget - plan.total_cost) continue;
        plan.chosen.push_back(i);
        plan.total_cost += costs[i];
        plan.trace.push_back({i, var[i], costs[i]});
    }
    return plan;
}

inline CleaningPlan greedy_minvar(EvarEvaluator& ev, double budget) {
    std::vector<double> costs = dataset_costs(ev.dataset());
    CleaningPlan plan = greedy(
        [&](int i, const std::vector<int>& T) { return ev.marginal_gain(T, i); }, costs, budget,
        "greedy-minvar");
    plan.objective_value = ev.evar(plan.chosen);
    plan.approximate = ev.approximate();
    return plan;
}

inline CleaningPlan greedy_maxpr(MaxPrEvaluator& mp, const Dataset& dataset, double budget) {
    std::vector<double> costs = dataset_costs(dataset);
    CleaningPlan plan = greedy(
        [&](int i, const std::vector<int>& T) {
            std::vector<int> with = T;
            with.push_back(i);
            return mp.prob(with) - mp.prob(T);
        },
        costs, budget, "greedy-maxpr", /*stop_on_nonpositive=*/true);
    plan.objective_value = mp.prob(plan.chosen);
    return plan;
}

namespace detail {

inline bool integral_costs(const std::vector<double>& costs) {
    for (double c : costs)
        if (std::abs(c - std::round(c)) > 1e-9) return false;
    return true;
}

// Exact 0/1 max-knapsack over integer costs. Returns chosen indices.
inline std::vector<int> knapsack_dp(const std::vector<double>& values, const std::vector<double>& costs,
                                    double budget) {
    int n = static_cast<int>(values.size());
    int B = static_cast<int>(std::floor(budget + 1e-9));
    if (B < 0) B = 0;
    std::vector<std::vector<double>> dp(n + 1, std::vector<double>(B + 1, 0.0));
    for (int i = 1; i <= n; ++i) {
        int ci = static_cast<int>(std::llround(costs[i - 1]));
        double vi = std::max(values[i - 1], 0.0);
        for (int c = 0; c <= B; ++c) {
            dp[i][c] = dp[i - 1][c];
            if (ci <= c && values[i - 1] > 0 && dp[i - 1][c - ci] + vi > dp[i][c])
                dp[i][c] = dp[i - 1][c - ci] + vi;
        }
    }
    std::vector<int> chosen;
    int c = B;
    for (int i = n; i >= 1; --i) {
        int ci = static_cast<int>(std::llround(costs[i - 1]));
        if (ci <= c && values[i - 1] > 0 &&
            dp[i][c] == dp[i - 1][c - ci] + std::max(values[i - 1], 0.0) && dp[i][c] > dp[i - 1][c]) {
            chosen.push_back(i - 1);
            c -= ci;
        }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

} // namespace detail

// Exact pseudo-polynomial knapsack for modular MinVar: maximize the cleaned
// variance mass sum w_i over T with integer costs. Objective reported as the
// residual variance sum(w) - gained.
inline CleaningPlan modular_minvar_exact(const std::vector<double>& weights,
                                         const std::vector<double>& costs, double budget) {
    if (!detail::integral_costs(costs))
        throw SolverError("modular_minvar_exact needs integer costs; use knapsack_fptas or "
                          "--cost-scale to round costs first");
    CleaningPlan plan;
    plan.algorithm = "modular-minvar-dp";
    plan.chosen = detail::knapsack_dp(weights, costs, budget);
    double total = 0, gained = 0;
    for (double w : weights) total += w;
    for (int i : plan.chosen) {
        plan.total_cost += costs[i];
        gained += weights[i];
        plan.trace.push_back({i, weights[i], costs[i]});
    }
    plan.objective_value = total - gained;
    return plan;
}

// (1-eps)-approximate knapsack by value scaling: v'_i = floor(v_i * n / (eps * vmax)),
// then an exact DP over scaled values with real costs.
inline CleaningPlan knapsack_fptas(const std::vector<double>& values, const std::vector<double>& costs,
                                   double budget, double epsilon) {
    if (!(epsilon > 0 && epsilon < 1)) throw ValidationError("knapsack_fptas: epsilon must be in (0,1)");
    int n = static_cast<int>(values.size());
    CleaningPlan plan;
    plan.algorithm = "knapsack-fptas";
    plan.approximate = true;
    double vmax = 0;
    for (int i = 0; i < n; ++i)
        if (costs[i] <= budget) vmax = std::max(vmax, values[i]);
    if (vmax <= 0) {
        plan.objective_value = 0;
        return plan;
    }
    std::vector<long long> scaled(n, 0);
    long long vtotal = 0;
    for (int i = 0; i < n; ++i) {
        if (values[i] > 0) scaled[i] = static_cast<long long>(std::floor(values[i] * n / (epsilon * vmax)));
        vtotal += scaled[i];
    }
    const double INF = std::numeric_limits<double>::infinity();
    // min_cost[v] = cheapest way to reach scaled value v
    std::vector<std::vector<double>> min_cost(n + 1, std::vector<double>(vtotal + 1, INF));
    min_cost[0][0] = 0;
    for (int i = 1; i <= n; ++i) {
        for (long long v = 0; v <= vtotal; ++v) {
            min_cost[i][v] = min_cost[i - 1][v];
            if (v >= scaled[i - 1] && min_cost[i - 1][v - scaled[i - 1]] + costs[i - 1] < min_cost[i][v])
                min_cost[i][v] = min_cost[i - 1][v - scaled[i - 1]] + costs[i - 1];
        }
    }
    long long best_v = 0;
    for (long long v = 0; v <= vtotal; ++v)
        if (min_cost[n][v] <= budget + 1e-12) best_v = v;
    long long v = best_v;
    std::vector<int> chosen;
    for (int i = n; i >= 1; --i) {
        if (min_cost[i][v] < min_cost[i - 1][v]) {
            chosen.push_back(i - 1);
            v -= scaled[i - 1];
        }
    }
    std::sort(chosen.begin(), chosen.end());
    double value_sum = 0;
    for (int i : chosen) {
        plan.total_cost += costs[i];
        value_sum += values[i];
        plan.trace.push_back({i, values[i], costs[i]});
    }
    plan.chosen = chosen;
    plan.objective_value = value_sum;
    return plan;
}

// Modular MaxPr: maximize S = sum_{i in T} a_i^2 sigma_i^2 (exact DP on integer
// costs, FPTAS otherwise), then report Phi(-tau/sqrt(S)). Probabilities below
// 0.05 are flagged as effectively zero.
inline CleaningPlan modular_maxpr(const std::vector<double>& weights_sq_sigma_sq,
                                  const std::vector<double>& costs, double budget, double tau,
                                  double epsilon = 0.75) {
    CleaningPlan plan;
    if (detail::integral_costs(costs)) {
        plan.chosen = detail::knapsack_dp(weights_sq_sigma_sq, costs, budget);
        plan.algorithm = "modular-maxpr-dp";
        for (int i : plan.chosen) {
            plan.total_cost += costs[i];
            plan.trace.push_back({i, weights_sq_sigma_sq[i], costs[i]});
        }
    } else {
        plan = knapsack_fptas(weights_sq_sigma_sq, costs, budget, epsilon);
        plan.algorithm = "modular-maxpr-fptas";
    }
    double s = 0;
    for (int i : plan.chosen) s += weights_sq_sigma_sq[i];
    double p = 0;
    if (s > 0)
        p = normal_cdf(-tau / std::sqrt(s));
    else if (tau == 0)
        throw SolverError("modular_maxpr is ill-posed with tau = 0 and zero selectable variance");
    plan.objective_value = p;
    if (p < 0.05) plan.note = "below-threshold"; // deviation effectively unreachable
    return plan;
}

namespace detail {

// min sum m_j over S with cost(S) >= required; exact via complement knapsack.
inline std::vector<int> min_cover_knapsack(const std::vector<double>& m,
                                           const std::vector<double>& costs, double required) {
    int n = static_cast<int>(m.size());
    double total = 0;
    for (double c : costs) total += c;
    double budget = total - required; // complement may cost at most this
    std::vector<int> rest;
    if (budget < 0) throw SolverError("min_cover_knapsack: cover requirement exceeds total cost");
    if (integral_costs(costs)) {
        rest = knapsack_dp(m, costs, budget);
    } else if (n <= 20) {
        double best = -1;
        std::uint32_t best_mask = 0;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            double c = 0, v = 0;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) {
                    c += costs[i];
                    v += m[i];
                }
            if (c <= budget + 1e-12 && v > best) {
                best = v;
                best_mask = mask;
            }
        }
        for (int i = 0; i < n; ++i)
            if (best_mask & (1u << i)) rest.push_back(i);
    } else {
        rest = knapsack_fptas(m, costs, budget, 0.01).chosen;
    }
    std::vector<char> out(n, 1);
    for (int i : rest) out[i] = 0;
    std::vector<int> cover;
    for (int i = 0; i < n; ++i)
        if (out[i]) cover.push_back(i);
    return cover;
}

} // namespace detail

// Complement-side solver: minimize EVarBar(Tbar) = EVar(O minus Tbar) subject
// to cost(Tbar) >= total - budget, by iterated modular upper bounds tight at
// the incumbent (singleton gains/gaps only). Returns the cleaning plan
// O minus Tbar plus the measured curvature in the note.
inline CleaningPlan submodular_best(EvarEvaluator& ev, double budget, int max_rounds = 50) {
    const Dataset& ds = ev.dataset();
    int n = static_cast<int>(ds.size());
    std::vector<double> costs = dataset_costs(ds);
    double total = 0;
    for (double c : costs) total += c;
    double required = std::max(0.0, total - budget);
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    auto complement = [&](const std::vector<int>& s) {
        std::vector<char> in(n, 0);
        for (int i : s) in[i] = 1;
        std::vector<int> out;
        for (int i = 0; i < n; ++i)
            if (!in[i]) out.push_back(i);
        return out;
    };
    auto ebar = [&](const std::vector<int>& tbar) { return ev.evar(complement(tbar)); };

    // singleton gains from the empty set: ebar({j}) - ebar({})
    double e_empty = ebar({});
    std::vector<double> gain0(n);
    for (int j = 0; j < n; ++j) gain0[j] = ebar({j}) - e_empty;

    std::vector<int> incumbent; // starts empty; first round minimizes sum of gains
    double incumbent_val = std::numeric_limits<double>::infinity();
    std::vector<int> best_tbar;
    bool have = false;
    for (int round = 0; round < max_rounds; ++round) {
        std::vector<char> in(n, 0);
        for (int i : incumbent) in[i] = 1;
        double e_inc = ebar(incumbent);
        std::vector<double> m(n);
        for (int j = 0; j < n; ++j) {
            if (in[j]) {
                std::vector<int> without;
                for (int i : incumbent)
                    if (i != j) without.push_back(i);
                m[j] = e_inc - ebar(without); // gap_j(incumbent)
            } else {
                m[j] = gain0[j];
            }
        }
        std::vector<int> candidate = detail::min_cover_knapsack(m, costs, required);
        double val = ebar(candidate);
        if (!have || val < incumbent_val - 1e-15) {
            best_tbar = candidate;
            incumbent_val = val;
            have = true;
        }
        if (round > 0 && val >= ebar(incumbent) * (1 - 1e-9) - 1e-15) break;
        incumbent = candidate;
    }
    CleaningPlan plan;
    plan.algorithm = "submodular-best";
    plan.chosen = complement(best_tbar);
    for (int i : plan.chosen) {
        plan.total_cost += costs[i];
        plan.trace.push_back({i, 0.0, costs[i]});
    }
    plan.objective_value = ev.evar(plan.chosen);
    plan.approximate = ev.approximate();
    try {
        plan.note = "kappa=" + std::to_string(curvature(ev));
    } catch (const ValidationError&) {
        plan.note = "kappa=undefined";
    }
    return plan;
}

// GreedyMinVar variant given the covariance matrix: exact decrease of the
// dependent residual variance from adding i, recomputed each round.
inline CleaningPlan greedy_dep(const std::vector<double>& weights,
                               const std::vector<std::vector<double>>& cov,
                               const std::vector<double>& costs, double budget) {
    int n = static_cast<int>(weights.size());
    auto benefit = [&](int i, const std::vector<int>& T) {
        double b = weights[i] * weights[i] * cov[i][i];
        for (int j : T) b += 2 * weights[i] * weights[j] * cov[i][j];
        return b;
    };
    CleaningPlan plan = greedy(benefit, costs, budget, "greedy-dep");
    (void)n;
    plan.objective_value = evar_linear_dependent(weights, cov, plan.chosen);
    return plan;
}

// Exhaustive optimum, n <= 25. Ties: lower objective first (per `maximize`),
// then lower cost, then lexicographically smaller index set.
inline CleaningPlan bruteforce_opt(const std::function<double(const std::vector<int>&)>& objective,
                                   const std::vector<double>& costs, double budget, bool maximize) {
    int n = static_cast<int>(costs.size());
    if (n > 25) throw SolverError("bruteforce_opt is guarded to n <= 25, got n = " + std::to_string(n));
    CleaningPlan plan;
    plan.algorithm = "bruteforce-opt";
    bool have = false;
    double best_val = 0, best_cost = 0;
    std::vector<int> best_set;
    std::vector<int> subset;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double cost = 0;
        subset.clear();
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                cost += costs[i];
                subset.push_back(i);
            }
        if (cost > budget + 1e-12) continue;
        double val = objective(subset);
        bool better = !have || (maximize ? val > best_val + 1e-15 : val < best_val - 1e-15);
        bool tie = have && std::abs(val - best_val) <= 1e-15;
        if (tie && (cost < best_cost - 1e-12 ||
                    (std::abs(cost - best_cost) <= 1e-12 && subset < best_set)))
            better = true;
        if (better) {
            have = true;
            best_val = val;
            best_cost = cost;
            best_set = subset;
        }
    }
    plan.chosen = best_set;
    plan.total_cost = best_cost;
    plan.objective_value = best_val;
    return plan;
}

inline void write_plan_csv(std::ostream& os, const CleaningPlan& plan, const Dataset& dataset) {
    os << "rank,id,cost,benefit,cumulative_cost\n";
    double cum = 0;
    int rank = 1;
    for (int idx : plan.chosen) {
        double benefit = 0, cost = dataset.objects[idx].cost;
        for (auto& step : plan.trace)
            if (step.index == idx) {
                benefit = step.benefit;
                cost = step.cost;
                break;
            }
        cum += cost;
        os << rank++ << ',' << dataset.objects[idx].id << ',' << cost << ',' << benefit << ',' << cum
           << '\n';
    }
    os << "# objective=" << plan.objective_value << " algorithm=" << plan.algorithm
       << " approximate=" << (plan.approximate ? "true" : "false") << '\n';
}

} // namespace uclean
