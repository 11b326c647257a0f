#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "datagen.hpp"
#include "evar.hpp"
#include "io.hpp"
#include "maxpr.hpp"
#include "model.hpp"
#include "quality.hpp"
#include "solvers.hpp"

namespace uclean {

enum class ObjectiveKind { MinVar, MaxPr };

inline ObjectiveKind parse_objective(const std::string& s) {
    if (s == "minvar") return ObjectiveKind::MinVar;
    if (s == "maxpr") return ObjectiveKind::MaxPr;
    throw ValidationError("unknown objective '" + s + "' (expected minvar|maxpr)");
}

struct ProblemInstance {
    Dataset dataset;
    QueryFunction query;
    double tau = 0;
    double epsilon = 0.5;
    std::uint64_t seed = 0;
    int mc_samples = 20'000;
};

// Evenly spaced budgets over [0, total cost].
inline std::vector<double> budget_grid(double total, int points = 101) {
    if (points < 1) throw ValidationError("budget grid needs at least one point");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = points == 1 ? total : total * i / (points - 1);
    return g;
}

// Shared oracles so sweep cells reuse cached evaluations.
struct Oracles {
    std::shared_ptr<EvarEvaluator> evar;
    std::shared_ptr<MaxPrEvaluator> maxpr;

    explicit Oracles(const ProblemInstance& inst) {
        evar = std::make_shared<EvarEvaluator>(inst.query, inst.dataset,
                                               EvarOptions{kDefaultEnumerationCap, inst.mc_samples,
                                                           inst.seed});
        maxpr = std::make_shared<MaxPrEvaluator>(inst.query, inst.dataset, inst.tau);
    }
};

// Independent recomputation of the achieved objective for a chosen set.
inline double recompute_objective(Oracles& oracles, ObjectiveKind objective,
                                  const std::vector<int>& chosen) {
    if (objective == ObjectiveKind::MinVar) return oracles.evar->evar(chosen);
    return oracles.maxpr->prob(chosen);
}

// Variance-mass knapsack weights a_i^2 Var(X_i) of a linear query.
inline std::vector<double> modular_weights(const QueryFunction& query, const Dataset& dataset) {
    if (!query.linear())
        throw SolverError("this algorithm needs a linear query function (measure 'bias' over "
                          "linear or window claims)");
    int n = static_cast<int>(dataset.size());
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        double a = (*query.linear_weights)[i];
        w[i] = a * a * variance(dataset.objects[i].dist);
    }
    return w;
}

inline CleaningPlan solve(const std::string& algorithm, const ProblemInstance& inst,
                          Oracles& oracles, ObjectiveKind objective, double budget) {
    const Dataset& ds = inst.dataset;
    std::vector<double> costs = dataset_costs(ds);
    if (algorithm == "greedy-naive") return greedy_naive(inst.query, ds, budget, false);
    if (algorithm == "greedy-naive-cost-blind") return greedy_naive(inst.query, ds, budget, true);
    if (algorithm == "greedy-minvar") {
        if (ds.covariance) {
            // dependency-blind: plans from per-object variance mass only
            auto w = modular_weights(inst.query, ds);
            CleaningPlan plan = greedy([&](int i, const std::vector<int>&) { return w[i]; }, costs,
                                       budget, "greedy-minvar");
            plan.objective_value = oracles.evar->evar(plan.chosen);
            return plan;
        }
        return greedy_minvar(*oracles.evar, budget);
    }
    if (algorithm == "greedy-maxpr") return greedy_maxpr(*oracles.maxpr, ds, budget);
    if (algorithm == "greedy-dep") {
        if (!ds.covariance) throw SolverError("greedy-dep needs a covariance matrix");
        if (!inst.query.linear()) throw SolverError("greedy-dep needs a linear query function");
        return greedy_dep(*inst.query.linear_weights, *ds.covariance, costs, budget);
    }
    if (algorithm == "dp") {
        if (objective == ObjectiveKind::MaxPr) {
            auto w = modular_weights(inst.query, ds);
            return modular_maxpr(w, costs, budget, inst.tau);
        }
        return modular_minvar_exact(modular_weights(inst.query, ds), costs, budget);
    }
    if (algorithm == "fptas") {
        auto w = modular_weights(inst.query, ds);
        if (objective == ObjectiveKind::MaxPr) {
            CleaningPlan plan = knapsack_fptas(w, costs, budget, inst.epsilon);
            plan.algorithm = "modular-maxpr-fptas";
            plan.objective_value = oracles.maxpr->prob(plan.chosen);
            return plan;
        }
        CleaningPlan plan = knapsack_fptas(w, costs, budget, inst.epsilon);
        plan.objective_value = oracles.evar->evar(plan.chosen);
        return plan;
    }
    if (algorithm == "submodular-best") {
        if (objective != ObjectiveKind::MinVar)
            throw SolverError("submodular-best applies to the minvar objective only");
        return submodular_best(*oracles.evar, budget);
    }
    if (algorithm == "bruteforce") {
        CleaningPlan plan = bruteforce_opt(
            [&](const std::vector<int>& T) { return recompute_objective(oracles, objective, T); },
            costs, budget, objective == ObjectiveKind::MaxPr);
        plan.objective_value = recompute_objective(oracles, objective, plan.chosen);
        return plan;
    }
    throw ValidationError("unknown algorithm '" + algorithm + "'");
}

struct SweepRow {
    std::string algorithm;
    double budget = 0;
    double budget_fraction = 0;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    int plan_size = 0;
    double seconds = 0;
    std::string error; // empty on success
};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "algorithm,budget,budget_fraction,objective_value,plan_size,seconds\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.algorithm << ',' << r.budget << ',' << r.budget_fraction << ','
           << r.objective_value << ',' << r.plan_size << ',' << r.seconds << '\n';
}

// One row per (algorithm, budget): plan, independently recomputed objective,
// wall time. Cells run on a bounded worker pool; row order is deterministic.
inline std::vector<SweepRow> run_sweep(const ProblemInstance& inst,
                                       const std::vector<std::string>& algorithms,
                                       const std::vector<double>& budgets,
                                       ObjectiveKind objective, int workers = 0) {
    Oracles oracles(inst);
    double total = inst.dataset.total_cost();
    for (double b : budgets)
        if (b < 0 || b > total + 1e-9)
            throw ValidationError("budget " + std::to_string(b) + " outside [0, total cost]");
    std::vector<SweepRow> rows(algorithms.size() * budgets.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t cell = next.fetch_add(1);
            if (cell >= rows.size()) return;
            const std::string& alg = algorithms[cell / budgets.size()];
            double budget = budgets[cell % budgets.size()];
            SweepRow& row = rows[cell];
            row.algorithm = alg;
            row.budget = budget;
            row.budget_fraction = total > 0 ? budget / total : 0;
            auto t0 = std::chrono::steady_clock::now();
            try {
                CleaningPlan plan = solve(alg, inst, oracles, objective, budget);
                row.objective_value = recompute_objective(oracles, objective, plan.chosen);
                row.plan_size = static_cast<int>(plan.chosen.size());
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    if (workers <= 0)
        workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return rows;
}

// Conditional mean and variance of the query after revealing `assignment`.
// Enumerates discrete remainders; independent normals need a linear query.
inline std::pair<double, double> conditional_moments(const QueryFunction& query,
                                                     const Dataset& dataset,
                                                     const Realization& assignment,
                                                     std::uint64_t cap = kDefaultEnumerationCap) {
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
    bool any_normal = false;
    for (int i : free)
        if (!is_discrete(dataset.objects[i].dist)) any_normal = true;
    if (any_normal) {
        if (!query.linear())
            throw ValidationError("posterior over normal remainders needs a linear query");
        for (int i : free) work[i] = dist_mean(dataset.objects[i].dist);
        double mean = query(work), var = 0;
        for (int i : free) {
            double a = (*query.linear_weights)[i];
            var += a * a * variance(dataset.objects[i].dist);
        }
        return {mean, var};
    }
    detail::state_count(dataset, free, cap);
    double e = 0, e2 = 0;
    detail::scan(dataset, free, work, [&](double p) {
        double f = query(work);
        e += p * f;
        e2 += p * f * f;
    });
    return {e, std::max(0.0, e2 - e * e)};
}

struct SimulationRow {
    std::string algorithm;
    double budget = 0;
    double posterior_mean = 0;
    double posterior_std = 0;
};

inline void write_simulation_csv(std::ostream& os, const std::vector<SimulationRow>& rows) {
    os << "algorithm,budget,posterior_mean,posterior_std\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.algorithm << ',' << r.budget << ',' << r.posterior_mean << ',' << r.posterior_std
           << '\n';
}

inline std::vector<double> draw_truths(const Dataset& dataset, std::uint64_t truth_seed,
                                       int repetition = 0) {
    std::vector<double> t(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        CounterRng rng(truth_seed, field_stream(i, 1000 + repetition));
        const Dist& d = dataset.objects[i].dist;
        if (auto* ns = std::get_if<NormalSpec>(&d)) {
            t[i] = ns->stddev == 0 ? ns->mean : rng.normal(ns->mean, ns->stddev);
        } else {
            const auto& sup = std::get<DiscreteDist>(d).support;
            double u = rng.next_double(), acc = 0;
            t[i] = sup.back().first;
            for (auto& [v, p] : sup) {
                acc += p;
                if (u < acc) {
                    t[i] = v;
                    break;
                }
            }
        }
    }
    return t;
}

// Effectiveness in action: plans are made under uncertainty, the chosen
// objects' true values are revealed, and the posterior quality is tracked.
// Means and stds are averaged over repetitions.
inline std::vector<SimulationRow> simulate(const ProblemInstance& inst,
                                           const std::vector<std::string>& algorithms,
                                           const std::vector<double>& budgets,
                                           ObjectiveKind objective, std::uint64_t truth_seed,
                                           int repetitions = 1) {
    if (repetitions < 1) throw ValidationError("simulate needs repetitions >= 1");
    Oracles oracles(inst);
    std::vector<SimulationRow> rows;
    for (const auto& alg : algorithms) {
        for (double budget : budgets) {
            CleaningPlan plan = solve(alg, inst, oracles, objective, budget);
            double mean_sum = 0, std_sum = 0;
            for (int rep = 0; rep < repetitions; ++rep) {
                std::vector<double> truths = draw_truths(inst.dataset, truth_seed, rep);
                Realization revealed;
                for (int i : plan.chosen) revealed.assignment[i] = truths[i];
                auto [mean, var] = conditional_moments(inst.query, inst.dataset, revealed);
                mean_sum += mean;
                std_sum += std::sqrt(var);
            }
            rows.push_back({alg, budget, mean_sum / repetitions, std_sum / repetitions});
        }
    }
    return rows;
}

// First budget at which revealing the plan's true values drops the query below
// its current value minus tau; NaN if no budget in the grid succeeds.
inline double first_counter_budget(const ProblemInstance& inst, const std::string& algorithm,
                                   const std::vector<double>& budgets, ObjectiveKind objective,
                                   std::uint64_t truth_seed) {
    Oracles oracles(inst);
    std::vector<double> truths = draw_truths(inst.dataset, truth_seed);
    std::vector<double> work = inst.dataset.current_values();
    double threshold = inst.query(work) - inst.tau;
    for (double budget : budgets) {
        CleaningPlan plan = solve(algorithm, inst, oracles, objective, budget);
        std::vector<double> values = inst.dataset.current_values();
        for (int i : plan.chosen) values[i] = truths[i];
        if (inst.query(values) < threshold) return budget;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct CompareRow {
    double budget = 0;
    double minvar_residual = 0;
    double minvar_probability = 0;
    double maxpr_residual = 0;
    double maxpr_probability = 0;
};

inline void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
    os << "budget,minvar_residual,minvar_probability,maxpr_residual,maxpr_probability\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.budget << ',' << r.minvar_residual << ',' << r.minvar_probability << ','
           << r.maxpr_residual << ',' << r.maxpr_probability << '\n';
}

// Competing objectives: score each objective's plan under both metrics.
inline std::vector<CompareRow> compare_objectives(const ProblemInstance& inst,
                                                  const std::vector<double>& budgets,
                                                  const std::string& minvar_algorithm = "dp",
                                                  const std::string& maxpr_algorithm = "greedy-maxpr") {
    Oracles oracles(inst);
    std::vector<CompareRow> rows;
    for (double budget : budgets) {
        CleaningPlan pv = solve(minvar_algorithm, inst, oracles, ObjectiveKind::MinVar, budget);
        CleaningPlan pp = solve(maxpr_algorithm, inst, oracles, ObjectiveKind::MaxPr, budget);
        CompareRow row;
        row.budget = budget;
        row.minvar_residual = oracles.evar->evar(pv.chosen);
        row.minvar_probability = oracles.maxpr->prob(pv.chosen);
        row.maxpr_residual = oracles.evar->evar(pp.chosen);
        row.maxpr_probability = oracles.maxpr->prob(pp.chosen);
        rows.push_back(row);
    }
    return rows;
}

struct Ingested {
    Dataset dataset;
    ClaimSystem system;
    QualityMeasure measure;
    QueryFunction query;
    double tau = 0;
    std::vector<std::string> warnings;
};

inline Ingested ingest(const std::string& dataset_path, const std::string& claims_path,
                       MeasureKind kind, const std::string& covariance_path = "") {
    Ingested out;
    out.dataset = read_dataset_csv(dataset_path);
    if (!covariance_path.empty()) {
        std::ifstream f(covariance_path);
        if (!f) throw ValidationError("cannot open covariance file '" + covariance_path + "'");
        out.dataset.covariance = read_covariance_csv(f, static_cast<int>(out.dataset.size()));
        auto errors = validate_dataset(out.dataset);
        if (!errors.empty()) {
            std::string msg = "covariance validation failed:";
            for (auto& e : errors) msg += "\n  - " + e;
            throw ValidationError(msg);
        }
    }
    ClaimsFile cf = read_claims_json(claims_path, static_cast<int>(out.dataset.size()));
    out.system = cf.system;
    out.measure = QualityMeasure(kind, cf.system, out.dataset.current_values());
    out.query = measure_query(out.measure, static_cast<int>(out.dataset.size()));
    out.tau = cf.tau;
    out.warnings = cf.warnings;
    if (!cf.tau_given) out.warnings.push_back("no tau in claims file; defaulting to 0");
    return out;
}

} // namespace uclean
