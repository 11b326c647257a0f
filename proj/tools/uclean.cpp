// Command-line front end: planning, objective evaluation, sweeps, simulation,
// competing-objective comparison, and synthetic data generation.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <uclean/uclean.hpp>

namespace {

using namespace uclean;

struct CommonOpts {
    std::string dataset_path;
    std::string claims_path;
    std::string covariance_path;
    std::string measure = "bias";
    std::string objective = "minvar";
    std::string algorithm = "greedy-minvar";
    std::vector<double> budgets;
    int budget_grid = 0;
    double tau = -1; // <0: take from claims file or default 0
    double epsilon = 0.5;
    std::uint64_t seed = 0;
    std::uint64_t truth_seed = 1;
    int repetitions = 100;
    int mc_samples = 20'000;
    double cost_scale = 0; // opt-in cost rounding resolution
    std::string out_path;
    std::string subset_ids;
};

void add_io_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--dataset", o.dataset_path, "dataset CSV")->required();
    cmd->add_option("--claims", o.claims_path, "claims JSON")->required();
    cmd->add_option("--covariance", o.covariance_path, "covariance sidecar CSV");
    cmd->add_option("--measure", o.measure, "bias|duplicity|fragility");
    cmd->add_option("--tau", o.tau, "deviation threshold (default: from claims file, else 0)");
    cmd->add_option("--mc-samples", o.mc_samples, "Monte Carlo sample count");
    cmd->add_option("--seed", o.seed, "run seed");
    cmd->add_option("--out", o.out_path, "output file (default stdout)");
}

ProblemInstance load_instance(CommonOpts& o, Ingested& ing) {
    ing = ingest(o.dataset_path, o.claims_path, parse_measure(o.measure), o.covariance_path);
    for (auto& w : ing.warnings) std::cerr << "warning: " << w << "\n";
    if (o.cost_scale > 0) {
        for (auto& obj : ing.dataset.objects)
            obj.cost = std::max(1.0, std::round(obj.cost / o.cost_scale));
        for (double& b : o.budgets) b = b / o.cost_scale;
        std::cerr << "note: costs rescaled to units of " << o.cost_scale << "\n";
        ing.query = measure_query(ing.measure, static_cast<int>(ing.dataset.size()));
    }
    ProblemInstance inst;
    inst.dataset = ing.dataset;
    inst.query = ing.query;
    inst.tau = o.tau >= 0 ? o.tau : ing.tau;
    if (inst.tau == 0 && o.objective == "maxpr")
        std::cerr << "warning: tau is 0; any strict decrease counts as a deviation\n";
    inst.epsilon = o.epsilon;
    inst.seed = o.seed;
    inst.mc_samples = o.mc_samples;
    return inst;
}

std::vector<double> resolve_budgets(const CommonOpts& o, const Dataset& ds) {
    if (!o.budgets.empty()) return o.budgets;
    return budget_grid(ds.total_cost(), o.budget_grid > 0 ? o.budget_grid : 101);
}

std::vector<int> resolve_subset(const std::string& ids, const Dataset& ds) {
    std::vector<int> subset;
    std::stringstream ss(ids);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        int idx = ds.index_of(tok);
        if (idx < 0) throw ValidationError("unknown object id '" + tok + "'");
        subset.push_back(idx);
    }
    return subset;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out_path);
    if (!f) throw ValidationError("cannot open output file '" + o.out_path + "'");
    f << text;
}

CostModel parse_cost_model(const std::string& s) {
    auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
        throw ValidationError("malformed cost model '" + s + "'");
    std::string kind = s.substr(0, open);
    std::vector<double> args;
    std::stringstream ss(s.substr(open + 1, s.size() - open - 2));
    std::string tok;
    while (std::getline(ss, tok, ',')) args.push_back(std::stod(tok));
    if (kind == "uniform" && args.size() == 2) return CostModel::uniform(args[0], args[1]);
    if (kind == "recency" && args.size() == 3) return CostModel::recency(args[0], args[1], args[2]);
    if (kind == "two-point" && args.size() == 2) return CostModel::two_point(args[0], args[1]);
    throw ValidationError("malformed cost model '" + s + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"budgeted cleaning planner for uncertain numeric data"};
    app.require_subcommand(1);

    CommonOpts o;

    auto* plan_cmd = app.add_subcommand("plan", "compute one cleaning plan");
    add_io_flags(plan_cmd, o);
    plan_cmd->add_option("--objective", o.objective, "minvar|maxpr");
    plan_cmd->add_option("--algorithm", o.algorithm, "solver name");
    plan_cmd->add_option("--budget", o.budgets, "cost budget")->expected(1);
    plan_cmd->add_option("--epsilon", o.epsilon, "FPTAS accuracy");
    plan_cmd->add_option("--cost-scale", o.cost_scale, "round costs to this resolution");

    auto* evar_cmd = app.add_subcommand("evar", "evaluate the MinVar objective for a subset");
    add_io_flags(evar_cmd, o);
    evar_cmd->add_option("--subset", o.subset_ids, "comma-separated object ids");

    auto* maxpr_cmd = app.add_subcommand("maxpr", "evaluate the MaxPr objective for a subset");
    add_io_flags(maxpr_cmd, o);
    maxpr_cmd->add_option("--subset", o.subset_ids, "comma-separated object ids");

    auto* sweep_cmd = app.add_subcommand("sweep", "objective vs budget for several algorithms");
    add_io_flags(sweep_cmd, o);
    sweep_cmd->add_option("--objective", o.objective, "minvar|maxpr");
    sweep_cmd->add_option("--algorithm", o.algorithm, "comma-separated solver names");
    sweep_cmd->add_option("--budget", o.budgets, "explicit budget list");
    sweep_cmd->add_option("--budget-grid", o.budget_grid, "grid points over [0,total]");
    sweep_cmd->add_option("--epsilon", o.epsilon, "FPTAS accuracy");
    sweep_cmd->add_option("--cost-scale", o.cost_scale, "round costs to this resolution");

    auto* sim_cmd = app.add_subcommand("simulate", "reveal true values and track posterior quality");
    add_io_flags(sim_cmd, o);
    sim_cmd->add_option("--objective", o.objective, "minvar|maxpr");
    sim_cmd->add_option("--algorithm", o.algorithm, "comma-separated solver names");
    sim_cmd->add_option("--budget", o.budgets, "explicit budget list");
    sim_cmd->add_option("--budget-grid", o.budget_grid, "grid points over [0,total]");
    sim_cmd->add_option("--truth-seed", o.truth_seed, "seed for hidden true values");
    sim_cmd->add_option("--repetitions", o.repetitions, "averaging repetitions");

    auto* cmp_cmd = app.add_subcommand("compare", "score each objective's plan under both metrics");
    add_io_flags(cmp_cmd, o);
    cmp_cmd->add_option("--budget", o.budgets, "explicit budget list");
    cmp_cmd->add_option("--budget-grid", o.budget_grid, "grid points over [0,total]");
    cmp_cmd->add_option("--epsilon", o.epsilon, "FPTAS accuracy");

    std::string family = "ur", cost_model = "uniform(1,10)";
    int gen_n = 10;
    double gamma = -1, std_hi = 50, cost_hi = 100;
    bool adoptions = false;
    std::string cov_out;
    auto* gen_cmd = app.add_subcommand("gen-data", "emit a synthetic dataset CSV");
    gen_cmd->add_option("--family", family, "ur|ln|sm|normal");
    gen_cmd->add_option("--n", gen_n, "object count")->required();
    gen_cmd->add_option("--seed", o.seed, "generator seed");
    gen_cmd->add_option("--cost-model", cost_model, "uniform(lo,hi)|recency(base,step,jitter)|two-point(a,b)");
    gen_cmd->add_option("--gamma", gamma, "emit an AR(1) covariance sidecar with this gamma");
    gen_cmd->add_option("--cov-out", cov_out, "covariance sidecar path");
    gen_cmd->add_flag("--adoptions", adoptions, "adoption-series normal dataset");
    gen_cmd->add_option("--std-hi", std_hi, "adoptions: stddev upper bound");
    gen_cmd->add_option("--cost-hi", cost_hi, "adoptions: cost upper bound");
    gen_cmd->add_option("--out", o.out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_cmd->parsed()) {
            Dataset ds = adoptions ? adoptions_like(gen_n, std_hi, cost_hi, o.seed)
                                   : generate({parse_family(family), gen_n, o.seed,
                                               parse_cost_model(cost_model)});
            std::ostringstream os;
            write_dataset_csv(os, ds);
            emit(o, os.str());
            if (gamma >= 0) {
                if (fully_correlated(gamma))
                    std::cerr << "warning: gamma = 1 gives a rank-one (fully correlated) matrix\n";
                std::vector<double> sigmas;
                for (auto& obj : ds.objects) sigmas.push_back(std::sqrt(variance(obj.dist)));
                std::ostringstream cs;
                write_covariance_csv(cs, inject_dependency(sigmas, gamma));
                if (cov_out.empty()) {
                    std::cout << cs.str();
                } else {
                    std::ofstream f(cov_out);
                    if (!f) throw ValidationError("cannot open '" + cov_out + "'");
                    f << cs.str();
                }
            }
            return 0;
        }

        Ingested ing;
        ProblemInstance inst = load_instance(o, ing);
        ObjectiveKind objective = parse_objective(o.objective);

        if (plan_cmd->parsed()) {
            if (o.budgets.empty()) throw ValidationError("plan needs --budget");
            Oracles oracles(inst);
            CleaningPlan plan = solve(o.algorithm, inst, oracles, objective, o.budgets[0]);
            plan.objective_value = recompute_objective(oracles, objective, plan.chosen);
            std::ostringstream os;
            write_plan_csv(os, plan, inst.dataset);
            emit(o, os.str());
        } else if (evar_cmd->parsed()) {
            Oracles oracles(inst);
            std::ostringstream os;
            os.precision(17);
            os << oracles.evar->evar(resolve_subset(o.subset_ids, inst.dataset)) << "\n";
            emit(o, os.str());
        } else if (maxpr_cmd->parsed()) {
            Oracles oracles(inst);
            std::ostringstream os;
            os.precision(17);
            os << oracles.maxpr->prob(resolve_subset(o.subset_ids, inst.dataset)) << "\n";
            emit(o, os.str());
        } else if (sweep_cmd->parsed()) {
            auto rows = run_sweep(inst, split_csv(o.algorithm), resolve_budgets(o, inst.dataset),
                                  objective);
            for (auto& r : rows)
                if (!r.error.empty())
                    std::cerr << "cell (" << r.algorithm << ", " << r.budget << ") failed: "
                              << r.error << "\n";
            std::ostringstream os;
            write_sweep_csv(os, rows);
            emit(o, os.str());
        } else if (sim_cmd->parsed()) {
            auto rows = simulate(inst, split_csv(o.algorithm), resolve_budgets(o, inst.dataset),
                                 objective, o.truth_seed, o.repetitions);
            std::ostringstream os;
            write_simulation_csv(os, rows);
            emit(o, os.str());
        } else if (cmp_cmd->parsed()) {
            auto rows = compare_objectives(inst, resolve_budgets(o, inst.dataset));
            std::ostringstream os;
            write_compare_csv(os, rows);
            emit(o, os.str());
        }
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
