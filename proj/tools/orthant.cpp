// orthant: classify small-step walk models in the D-dimensional orthant.
//
// Subcommands: scan, classify, count, group, guess, verify-orbit-sum,
// verify-orbit-identity. Exit codes: 0 ok, 1 usage/parse error, 2 memory
// budget refusal, 3 internal inconsistency.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "orthant/classify.hpp"
#include "orthant/counting.hpp"
#include "orthant/expr.hpp"
#include "orthant/group.hpp"
#include "orthant/guess.hpp"
#include "orthant/scan.hpp"
#include "orthant/stepset.hpp"

using namespace orthant;

namespace {

struct Common {
    int dimension = 4;
    std::uint64_t prime = kMersenne61;
    std::uint64_t seed = 1;
    int bound = 800;
    int threads = 1;
    int terms = 16;
    std::string output;
    std::string fixtures;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--dimension,-D", c.dimension, "ambient dimension (2-4)")
        ->check(CLI::Range(2, 4));
    cmd->add_option("--prime", c.prime, "working prime");
    cmd->add_option("--seed", c.seed, "fingerprint seed");
    cmd->add_option("--bound", c.bound, "group size bound");
    cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--terms", c.terms, "number of sequence terms");
    cmd->add_option("--output,-o", c.output, "output path");
    cmd->add_option("--fixtures", c.fixtures, "reference models JSONL");
}

int run_scan(const Common& c, const std::vector<int>& cardinalities, bool resume, bool verbose,
             bool all_cardinalities) {
    ScanConfig cfg;
    cfg.D = c.dimension;
    if (all_cardinalities) {
        for (int k = 1; k <= num_step_indices(c.dimension); ++k) cfg.cardinalities.push_back(k);
    } else {
        cfg.cardinalities = cardinalities;
    }
    cfg.group_bound = c.bound;
    cfg.prime = c.prime;
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    cfg.output_path = c.output;
    cfg.resume = resume;
    cfg.verbose = verbose;
    auto res = scan(cfg, [](const ModelReport& r) {
        std::cout << report_to_json(r).dump() << "\n";
    });
    std::cerr << "raw=" << res.stats.raw << " canonical=" << res.stats.canonical
              << " rejected: unused=" << res.stats.rejected_unused
              << " hadamard=" << res.stats.rejected_hadamard
              << " dimension=" << res.stats.rejected_dimension
              << " group=" << res.stats.rejected_group
              << " survivors=" << res.stats.survivors << "\n";
    return 0;
}

int run_classify(const Common& c, const std::string& model, bool identity, bool do_guess) {
    ClassifyOptions opts;
    opts.group_bound = c.bound;
    opts.seed = c.seed;
    opts.prime = c.prime;
    opts.prefix_terms = c.terms;
    opts.verify_identity = identity;
    opts.run_guess = do_guess;
    ModelReport r = classify(model, c.dimension, opts);
    std::cout << report_to_json(r).dump(2) << "\n";
    return 0;
}

int run_count(const Common& c, const std::string& model, bool exact, std::uint64_t budget) {
    StepSet s = parse_step_set(model, c.dimension);
    CountOptions opts;
    opts.mode = exact ? CountMode::Exact : CountMode::Modular;
    opts.prime = c.prime;
    if (budget) opts.memory_budget_bytes = budget;
    auto seq = count_walks(s, c.terms - 1, opts);
    json j;
    j["model"] = render_step_set(s);
    j["mode"] = exact ? "exact" : "modular";
    if (exact) {
        json terms = json::array();
        for (const auto& t : seq.exact) terms.push_back(t.get_str());
        j["terms"] = terms;
    } else {
        j["prime"] = c.prime;
        j["terms"] = seq.residues;
    }
    std::cout << j.dump() << "\n";
    return 0;
}

int run_group(const Common& c, const std::string& model) {
    StepSet s = parse_step_set(model, c.dimension);
    PrimeField f(c.prime);
    json j;
    j["model"] = render_step_set(s);
    try {
        auto g = group_bfs(s, c.bound, 4, c.seed, f);
        std::optional<OrbitSumZeroResult> zero;
        if (g.finite()) zero = orbit_sum_zero_test(g, 8, c.seed + 1, f);
        j["group"] = group_result_to_json(g, zero);
        if (!g.parity_consistent) {
            std::cerr << "parity inconsistency in group signs\n";
            std::cout << j.dump(2) << "\n";
            return 3;
        }
    } catch (const GroupUndefined& e) {
        j["group"] = nullptr;
        j["error"] = e.what();
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_guess(const Common& c, const std::string& model, int max_order, int max_degree,
              int holdout) {
    StepSet s = parse_step_set(model, c.dimension);
    CountOptions opts;
    opts.mode = CountMode::Modular;
    opts.prime = c.prime;
    auto seq = count_walks(s, c.terms - 1, opts);
    json j;
    j["model"] = render_step_set(s);
    auto rec = guess_recurrence(seq.residues, max_order, max_degree, holdout, c.prime);
    auto ode = guess_ode(seq.residues, max_order, max_degree, holdout, c.prime);
    j["recurrence"] = rec ? candidate_to_json(*rec) : json(nullptr);
    j["ode"] = ode ? candidate_to_json(*ode) : json(nullptr);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_verify_orbit_sum(const Common& c, const std::string& model) {
    if (c.fixtures.empty()) {
        std::cerr << "verify-orbit-sum requires --fixtures\n";
        return 1;
    }
    auto fixtures = load_fixtures(c.fixtures);
    PrimeField f(c.prime);
    int checked = 0, ok = 0;
    for (const auto& fx : fixtures) {
        if (!model.empty() && fx.steps != model && fx.id != model) continue;
        StepSet s = parse_step_set(fx.steps, c.dimension);
        auto g = group_bfs(s, c.bound, 4, c.seed, f);
        json j;
        j["id"] = fx.id;
        j["model"] = fx.steps;
        if (fx.orbit_sum) {
            ++checked;
            RationalExpr e = parse_rational_expr(*fx.orbit_sum);
            auto match = verify_orbit_sum_expression(g, e, {"x", "y", "z", "w"}, 12, c.seed + 2, f);
            j["expression_matches"] = match.has_value();
            if (match) {
                ++ok;
                j["signed_convention"] = match->signed_convention;
                j["negated"] = match->negated;
            }
        } else {
            ++checked;
            auto zero = orbit_sum_zero_test(g, 8, c.seed + 1, f);
            bool agrees = zero.zero_signed == fx.orbit_sum_zero;
            j["zero_agrees"] = agrees;
            if (agrees) ++ok;
        }
        std::cout << j.dump() << "\n";
    }
    if (checked == 0) {
        std::cerr << "no matching fixture model\n";
        return 1;
    }
    std::cerr << ok << "/" << checked << " orbit-sum checks passed\n";
    return ok == checked ? 0 : 3;
}

int run_verify_orbit_identity(const Common& c, const std::string& model, int points) {
    StepSet s = parse_step_set(model, c.dimension);
    PrimeField f(c.prime);
    auto g = group_bfs(s, c.bound, 4, c.seed, f);
    if (!g.finite()) {
        std::cerr << "group exceeds bound; identity undefined\n";
        return 1;
    }
    auto verdicts = verify_orbit_identity(s, g, c.terms - 1, points, true, c.seed + 2, f);
    json j;
    j["model"] = render_step_set(s);
    json v = json::array();
    bool all = true;
    for (bool b : verdicts) {
        v.push_back(b);
        all = all && b;
    }
    j["verdicts"] = v;
    j["all_hold"] = all;
    std::cout << j.dump() << "\n";
    return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice walk model classifier for the D-dimensional orthant"};
    app.require_subcommand(1);

    Common c;
    std::string model;
    std::vector<int> cardinalities;
    bool resume = false, verbose = false, all_cardinalities = false;
    bool identity = false, do_guess = false, exact = false;
    std::uint64_t budget = 0;
    int max_order = 4, max_degree = 4, holdout = 20, points = 4;

    auto* scan_cmd = app.add_subcommand("scan", "scan all canonical step sets");
    add_common(scan_cmd, c);
    scan_cmd->add_option("--cardinality", cardinalities, "step-set cardinalities to scan");
    scan_cmd->add_flag("--all-cardinalities", all_cardinalities, "scan every cardinality (long)");
    scan_cmd->add_flag("--resume", resume, "resume from <output>.resume.json");
    scan_cmd->add_flag("--verbose", verbose, "emit rejection records too");

    auto* classify_cmd = app.add_subcommand("classify", "full report for one model");
    add_common(classify_cmd, c);
    classify_cmd->add_option("model", model, "step string, e.g. \"-0-0,0--+,...\"")->required();
    classify_cmd->add_flag("--identity", identity, "verify the orbit identity");
    classify_cmd->add_flag("--guess", do_guess, "guess recurrence and ODE");

    auto* count_cmd = app.add_subcommand("count", "counting sequence of a model");
    add_common(count_cmd, c);
    count_cmd->add_option("model", model, "step string")->required();
    count_cmd->add_flag("--exact", exact, "exact big-integer counts");
    count_cmd->add_option("--memory-budget", budget, "memory budget in bytes");

    auto* group_cmd = app.add_subcommand("group", "group of the walk");
    add_common(group_cmd, c);
    group_cmd->add_option("model", model, "step string")->required();

    auto* guess_cmd = app.add_subcommand("guess", "guess annihilating operators");
    add_common(guess_cmd, c);
    guess_cmd->add_option("model", model, "step string")->required();
    guess_cmd->add_option("--max-order", max_order, "maximum operator order");
    guess_cmd->add_option("--max-degree", max_degree, "maximum coefficient degree");
    guess_cmd->add_option("--holdout", holdout, "verification holdout terms");

    auto* vos_cmd = app.add_subcommand("verify-orbit-sum", "check orbit sums against fixtures");
    add_common(vos_cmd, c);
    vos_cmd->add_option("model", model, "restrict to one fixture (step string or id)");

    auto* voi_cmd = app.add_subcommand("verify-orbit-identity", "check the orbit identity");
    add_common(voi_cmd, c);
    voi_cmd->add_option("model", model, "step string")->required();
    voi_cmd->add_option("--points", points, "evaluation points");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan_cmd->parsed())
            return run_scan(c, cardinalities, resume, verbose, all_cardinalities);
        if (classify_cmd->parsed()) return run_classify(c, model, identity, do_guess);
        if (count_cmd->parsed()) return run_count(c, model, exact, budget);
        if (group_cmd->parsed()) return run_group(c, model);
        if (guess_cmd->parsed()) return run_guess(c, model, max_order, max_degree, holdout);
        if (vos_cmd->parsed()) return run_verify_orbit_sum(c, model);
        if (voi_cmd->parsed()) return run_verify_orbit_identity(c, model, points);
    } catch (const MemoryBudgetExceeded& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const InternalInconsistency& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const ExprError& e) {
        std::cerr << "expression error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
