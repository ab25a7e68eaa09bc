#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "counting.hpp"
#include "filters.hpp"
#include "group.hpp"
#include "guess.hpp"
#include "stepset.hpp"

namespace orthant {

using nlohmann::json;

inline json step_set_to_json(const StepSet& s) {
    json steps = json::array();
    for (const Step& st : s.steps()) steps.push_back(render_step_token(st));
    return json{{"D", s.D}, {"steps", steps}};
}

inline json group_result_to_json(const GroupResult& g,
                                 const std::optional<OrbitSumZeroResult>& zero = std::nullopt) {
    json j;
    j["order"] = g.finite() ? json(g.order()) : json(nullptr);
    j["exceeds_bound"] = !g.finite();
    if (zero) {
        j["orbit_sum_zero"] = json{{"signed", zero->zero_signed}, {"unsigned", zero->zero_unsigned}};
    } else {
        j["orbit_sum_zero"] = json(nullptr);
    }
    json hist = json::object();
    if (g.finite()) {
        PrimeField f(g.prime);
        for (auto [ord, cnt] : group_signature(g, f)) hist[std::to_string(ord)] = cnt;
    }
    j["order_histogram"] = hist;
    return j;
}

inline json candidate_to_json(const OperatorCandidate& c) {
    return json{{"kind", c.kind == OperatorCandidate::Kind::Ode ? "ode" : "recurrence"},
                {"order", c.order},
                {"degree", c.degree},
                {"prime", c.prime},
                {"coeffs", c.coeffs}};
}

struct ClassifyOptions {
    int box_bound = 8;
    int check_depth = 12;
    int group_bound = 800;
    int k_points = 4;
    std::uint64_t seed = 1;
    std::uint64_t prime = kMersenne61;
    int prefix_terms = 16;
    bool signed_convention = true;  // the convention that reproduces the 50/8 split
    bool verify_identity = false;
    int identity_terms = 30;
    int identity_points = 4;
    bool run_guess = false;
    int guess_max_order = 4;
    int guess_max_degree = 4;
    int guess_holdout = 20;
    int guess_terms = 120;
};

struct ModelReport {
    std::string model;
    std::string canonical;
    int D = 0;

    // filters, in the search procedure's order
    std::vector<std::string> unused_removed;
    bool unused_stable = true;  // bounds 8 and 16 agree
    bool hadamard = false;
    int dimension = 0;
    bool dimension_certified = true;  // every redundancy claim carries an exact witness

    bool group_defined = false;
    bool group_finite = false;
    bool parity_consistent = true;
    int group_order = 0;
    std::map<int, int> order_histogram;
    bool orbit_zero_signed = false;
    bool orbit_zero_unsigned = false;
    double orbit_log2_error_bound = 0.0;

    std::vector<std::string> prefix;  // exact decimal terms

    bool survivor = false;
    std::string rejected_by;  // empty for survivors

    std::vector<bool> identity_verdicts;          // when requested
    std::optional<OperatorCandidate> recurrence;  // when guessing requested
    std::optional<OperatorCandidate> ode;

    std::map<std::string, double> timings_ms;
};

inline json report_to_json(const ModelReport& r) {
    json j;
    j["model"] = r.model;
    j["canonical"] = r.canonical;
    j["D"] = r.D;
    j["filters"] = json{{"unused_removed", r.unused_removed},
                        {"unused_stable", r.unused_stable},
                        {"hadamard", r.hadamard},
                        {"dimension", r.dimension},
                        {"dimension_certified", r.dimension_certified}};
    json g;
    g["defined"] = r.group_defined;
    g["order"] = r.group_finite ? json(r.group_order) : json(nullptr);
    g["exceeds_bound"] = r.group_defined && !r.group_finite;
    g["parity_consistent"] = r.parity_consistent;
    json hist = json::object();
    for (auto [ord, cnt] : r.order_histogram) hist[std::to_string(ord)] = cnt;
    g["order_histogram"] = hist;
    j["group"] = g;
    j["orbit_sum_zero"] = json{{"signed", r.orbit_zero_signed},
                               {"unsigned", r.orbit_zero_unsigned},
                               {"log2_error_bound", r.orbit_log2_error_bound}};
    j["sequence_prefix"] = r.prefix;
    j["survivor"] = r.survivor;
    j["rejected_by"] = r.rejected_by;
    if (!r.identity_verdicts.empty()) {
        json v = json::array();
        for (bool b : r.identity_verdicts) v.push_back(b);
        j["orbit_identity"] = v;
    }
    if (r.recurrence) j["recurrence"] = candidate_to_json(*r.recurrence);
    if (r.ode) j["ode"] = candidate_to_json(*r.ode);
    j["timings_ms"] = r.timings_ms;
    return j;
}

// Full single-model pipeline: filters in the search order, group, orbit sums,
// exact sequence prefix, optional identity verification and guessing.
inline ModelReport classify(const StepSet& s, const ClassifyOptions& opts = {}) {
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };
    PrimeField f(opts.prime);
    ModelReport r;
    r.D = s.D;
    r.model = render_step_set(s);
    auto [canon, perm] = canonical_form(s);
    (void)perm;
    r.canonical = render_step_set(canon);

    // unused steps (with the bound-doubling stability check)
    auto t0 = clock::now();
    StepSet unused = unused_steps(s, opts.box_bound);
    r.unused_stable = unused == unused_steps(s, 2 * opts.box_bound);
    for (const Step& st : unused.steps()) r.unused_removed.push_back(render_step_token(st));
    StepSet pruned = s;
    pruned.mask &= ~unused.mask;
    r.timings_ms["unused"] = ms_since(t0);

    // dimension
    t0 = clock::now();
    auto [dim, cert] = model_dimension(pruned, opts.check_depth, opts.prime);
    r.dimension = dim;
    for (const auto& [coord, witness] : cert.witnesses)
        if (!witness.exact) r.dimension_certified = false;
    r.timings_ms["dimension"] = ms_since(t0);

    // Hadamard decomposition
    t0 = clock::now();
    r.hadamard = hadamard_decomposition(pruned).has_value();
    r.timings_ms["hadamard"] = ms_since(t0);

    // group and orbit sums
    t0 = clock::now();
    std::optional<GroupResult> group;
    try {
        group = group_bfs(pruned, opts.group_bound, opts.k_points, opts.seed, f);
        r.group_defined = true;
    } catch (const GroupUndefined&) {
        r.group_defined = false;
    }
    if (group && group->finite()) {
        r.group_finite = true;
        r.group_order = group->order();
        r.parity_consistent = group->parity_consistent;
        r.order_histogram = group_signature(*group, f);
        auto zero = orbit_sum_zero_test(*group, 8, opts.seed + 1, f);
        r.orbit_zero_signed = zero.zero_signed;
        r.orbit_zero_unsigned = zero.zero_unsigned;
        r.orbit_log2_error_bound = (double)zero.log2_error_bound;
    }
    r.timings_ms["group"] = ms_since(t0);

    // counting sequence prefix, exact
    t0 = clock::now();
    CountOptions copts;
    copts.mode = CountMode::Exact;
    copts.prime = opts.prime;
    auto seq = count_walks(s, opts.prefix_terms - 1, copts);
    for (const auto& term : seq.exact) r.prefix.push_back(term.get_str());
    r.timings_ms["count"] = ms_since(t0);

    // verdict, filters in the search procedure's order
    if (!r.unused_removed.empty()) r.rejected_by = "unused";
    else if (r.dimension < s.D) r.rejected_by = "dimension";
    else if (r.hadamard) r.rejected_by = "hadamard";
    else if (!r.group_defined || !r.group_finite) r.rejected_by = "group";
    r.survivor = r.rejected_by.empty();

    if (opts.verify_identity && r.group_finite) {
        t0 = clock::now();
        r.identity_verdicts = verify_orbit_identity(pruned, *group, opts.identity_terms,
                                                    opts.identity_points,
                                                    opts.signed_convention, opts.seed + 2, f);
        r.timings_ms["identity"] = ms_since(t0);
    }
    if (opts.run_guess) {
        t0 = clock::now();
        CountOptions gopts;
        gopts.mode = CountMode::Modular;
        gopts.prime = opts.prime;
        auto gseq = count_walks(s, opts.guess_terms - 1, gopts);
        try {
            r.recurrence = guess_recurrence(gseq.residues, opts.guess_max_order,
                                            opts.guess_max_degree, opts.guess_holdout, opts.prime);
            r.ode = guess_ode(gseq.residues, opts.guess_max_order, opts.guess_max_degree,
                              opts.guess_holdout, opts.prime);
        } catch (const InsufficientTerms&) {
            // too few terms for the requested bounds; leave candidates empty
        }
        r.timings_ms["guess"] = ms_since(t0);
    }
    return r;
}

inline ModelReport classify(const std::string& model, int D, const ClassifyOptions& opts = {}) {
    return classify(parse_step_set(model, D), opts);
}

// --- fixtures: the reference model corpus (steps, orbit sums, prefixes) ------

struct FixtureModel {
    std::string id;
    std::string steps;
    std::string group_name;
    int group_order = 0;
    std::optional<std::string> orbit_sum;  // explicit-'*' expression text
    bool orbit_sum_zero = true;
    std::vector<std::uint64_t> prefix;
};

inline std::vector<FixtureModel> load_fixtures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixtures file: " + path);
    std::vector<FixtureModel> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        json j = json::parse(line);
        FixtureModel m;
        m.id = j.at("id").get<std::string>();
        m.steps = j.at("steps").get<std::string>();
        m.group_name = j.at("group").get<std::string>();
        m.group_order = j.at("order").get<int>();
        if (!j.at("orbit_sum").is_null()) m.orbit_sum = j.at("orbit_sum").get<std::string>();
        m.orbit_sum_zero = j.at("orbit_sum_zero").get<bool>();
        for (const auto& t : j.at("prefix")) m.prefix.push_back(t.get<std::uint64_t>());
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace orthant
