#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "orthant/scan.hpp"

using namespace orthant;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "orthant-scan-test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<std::string> survivor_models(const ScanResult& r) {
    std::vector<std::string> out;
    for (const auto& rep : r.survivors) out.push_back(rep.canonical);
    return out;
}

ScanConfig d2_config() {
    ScanConfig cfg;
    cfg.D = 2;
    for (int k = 1; k <= 8; ++k) cfg.cardinalities.push_back(k);
    return cfg;
}

}  // namespace

TEST_CASE("classify: reference models") {
    auto zero36 = classify("-0-0,0--+,-00+,0-0-,++00,-0+-,0-+0", 4);
    CHECK(zero36.survivor);
    CHECK(zero36.group_defined);
    CHECK(zero36.group_finite);
    CHECK(zero36.group_order == 36);
    CHECK(zero36.orbit_zero_signed);
    CHECK(zero36.dimension == 4);
    CHECK(!zero36.hadamard);
    CHECK(zero36.unused_removed.empty());
    REQUIRE(zero36.prefix.size() >= 6);
    std::vector<std::string> want36{"1", "1", "3", "9", "27", "117"};
    for (int i = 0; i < 6; ++i) CHECK(zero36.prefix[(std::size_t)i] == want36[(std::size_t)i]);

    auto nz24 = classify("-0-0,-00+,-0+-,+--+,+-0-,++00,+-+0", 4);
    CHECK(nz24.survivor);
    CHECK(nz24.group_order == 24);
    CHECK(!nz24.orbit_zero_signed);
    std::vector<std::string> want24{"1", "1", "3", "9", "35", "125"};
    for (int i = 0; i < 6; ++i) CHECK(nz24.prefix[(std::size_t)i] == want24[(std::size_t)i]);

    // a single positive step spans nothing: dimension rejection
    auto trivial = classify("+000", 4);
    CHECK(!trivial.survivor);
    CHECK(trivial.rejected_by == "dimension");
    CHECK(trivial.dimension == 0);

    // unused fires before everything else
    auto unused = classify("+0-0,0+0-,++00", 4);
    CHECK(!unused.survivor);
    CHECK(unused.rejected_by == "unused");
    CHECK(unused.unused_removed.size() == 2);
}

TEST_CASE("classify: optional identity check and guessing") {
    ClassifyOptions opts;
    opts.verify_identity = true;
    opts.identity_terms = 10;
    opts.run_guess = true;
    opts.guess_max_order = 6;
    opts.guess_max_degree = 4;
    opts.guess_terms = 120;
    // Kreweras walks: group order 6; the counts satisfy an order-6 recurrence
    auto rep = classify("-0,0-,++", 2, opts);
    CHECK(rep.survivor);
    CHECK(rep.group_order == 6);
    CHECK(rep.orbit_zero_signed);
    REQUIRE(rep.identity_verdicts.size() == 11);
    for (bool v : rep.identity_verdicts) CHECK(v);
    REQUIRE(rep.recurrence.has_value());
    CHECK(verify_relation(*rep.recurrence, count_walks(parse_step_set("-0,0-,++", 2), 120).residues));
}

TEST_CASE("scan: the full two-dimensional census") {
    ScanConfig cfg = d2_config();
    auto result = scan(cfg);
    CHECK(result.stats.raw == 255);
    CHECK(result.stats.canonical == 143);
    CHECK(result.stats.survivors == 7);
    CHECK(result.stats.canonical ==
          result.stats.rejected_unused + result.stats.rejected_hadamard +
              result.stats.rejected_dimension + result.stats.rejected_group +
              result.stats.survivors);
    REQUIRE(result.survivors.size() == 7);

    // Kreweras is among the survivors
    std::string kreweras = render_step_set(canonical_form(parse_step_set("-0,0-,++", 2)).first);
    bool found = false;
    for (const auto& rep : result.survivors) {
        CHECK(rep.survivor);
        CHECK(rep.group_finite);
        if (rep.canonical == kreweras) {
            found = true;
            CHECK(rep.group_order == 6);
            CHECK(rep.orbit_zero_signed);
        }
        // every survivor report matches a standalone classification
        auto solo = classify(parse_step_set(rep.canonical, 2));
        CHECK(solo.group_order == rep.group_order);
        CHECK(solo.orbit_zero_signed == rep.orbit_zero_signed);
        CHECK(solo.prefix == rep.prefix);
    }
    CHECK(found);

    // survivors arrive in (cardinality, canonical mask) order
    std::vector<std::pair<int, Mask>> keys;
    for (const auto& rep : result.survivors) {
        StepSet s = parse_step_set(rep.canonical, 2);
        keys.emplace_back(s.cardinality(), s.mask);
    }
    CHECK(std::is_sorted(keys.begin(), keys.end()));
}

TEST_CASE("scan: thread count and chunk size do not change the output") {
    ScanConfig base = d2_config();
    auto ref = scan(base);

    ScanConfig threaded = base;
    threaded.threads = 3;
    auto t = scan(threaded);
    CHECK(survivor_models(t) == survivor_models(ref));
    CHECK(t.stats.raw == ref.stats.raw);
    CHECK(t.stats.canonical == ref.stats.canonical);

    ScanConfig chunked = base;
    chunked.chunk_size = 7;
    auto c = scan(chunked);
    CHECK(survivor_models(c) == survivor_models(ref));
    CHECK(c.stats.survivors == ref.stats.survivors);
}

TEST_CASE("scan: interrupted runs resume to the same result") {
    auto dir = temp_dir();
    ScanConfig cfg = d2_config();
    cfg.chunk_size = 16;
    cfg.output_path = (dir / "census.jsonl").string();

    auto full = scan(cfg);

    // replay the first chunks by hand, as an interrupted run would have
    // committed them, and write the matching resume token
    PrimeField f(cfg.prime);
    std::vector<std::pair<int, std::pair<std::uint64_t, std::uint64_t>>> chunks;
    for (int k : cfg.cardinalities) {
        std::uint64_t total = binomial(num_step_indices(cfg.D), k);
        for (std::uint64_t b = 0; b < total; b += cfg.chunk_size)
            chunks.push_back({k, {b, std::min(b + cfg.chunk_size, total)}});
    }
    std::uint64_t committed = chunks.size() / 2;
    ScanStats partial;
    std::vector<std::string> partial_survivors;
    for (std::uint64_t id = 0; id < committed; ++id) {
        auto outc = detail::scan_chunk(cfg, chunks[(std::size_t)id].first,
                                       chunks[(std::size_t)id].second.first,
                                       chunks[(std::size_t)id].second.second, f);
        partial += outc.stats;
        for (const StepSet& s : outc.survivors) partial_survivors.push_back(render_step_set(s));
    }
    json token;
    token["config_hash"] = cfg.config_hash();
    token["committed_chunks"] = committed;
    token["raw"] = partial.raw;
    token["canonical"] = partial.canonical;
    token["rejected_unused"] = partial.rejected_unused;
    token["rejected_hadamard"] = partial.rejected_hadamard;
    token["rejected_dimension"] = partial.rejected_dimension;
    token["rejected_group"] = partial.rejected_group;
    token["survivors"] = partial_survivors;
    {
        std::ofstream rf(cfg.output_path + ".resume.json", std::ios::trunc);
        rf << token.dump() << "\n";
    }

    ScanConfig resumed_cfg = cfg;
    resumed_cfg.resume = true;
    auto resumed = scan(resumed_cfg);
    CHECK(survivor_models(resumed) == survivor_models(full));
    CHECK(resumed.stats.raw == full.stats.raw);
    CHECK(resumed.stats.canonical == full.stats.canonical);
    CHECK(resumed.stats.survivors == full.stats.survivors);

    // the TSV summary carries the survivors and the final stats line
    std::ifstream tsv(cfg.output_path + ".tsv");
    REQUIRE(tsv.good());
    std::string line, last;
    int rows = 0;
    while (std::getline(tsv, line)) {
        if (!line.empty()) last = line;
        ++rows;
    }
    CHECK(rows == 1 + 7 + 1);  // header, survivors, stats comment
    CHECK(last.find("survivors=7") != std::string::npos);

    // a changed config invalidates the token
    ScanConfig changed = resumed_cfg;
    changed.seed = 999;
    CHECK_THROWS_AS((void)scan(changed), std::runtime_error);

    std::filesystem::remove_all(dir);
}

TEST_CASE("scan: argument validation") {
    ScanConfig cfg;
    cfg.D = 2;
    CHECK_THROWS_AS((void)scan(cfg), std::invalid_argument);  // no cardinalities
    cfg.cardinalities = {9};
    CHECK_THROWS_AS((void)scan(cfg), std::invalid_argument);  // out of range
}
