#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "classify.hpp"
#include "filters.hpp"
#include "group.hpp"
#include "stepset.hpp"

namespace orthant {

struct ScanConfig {
    int D = 4;
    std::vector<int> cardinalities;
    int group_bound = 800;
    int k_points = 4;
    std::uint64_t prime = kMersenne61;
    std::uint64_t seed = 1;
    int threads = 1;
    int box_bound = 8;
    int check_depth = 12;
    std::string output_path;  // JSONL; a .tsv summary is written next to it
    bool resume = false;
    bool verbose = false;  // include one-line rejection records in the JSONL
    std::uint64_t chunk_size = 1 << 16;

    std::uint64_t config_hash() const {
        std::string repr = std::to_string(D) + "|";
        for (int c : cardinalities) repr += std::to_string(c) + ",";
        repr += "|" + std::to_string(group_bound) + "|" + std::to_string(k_points) + "|" +
                std::to_string(prime) + "|" + std::to_string(seed) + "|" +
                std::to_string(box_bound) + "|" + std::to_string(check_depth) + "|" +
                std::to_string(chunk_size);
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : repr) {
            h ^= (unsigned char)c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

struct ScanStats {
    std::uint64_t raw = 0;
    std::uint64_t canonical = 0;
    std::uint64_t rejected_unused = 0;
    std::uint64_t rejected_hadamard = 0;
    std::uint64_t rejected_dimension = 0;
    std::uint64_t rejected_group = 0;
    std::uint64_t survivors = 0;

    ScanStats& operator+=(const ScanStats& o) {
        raw += o.raw;
        canonical += o.canonical;
        rejected_unused += o.rejected_unused;
        rejected_hadamard += o.rejected_hadamard;
        rejected_dimension += o.rejected_dimension;
        rejected_group += o.rejected_group;
        survivors += o.survivors;
        return *this;
    }
};

struct ScanResult {
    ScanStats stats;
    std::vector<ModelReport> survivors;  // in (cardinality, canonical mask) order
};

namespace detail {

// Canonicality check on a raw combination without heap traffic.
inline bool indices_are_canonical(int D, const int* c, int k) {
    const auto& tables = PermTables::get(D);
    Mask orig = 0;
    for (int i = 0; i < k; ++i) orig |= (Mask)1 << c[i];
    for (std::size_t p = 1; p < tables.perms.size(); ++p) {
        Mask m = 0;
        for (int i = 0; i < k; ++i) m |= (Mask)1 << tables.bit_map[p][(std::size_t)c[i]];
        if (m < orig) return false;
    }
    return true;
}

struct ChunkOutcome {
    ScanStats stats;
    std::vector<StepSet> survivors;                            // canonical sets, in mask order
    std::vector<std::pair<std::string, std::string>> rejects;  // (model, filter), verbose only
};

// The search-procedure filters, cheapest-sound shortcuts inside each stage.
// Returns the rejecting filter name, or empty for survivors.
inline std::string run_filters(const StepSet& s, const ScanConfig& cfg, const PrimeField& f) {
    if (unused_steps(s, cfg.box_bound).mask != 0) return "unused";
    auto [dim, cert] = model_dimension(s, cfg.check_depth, cfg.prime);
    (void)cert;
    if (dim < s.D) return "dimension";
    if (hadamard_decomposition(s)) return "hadamard";
    try {
        auto g = group_bfs(s, cfg.group_bound, cfg.k_points, cfg.seed, f);
        if (!g.finite()) return "group";
    } catch (const GroupUndefined&) {
        return "group";
    }
    return "";
}

inline ChunkOutcome scan_chunk(const ScanConfig& cfg, int cardinality, std::uint64_t rank_begin,
                               std::uint64_t rank_end, const PrimeField& f) {
    ChunkOutcome out;
    int n = num_step_indices(cfg.D);
    int c[80];
    if (cardinality == 0) {
        out.stats.raw = 1;
        out.stats.canonical = 1;
        StepSet s{cfg.D, 0};
        std::string filter = "dimension";  // the empty model has dimension 0
        out.stats.rejected_dimension += 1;
        if (cfg.verbose) out.rejects.emplace_back(render_step_set(s), filter);
        return out;
    }
    combination_unrank(n, cardinality, rank_begin, c);
    for (std::uint64_t rank = rank_begin; rank < rank_end; ++rank) {
        ++out.stats.raw;
        if (indices_are_canonical(cfg.D, c, cardinality)) {
            ++out.stats.canonical;
            StepSet s;
            s.D = cfg.D;
            for (int i = 0; i < cardinality; ++i) s.insert(c[i]);
            std::string filter = run_filters(s, cfg, f);
            if (filter.empty()) {
                ++out.stats.survivors;
                out.survivors.push_back(s);
            } else {
                if (filter == "unused") ++out.stats.rejected_unused;
                else if (filter == "hadamard") ++out.stats.rejected_hadamard;
                else if (filter == "dimension") ++out.stats.rejected_dimension;
                else ++out.stats.rejected_group;
                if (cfg.verbose) out.rejects.emplace_back(render_step_set(s), filter);
            }
        }
        if (rank + 1 < rank_end && !combination_next(n, cardinality, c)) break;
    }
    return out;
}

}  // namespace detail

inline std::vector<int> cardinalities_or_throw(const ScanConfig& cfg) {
    if (cfg.cardinalities.empty()) throw std::invalid_argument("scan: no cardinalities requested");
    for (int k : cfg.cardinalities)
        if (k < 0 || k > num_step_indices(cfg.D))
            throw std::invalid_argument("scan: cardinality out of range");
    return cfg.cardinalities;
}

// Deterministic, restartable scan over all canonical step sets of the
// requested cardinalities. Chunks of the combination space are processed by a
// worker pool and committed strictly in order, so output is independent of the
// thread count and interruption points.
inline ScanResult scan(const ScanConfig& cfg,
                       const std::function<void(const ModelReport&)>& on_survivor = {},
                       const std::function<void(const std::string&, const std::string&)>& on_reject = {}) {
    PrimeField f(cfg.prime);
    ScanResult result;

    ClassifyOptions copts;
    copts.box_bound = cfg.box_bound;
    copts.check_depth = cfg.check_depth;
    copts.group_bound = cfg.group_bound;
    copts.k_points = cfg.k_points;
    copts.seed = cfg.seed;
    copts.prime = cfg.prime;

    // chunk layout over all cardinalities
    struct ChunkRef {
        int cardinality;
        std::uint64_t rank_begin, rank_end;
    };
    std::vector<ChunkRef> chunks;
    for (int k : cardinalities_or_throw(cfg)) {
        std::uint64_t total = k == 0 ? 1 : binomial(num_step_indices(cfg.D), k);
        for (std::uint64_t begin = 0; begin < total; begin += cfg.chunk_size)
            chunks.push_back({k, begin, std::min(begin + cfg.chunk_size, total)});
    }

    // resume bookkeeping
    std::string resume_path = cfg.output_path.empty() ? "" : cfg.output_path + ".resume.json";
    std::uint64_t first_chunk = 0;
    if (cfg.resume && !resume_path.empty()) {
        std::ifstream in(resume_path);
        if (in) {
            json j = json::parse(in);
            if (j.at("config_hash").get<std::uint64_t>() != cfg.config_hash())
                throw std::runtime_error("resume token mismatch: config changed");
            first_chunk = j.at("committed_chunks").get<std::uint64_t>();
            result.stats.raw = j.at("raw").get<std::uint64_t>();
            result.stats.canonical = j.at("canonical").get<std::uint64_t>();
            result.stats.rejected_unused = j.at("rejected_unused").get<std::uint64_t>();
            result.stats.rejected_hadamard = j.at("rejected_hadamard").get<std::uint64_t>();
            result.stats.rejected_dimension = j.at("rejected_dimension").get<std::uint64_t>();
            result.stats.rejected_group = j.at("rejected_group").get<std::uint64_t>();
            result.stats.survivors = 0;  // recounted from committed survivors below
            json surv = j.at("survivors");
            for (const auto& item : surv) {
                StepSet s = parse_step_set(item.get<std::string>(), cfg.D);
                ModelReport rep = classify(s, copts);
                result.stats.survivors += 1;
                result.survivors.push_back(std::move(rep));
            }
        }
    }

    std::ofstream out;
    if (!cfg.output_path.empty())
        out.open(cfg.output_path, first_chunk > 0 ? std::ios::app : std::ios::trunc);

    std::mutex mu;
    std::condition_variable cv;
    std::map<std::uint64_t, detail::ChunkOutcome> pending;
    std::atomic<std::uint64_t> next_chunk{first_chunk};
    std::uint64_t commit_cursor = first_chunk;

    auto save_resume = [&]() {
        if (resume_path.empty()) return;
        json j;
        j["config_hash"] = cfg.config_hash();
        j["committed_chunks"] = commit_cursor;
        j["raw"] = result.stats.raw;
        j["canonical"] = result.stats.canonical;
        j["rejected_unused"] = result.stats.rejected_unused;
        j["rejected_hadamard"] = result.stats.rejected_hadamard;
        j["rejected_dimension"] = result.stats.rejected_dimension;
        j["rejected_group"] = result.stats.rejected_group;
        json surv = json::array();
        for (const auto& rep : result.survivors) surv.push_back(rep.canonical);
        j["survivors"] = surv;
        std::ofstream rf(resume_path, std::ios::trunc);
        rf << j.dump() << "\n";
    };

    auto commit = [&](const detail::ChunkOutcome& outc) {
        result.stats += outc.stats;
        result.stats.survivors -= outc.stats.survivors;  // re-added one by one below
        for (const auto& [model, filter] : outc.rejects) {
            if (on_reject) on_reject(model, filter);
            if (out.is_open())
                out << json{{"model", model}, {"rejected_by", filter}}.dump() << "\n";
        }
        for (const StepSet& s : outc.survivors) {
            ModelReport rep = classify(s, copts);
            result.stats.survivors += 1;
            if (on_survivor) on_survivor(rep);
            if (out.is_open()) out << report_to_json(rep).dump() << "\n";
            result.survivors.push_back(std::move(rep));
        }
        if (out.is_open()) out.flush();
    };

    int n_threads = std::max(1, cfg.threads);
    std::vector<std::thread> workers;
    workers.reserve((std::size_t)n_threads);
    for (int t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                std::uint64_t id = next_chunk.fetch_add(1);
                if (id >= chunks.size()) return;
                auto outc = detail::scan_chunk(cfg, chunks[(std::size_t)id].cardinality,
                                               chunks[(std::size_t)id].rank_begin,
                                               chunks[(std::size_t)id].rank_end, f);
                std::lock_guard<std::mutex> lock(mu);
                pending.emplace(id, std::move(outc));
                cv.notify_all();
            }
        });
    }

    {
        std::unique_lock<std::mutex> lock(mu);
        while (commit_cursor < chunks.size()) {
            cv.wait(lock, [&] { return pending.count(commit_cursor) > 0; });
            auto node = pending.extract(commit_cursor);
            lock.unlock();
            commit(node.mapped());
            ++commit_cursor;
            save_resume();
            lock.lock();
        }
    }
    for (auto& w : workers) w.join();

    // TSV summary next to the JSONL output
    if (!cfg.output_path.empty()) {
        std::ofstream tsv(cfg.output_path + ".tsv", std::ios::trunc);
        tsv << "model\tcardinality\tgroup_order\torbit_sum_zero_signed\tprefix\n";
        for (const auto& rep : result.survivors) {
            tsv << rep.canonical << "\t" << parse_step_set(rep.canonical, cfg.D).cardinality() << "\t"
                << rep.group_order << "\t" << (rep.orbit_zero_signed ? 1 : 0) << "\t";
            for (std::size_t i = 0; i < rep.prefix.size() && i < 8; ++i)
                tsv << (i ? "," : "") << rep.prefix[i];
            tsv << "\n";
        }
        tsv << "# raw=" << result.stats.raw << " canonical=" << result.stats.canonical
            << " unused=" << result.stats.rejected_unused
            << " hadamard=" << result.stats.rejected_hadamard
            << " dimension=" << result.stats.rejected_dimension
            << " group=" << result.stats.rejected_group
            << " survivors=" << result.stats.survivors << "\n";
    }
    return result;
}

}  // namespace orthant
