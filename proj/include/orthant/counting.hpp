#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "group.hpp"
#include "stepset.hpp"

namespace orthant {

enum class CountMode { Exact, Modular };

struct MemoryBudgetExceeded : std::runtime_error {
    std::uint64_t required_bytes;
    MemoryBudgetExceeded(std::uint64_t req, std::uint64_t budget)
        : std::runtime_error("counting refused: requires about " + std::to_string(req) +
                             " bytes, budget is " + std::to_string(budget)),
          required_bytes(req) {}
};

struct MemoryEstimate {
    std::uint64_t two_buffer_bytes = 0;
    std::uint64_t one_buffer_bytes = 0;
};

// Ping-pong buffer estimate at 8 bytes per cell (nominal also for exact mode,
// where limbs add a data-dependent overhead).
inline MemoryEstimate memory_estimate(int D, long long N, CountMode /*mode*/) {
    unsigned __int128 cells = 1;
    for (int i = 0; i < D; ++i) cells *= (unsigned __int128)(N + 1);
    MemoryEstimate e;
    e.one_buffer_bytes = (std::uint64_t)(cells * 8);
    e.two_buffer_bytes = 2 * e.one_buffer_bytes;
    return e;
}

struct CountOptions {
    CountMode mode = CountMode::Modular;
    std::uint64_t prime = kMersenne61;
    std::uint32_t restriction_mask = 0xFFFFFFFFu;  // bit j: coordinate j confined to N
    std::uint64_t memory_budget_bytes = std::uint64_t{2} << 30;

    bool restricted(int j) const { return (restriction_mask >> j) & 1; }
};

// Endpoint box geometry: restricted coordinates live in [0, N], unrestricted
// ones in [-N, N]. Linear index = sum_j (c_j - lo_j) * stride_j.
struct Box {
    int D = 0;
    std::array<int, 4> lo{};
    std::array<int, 4> hi{};
    std::array<std::int64_t, 4> stride{};
    std::size_t cells = 0;

    static Box make(int D, int N, std::uint32_t restriction_mask) {
        Box b;
        b.D = D;
        std::size_t total = 1;
        for (int j = D - 1; j >= 0; --j) {
            b.lo[(std::size_t)j] = ((restriction_mask >> j) & 1) ? 0 : -N;
            b.hi[(std::size_t)j] = N;
            b.stride[(std::size_t)j] = (std::int64_t)total;
            total *= (std::size_t)(b.hi[(std::size_t)j] - b.lo[(std::size_t)j] + 1);
        }
        b.cells = total;
        return b;
    }

    std::size_t index(const int* c) const {
        std::int64_t idx = 0;
        for (int j = 0; j < D; ++j) idx += (std::int64_t)(c[j] - lo[(std::size_t)j]) * stride[(std::size_t)j];
        return (std::size_t)idx;
    }
};

namespace detail {

template <class Cell>
struct CellOps;

template <>
struct CellOps<std::uint64_t> {
    const PrimeField& f;
    void accumulate(std::uint64_t& dst, const std::uint64_t& src) const { dst = f.add(dst, src); }
};

template <>
struct CellOps<mpz_class> {
    const PrimeField& f;  // unused
    void accumulate(mpz_class& dst, const mpz_class& src) const { dst += src; }
};

// One-slice-per-length recurrence with two ping-pong buffers. Calls
// on_slice(n, buffer, box) for n = 0..N. Only cells with all |c_j| <= n are
// touched at slice n.
template <class Cell, class SliceFn>
void walk_dp(const StepSet& s, int N, const CountOptions& opts, const PrimeField& f,
             SliceFn&& on_slice) {
    Box box = Box::make(s.D, N, opts.restriction_mask);
    auto est = memory_estimate(s.D, N, opts.mode);
    // the unrestricted-coordinate variant can be up to 2^D larger
    std::uint64_t required = (std::uint64_t)box.cells * 8 * 2;
    if (required > opts.memory_budget_bytes) throw MemoryBudgetExceeded(required, opts.memory_budget_bytes);
    (void)est;

    std::vector<Cell> cur(box.cells), nxt(box.cells);
    auto steps = s.steps();
    std::vector<std::int64_t> offset(steps.size());
    for (std::size_t si = 0; si < steps.size(); ++si) {
        std::int64_t o = 0;
        for (int j = 0; j < s.D; ++j) o += (std::int64_t)steps[si].s[(std::size_t)j] * box.stride[(std::size_t)j];
        offset[si] = o;
    }

    int origin[4] = {0, 0, 0, 0};
    cur[box.index(origin)] = Cell(1);
    on_slice(0, cur, box);

    CellOps<Cell> ops{f};
    int c[4];
    for (int n = 0; n < N; ++n) {
        for (auto& v : nxt) v = Cell(0);
        // odometer over the reachable sub-box at length n
        int lo_n[4], hi_n[4];
        for (int j = 0; j < s.D; ++j) {
            lo_n[j] = std::max(box.lo[(std::size_t)j], -n);
            hi_n[j] = std::min(box.hi[(std::size_t)j], n);
            c[j] = lo_n[j];
        }
        for (;;) {
            std::size_t idx = box.index(c);
            const Cell& v = cur[idx];
            if (!(v == Cell(0))) {
                for (std::size_t si = 0; si < steps.size(); ++si) {
                    bool ok = true;
                    for (int j = 0; j < s.D; ++j) {
                        int t = c[j] + steps[si].s[(std::size_t)j];
                        if (opts.restricted(j) && t < 0) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) ops.accumulate(nxt[(std::size_t)((std::int64_t)idx + offset[si])], v);
                }
            }
            // advance odometer
            int j = s.D - 1;
            while (j >= 0 && c[j] == hi_n[j]) {
                c[j] = lo_n[j];
                --j;
            }
            if (j < 0) break;
            ++c[j];
        }
        cur.swap(nxt);
        on_slice(n + 1, cur, box);
    }
}

}  // namespace detail

struct CountingSequence {
    StepSet model;
    CountMode mode = CountMode::Modular;
    std::uint32_t restriction_mask = 0xFFFFFFFFu;
    std::uint64_t prime = kMersenne61;
    std::vector<mpz_class> exact;       // mode == Exact
    std::vector<std::uint64_t> residues;  // mode == Modular

    std::size_t size() const { return mode == CountMode::Exact ? exact.size() : residues.size(); }

    // term reduced mod `prime` (valid in both modes)
    std::uint64_t residue(std::size_t n) const {
        if (mode == CountMode::Modular) return residues[n];
        mpz_class r = exact[n] % mpz_class(std::to_string(prime));
        return (std::uint64_t)mpz_get_ui(r.get_mpz_t());
    }
};

// a_n = number of length-n walks from the origin with steps in s, keeping every
// restricted coordinate nonnegative.
inline CountingSequence count_walks(const StepSet& s, int N, const CountOptions& opts = {}) {
    if (N < 0) throw std::invalid_argument("count_walks: N must be >= 0");
    CountingSequence seq;
    seq.model = s;
    seq.mode = opts.mode;
    seq.restriction_mask = opts.restriction_mask;
    seq.prime = opts.prime;
    PrimeField f(opts.prime);
    if (opts.mode == CountMode::Modular) {
        seq.residues.reserve((std::size_t)N + 1);
        detail::walk_dp<std::uint64_t>(s, N, opts, f,
                                       [&](int, const std::vector<std::uint64_t>& data, const Box&) {
                                           std::uint64_t total = 0;
                                           for (std::uint64_t v : data) total = f.add(total, v);
                                           seq.residues.push_back(total);
                                       });
    } else {
        seq.exact.reserve((std::size_t)N + 1);
        detail::walk_dp<mpz_class>(s, N, opts, f, [&](int, const std::vector<mpz_class>& data, const Box&) {
            mpz_class total = 0;
            for (const auto& v : data) total += v;
            seq.exact.push_back(total);
        });
    }
    return seq;
}

struct CountTable {
    StepSet model;
    int n = 0;
    CountMode mode = CountMode::Modular;
    std::uint32_t restriction_mask = 0xFFFFFFFFu;
    std::uint64_t prime = kMersenne61;
    Box box;
    std::vector<std::uint64_t> mod_data;
    std::vector<mpz_class> exact_data;

    mpz_class exact_at(const int* c) const { return exact_data[box.index(c)]; }
    std::uint64_t mod_at(const int* c) const { return mod_data[box.index(c)]; }

    mpz_class exact_sum() const {
        mpz_class total = 0;
        for (const auto& v : exact_data) total += v;
        return total;
    }

    std::uint64_t mod_sum(const PrimeField& f) const {
        std::uint64_t total = 0;
        for (std::uint64_t v : mod_data) total = f.add(total, v);
        return total;
    }
};

// Full endpoint-resolved table at length n.
inline CountTable endpoint_table(const StepSet& s, int n, const CountOptions& opts = {}) {
    CountTable table;
    table.model = s;
    table.n = n;
    table.mode = opts.mode;
    table.restriction_mask = opts.restriction_mask;
    table.prime = opts.prime;
    PrimeField f(opts.prime);
    if (opts.mode == CountMode::Modular) {
        detail::walk_dp<std::uint64_t>(s, n, opts, f,
                                       [&](int k, const std::vector<std::uint64_t>& data, const Box& box) {
                                           if (k == n) {
                                               table.box = box;
                                               table.mod_data = data;
                                           }
                                       });
    } else {
        detail::walk_dp<mpz_class>(s, n, opts, f, [&](int k, const std::vector<mpz_class>& data, const Box& box) {
            if (k == n) {
                table.box = box;
                table.exact_data = data;
            }
        });
    }
    return table;
}

// Binary dump: u32 D, u32 n, u32 restriction_mask, u8 mode, i32 lo[D], i32 hi[D],
// then row-major u64 cells, all little-endian. Exact-mode cells must fit in 64 bits.
inline void write_table_binary(const CountTable& t, std::FILE* out) {
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = (unsigned char)(v >> (8 * i));
        std::fwrite(b, 1, 4, out);
    };
    auto put_u64 = [&](std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
        std::fwrite(b, 1, 8, out);
    };
    put_u32((std::uint32_t)t.box.D);
    put_u32((std::uint32_t)t.n);
    put_u32(t.restriction_mask);
    unsigned char mode = t.mode == CountMode::Exact ? 1 : 0;
    std::fwrite(&mode, 1, 1, out);
    for (int j = 0; j < t.box.D; ++j) put_u32((std::uint32_t)(std::int32_t)t.box.lo[(std::size_t)j]);
    for (int j = 0; j < t.box.D; ++j) put_u32((std::uint32_t)(std::int32_t)t.box.hi[(std::size_t)j]);
    if (t.mode == CountMode::Modular) {
        for (std::uint64_t v : t.mod_data) put_u64(v);
    } else {
        for (const auto& v : t.exact_data) {
            if (!v.fits_ulong_p())
                throw std::runtime_error("write_table_binary: exact cell exceeds 64 bits");
            put_u64((std::uint64_t)mpz_get_ui(v.get_mpz_t()));
        }
    }
}

// ---- per-t-order orbit identity: sum_g sign(g) F_n(g(x0)) = OS(x0) * P_S(x0)^n ----

// Precomputed evaluation data for checking the orbit identity against endpoint
// tables. Reusable across table lengths, and directly exposed so tests can
// feed it deliberately corrupted tables.
class OrbitIdentityChecker {
public:
    OrbitIdentityChecker(const StepSet& s, const GroupResult& g, int max_n, int n_points,
                         bool signed_convention, std::uint64_t seed = 5,
                         const PrimeField& f = PrimeField{})
        : f_(f), D_(s.D), max_n_(max_n), signed_(signed_convention) {
        if (!g.finite()) throw std::invalid_argument("OrbitIdentityChecker: group not finite");
        order_ = g.order();
        SplitMix64 rng(seed);
        int attempts = 0;
        while ((int)points_.size() < n_points) {
            if (++attempts > n_points + 50)
                throw SingularEvaluation("OrbitIdentityChecker: persistent singular evaluations");
            auto pt = random_points(1, rng.next(), D_, f)[0];
            try {
                std::uint64_t os = orbit_sum_eval(g, pt, signed_convention, f);
                std::uint64_t ps = step_polynomial_eval(s, pt, f);
                // power tables of every element image, exponents 0..max_n+1
                std::vector<std::uint64_t> pows((std::size_t)(order_ * D_ * (max_n + 2)));
                for (int e = 0; e < order_; ++e) {
                    EvaluationPoint img = element_image(g, e, pt, f);
                    for (int j = 0; j < D_; ++j) {
                        if (img.coords[j] == 0) throw SingularEvaluation("zero image coordinate");
                        std::uint64_t* row = &pows[(std::size_t)((e * D_ + j) * (max_n + 2))];
                        row[0] = 1;
                        for (int m = 1; m <= max_n + 1; ++m) row[m] = f.mul(row[m - 1], img.coords[j]);
                    }
                }
                points_.push_back(pt);
                os_.push_back(os);
                ps_.push_back(ps);
                pows_.push_back(std::move(pows));
                signs_.push_back([&] {
                    std::vector<std::int8_t> sg((std::size_t)order_);
                    for (int e = 0; e < order_; ++e) sg[(std::size_t)e] = (std::int8_t)g.sign(e);
                    return sg;
                }());
            } catch (const SingularEvaluation&) {
                continue;
            }
        }
    }

    int n_points() const { return (int)points_.size(); }

    // Check the identity at length n against a modular endpoint table slice.
    bool check(int n, const std::vector<std::uint64_t>& data, const Box& box) const {
        for (std::size_t t = 0; t < points_.size(); ++t) {
            std::uint64_t lhs_pos = 0, lhs_neg = 0;
            int c[4];
            for (int j = 0; j < D_; ++j) c[j] = 0;
            for (;;) {
                std::size_t idx = box.index(c);
                std::uint64_t a = data[idx];
                if (a != 0) {
                    const std::vector<std::uint64_t>& pows = pows_[t];
                    const std::vector<std::int8_t>& sg = signs_[t];
                    for (int e = 0; e < order_; ++e) {
                        const std::uint64_t* base = &pows[(std::size_t)(e * D_ * (max_n_ + 2))];
                        std::uint64_t m = base[c[0] + 1];
                        for (int j = 1; j < D_; ++j)
                            m = f_.mul(m, base[(std::size_t)(j * (max_n_ + 2) + c[j] + 1)]);
                        m = f_.mul(m, a);
                        if (signed_ && sg[(std::size_t)e] < 0) lhs_neg = f_.add(lhs_neg, m);
                        else lhs_pos = f_.add(lhs_pos, m);
                    }
                }
                int j = D_ - 1;
                while (j >= 0 && c[j] == std::min(n, box.hi[(std::size_t)j])) {
                    c[j] = 0;
                    --j;
                }
                if (j < 0) break;
                ++c[j];
            }
            std::uint64_t lhs = f_.sub(lhs_pos, lhs_neg);
            std::uint64_t rhs = f_.mul(os_[t], f_.pow(ps_[t], (std::uint64_t)n));
            if (lhs != rhs) return false;
        }
        return true;
    }

private:
    PrimeField f_;
    int D_;
    int max_n_;
    bool signed_;
    int order_ = 0;
    std::vector<EvaluationPoint> points_;
    std::vector<std::uint64_t> os_, ps_;
    std::vector<std::vector<std::uint64_t>> pows_;
    std::vector<std::vector<std::int8_t>> signs_;
};

// Per-n verdicts of the orbit identity for n = 0..N at n_points random points.
inline std::vector<bool> verify_orbit_identity(const StepSet& s, const GroupResult& g, int N = 30,
                                               int n_points = 4, bool signed_convention = true,
                                               std::uint64_t seed = 5,
                                               const PrimeField& f = PrimeField{}) {
    OrbitIdentityChecker checker(s, g, N, n_points, signed_convention, seed, f);
    std::vector<bool> verdicts((std::size_t)N + 1, false);
    CountOptions opts;
    opts.mode = CountMode::Modular;
    opts.prime = f.modulus();
    detail::walk_dp<std::uint64_t>(s, N, opts, f,
                                   [&](int n, const std::vector<std::uint64_t>& data, const Box& box) {
                                       verdicts[(std::size_t)n] = checker.check(n, data, box);
                                   });
    return verdicts;
}

}  // namespace orthant
