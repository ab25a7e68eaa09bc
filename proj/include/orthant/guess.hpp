#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"

namespace orthant {

struct InsufficientTerms : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A guessed annihilating operator: sum_{i<=r, j<=d} c[i][j] * n^j * a_{n+i} = 0
// (recurrence) or sum c[i][j] t^j (d/dt)^i applied to the series (ODE),
// normalized so the first nonzero coefficient is 1, over the prime p.
struct OperatorCandidate {
    enum class Kind { Recurrence, Ode };
    Kind kind = Kind::Recurrence;
    int order = 0;
    int degree = 0;
    std::uint64_t prime = kMersenne61;
    std::vector<std::vector<std::uint64_t>> coeffs;  // coeffs[i][j]
};

using RecurrenceCandidate = OperatorCandidate;
using OdeCandidate = OperatorCandidate;

namespace detail {

// Row builder: value multiplying c[i][j] in the equation indexed by n (or t^m).
// Recurrence: n^j * a_{n+i}. ODE: fall(m-j+i, i) * a_{m-j+i}.
struct GuessSystem {
    const std::vector<std::uint64_t>& a;
    const PrimeField& f;
    bool ode;

    // Entry for equation index n, unknown (i, j). Returns false if the equation
    // index would need terms beyond the sequence.
    bool entry(long long n, int i, int j, std::uint64_t& out) const {
        if (!ode) {
            long long idx = n + i;
            if (idx >= (long long)a.size()) return false;
            std::uint64_t nj = f.pow(f.reduce((std::uint64_t)n), (std::uint64_t)j);
            out = f.mul(nj, a[(std::size_t)idx]);
            return true;
        }
        long long idx = n - j + i;
        if (idx >= (long long)a.size()) return false;
        if (idx < 0 || idx < i) {  // falling factorial vanishes or term absent
            out = 0;
            return true;
        }
        std::uint64_t fall = 1;
        for (int t = 0; t < i; ++t) fall = f.mul(fall, f.reduce((std::uint64_t)(idx - t)));
        out = f.mul(fall, a[(std::size_t)idx]);
        return true;
    }
};

// A basis of the nullspace of the rows x cols system mod p (one vector per
// free column); empty if the kernel is trivial.
inline std::vector<std::vector<std::uint64_t>> nullspace_basis(
    std::vector<std::vector<std::uint64_t>> mat, int cols, const PrimeField& f) {
    int rows = (int)mat.size();
    std::vector<int> pivot_col(rows > 0 ? (std::size_t)rows : 0, -1);
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int sel = -1;
        for (int r = rank; r < rows; ++r)
            if (mat[(std::size_t)r][(std::size_t)col] != 0) {
                sel = r;
                break;
            }
        if (sel < 0) continue;
        std::swap(mat[(std::size_t)rank], mat[(std::size_t)sel]);
        std::uint64_t inv = f.inv(mat[(std::size_t)rank][(std::size_t)col]);
        for (int c = col; c < cols; ++c)
            mat[(std::size_t)rank][(std::size_t)c] = f.mul(mat[(std::size_t)rank][(std::size_t)c], inv);
        for (int r = 0; r < rows; ++r) {
            if (r == rank) continue;
            std::uint64_t factor = mat[(std::size_t)r][(std::size_t)col];
            if (factor == 0) continue;
            for (int c = col; c < cols; ++c)
                mat[(std::size_t)r][(std::size_t)c] =
                    f.sub(mat[(std::size_t)r][(std::size_t)c], f.mul(factor, mat[(std::size_t)rank][(std::size_t)c]));
        }
        pivot_col[(std::size_t)rank] = col;
        ++rank;
    }
    std::vector<std::vector<std::uint64_t>> basis;
    if (rank == cols) return basis;
    std::vector<char> is_pivot((std::size_t)cols, 0);
    for (int r = 0; r < rank; ++r) is_pivot[(std::size_t)pivot_col[(std::size_t)r]] = 1;
    for (int free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[(std::size_t)free_col]) continue;
        std::vector<std::uint64_t> v((std::size_t)cols, 0);
        v[(std::size_t)free_col] = 1;
        for (int r = 0; r < rank; ++r)
            v[(std::size_t)pivot_col[(std::size_t)r]] = f.neg(mat[(std::size_t)r][(std::size_t)free_col]);
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace detail

// True iff the relation annihilates every index where all referenced terms exist.
inline bool verify_relation(const OperatorCandidate& cand, const std::vector<std::uint64_t>& terms) {
    PrimeField f(cand.prime);
    detail::GuessSystem sys{terms, f, cand.kind == OperatorCandidate::Kind::Ode};
    long long start = cand.kind == OperatorCandidate::Kind::Ode ? 0 : 0;
    for (long long n = start;; ++n) {
        std::uint64_t total = 0, e = 0;
        bool in_range = true;
        for (int i = 0; i <= cand.order && in_range; ++i)
            for (int j = 0; j <= cand.degree && in_range; ++j) {
                if (!sys.entry(n, i, j, e)) {
                    in_range = false;
                    break;
                }
                total = f.add(total, f.mul(cand.coeffs[(std::size_t)i][(std::size_t)j], e));
            }
        if (!in_range) return true;
        if (total != 0) return false;
    }
}

namespace detail {

inline std::optional<OperatorCandidate> guess_operator(const std::vector<std::uint64_t>& terms,
                                                       bool ode, int max_order, int max_degree,
                                                       int holdout, std::uint64_t prime) {
    long long needed = (long long)(max_order + 1) * (max_degree + 1) + holdout + max_order;
    if ((long long)terms.size() < needed)
        throw InsufficientTerms("guessing requires at least " + std::to_string(needed) +
                                " terms, got " + std::to_string(terms.size()));
    PrimeField f(prime);
    GuessSystem sys{terms, f, ode};

    for (int total = 0; total <= max_order + max_degree; ++total) {
        for (int r = std::max(0, total - max_degree); r <= std::min(total, max_order); ++r) {
            int d = total - r;
            int cols = (r + 1) * (d + 1);
            // fitting window starts at max_degree to dodge small-n degeneracies
            long long n0 = max_degree;
            long long last_usable = (long long)terms.size() - 1 - r;  // largest n with a_{n+r} available
            long long fit_end = last_usable - holdout;
            long long rows = std::min((long long)cols + 10, fit_end - n0 + 1);
            if (rows < cols) continue;

            std::vector<std::vector<std::uint64_t>> mat((std::size_t)rows,
                                                         std::vector<std::uint64_t>((std::size_t)cols, 0));
            bool built = true;
            for (long long k = 0; k < rows && built; ++k) {
                int col = 0;
                for (int i = 0; i <= r && built; ++i)
                    for (int j = 0; j <= d; ++j) {
                        std::uint64_t e;
                        if (!sys.entry(n0 + k, i, j, e)) {
                            built = false;
                            break;
                        }
                        mat[(std::size_t)k][(std::size_t)col++] = e;
                    }
            }
            if (!built) continue;
            // the fitted kernel can mix spurious vectors with a true relation,
            // so each basis vector gets its own verification pass
            for (const auto& v : nullspace_basis(std::move(mat), cols, f)) {
                OperatorCandidate cand;
                cand.kind = ode ? OperatorCandidate::Kind::Ode : OperatorCandidate::Kind::Recurrence;
                cand.order = r;
                cand.degree = d;
                cand.prime = prime;
                cand.coeffs.assign((std::size_t)(r + 1),
                                   std::vector<std::uint64_t>((std::size_t)(d + 1), 0));
                int col = 0;
                std::uint64_t lead = 0;
                for (std::uint64_t c : v)
                    if (c != 0) {
                        lead = c;
                        break;
                    }
                std::uint64_t leadinv = f.inv(lead);
                for (int i = 0; i <= r; ++i)
                    for (int j = 0; j <= d; ++j)
                        cand.coeffs[(std::size_t)i][(std::size_t)j] = f.mul(v[(std::size_t)col++], leadinv);
                // accept only if the relation annihilates everything, holdout included
                if (verify_relation(cand, terms)) return cand;
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Scan (r, d) by increasing r+d then r; accept the first candidate whose
// relation annihilates the whole available prefix (holdout included).
inline std::optional<RecurrenceCandidate> guess_recurrence(const std::vector<std::uint64_t>& terms,
                                                           int max_order, int max_degree,
                                                           int holdout = 20,
                                                           std::uint64_t prime = kMersenne61) {
    return detail::guess_operator(terms, false, max_order, max_degree, holdout, prime);
}

inline std::optional<OdeCandidate> guess_ode(const std::vector<std::uint64_t>& terms, int max_order,
                                             int max_degree, int holdout = 20,
                                             std::uint64_t prime = kMersenne61) {
    return detail::guess_operator(terms, true, max_order, max_degree, holdout, prime);
}

}  // namespace orthant
