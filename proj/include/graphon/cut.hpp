#pragma once

// Cut norm and cut distance for step kernels.
//
// The exact norm enumerates row subsets with a Gray code (K <= 14) and picks
// the optimal column set per subset in closed form. The heuristic alternates
// row/column optimizations from structured plus random starts and is always
// a valid lower bound. delta_cut aligns block structures by resampling both
// graphons to a common equal-mass resolution and searching permutations:
// exhaustively with rectangle pruning for K <= 8, by simulated annealing
// above that.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace graphon {

inline constexpr std::size_t kMaxExactCutBlocks = 14;
inline constexpr std::size_t kMaxAutoResolution = 24;
inline constexpr std::size_t kExhaustivePermBlocks = 8;

// Signed step kernel on block weights; values row-major K x K, unvalidated.
struct Kernel {
    std::vector<double> weights;
    std::vector<double> values;
    std::size_t blocks() const { return weights.size(); }
};

// f - g on the common refinement.
inline Kernel difference_kernel(const StepGraphon& f, const StepGraphon& g) {
    const auto [rf, rg] = common_refinement(f, g);
    Kernel k;
    k.weights = rf.weights();
    k.values.resize(k.weights.size() * k.weights.size());
    for (std::size_t i = 0; i < k.values.size(); ++i) k.values[i] = rf.values()[i] - rg.values()[i];
    return k;
}

struct CutResult {
    double value = 0.0;
    std::vector<std::size_t> s_set, t_set;
    bool exact = false;
};

namespace detail {

// M_ij = w_i w_j V_ij, the bilinear form actually optimized.
inline std::vector<double> weighted_form(const Kernel& k) {
    const std::size_t K = k.blocks();
    std::vector<double> m(K * K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
            m[i * K + j] = k.weights[i] * k.weights[j] * k.values[i * K + j];
    return m;
}

}  // namespace detail

// max_{S,T} |sum_{i in S, j in T} w_i w_j V_ij| by Gray-code enumeration of
// S with incremental column sums; optimal T is the positive (or negative)
// support. O(2^K K), K <= 14.
inline CutResult cut_norm_exact(const Kernel& k) {
    const std::size_t K = k.blocks();
    if (K > kMaxExactCutBlocks) throw std::length_error("cut_norm_exact: more than 14 blocks");
    const std::vector<double> m = detail::weighted_form(k);
    std::vector<double> c(K, 0.0);
    std::uint32_t mask = 0, best_mask = 0;
    double best = 0.0;
    bool best_positive = true;
    const std::uint64_t total = 1ULL << K;
    for (std::uint64_t n = 1; n < total; ++n) {
        const unsigned i = static_cast<unsigned>(std::countr_zero(n));
        const std::uint32_t bit = 1u << i;
        mask ^= bit;
        const double sgn = (mask & bit) ? 1.0 : -1.0;
        const double* row = &m[static_cast<std::size_t>(i) * K];
        for (std::size_t j = 0; j < K; ++j) c[j] += sgn * row[j];
        double pos = 0.0, neg = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            if (c[j] > 0.0) pos += c[j];
            else neg -= c[j];
        }
        if (pos > best) { best = pos; best_mask = mask; best_positive = true; }
        if (neg > best) { best = neg; best_mask = mask; best_positive = false; }
    }
    CutResult r;
    r.value = best;
    r.exact = true;
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < K; ++i)
        if (best_mask & (1u << i)) {
            r.s_set.push_back(i);
            for (std::size_t j = 0; j < K; ++j) c[j] += m[i * K + j];
        }
    for (std::size_t j = 0; j < K; ++j)
        if (best_positive ? c[j] > 0.0 : c[j] < 0.0) r.t_set.push_back(j);
    return r;
}

// Alternating maximization from structured and random starts, both signs.
// Ties go toward inclusion. Lower bound on the exact norm.
inline CutResult cut_norm_heuristic(const Kernel& k, std::size_t restarts = 50,
                                    std::uint64_t seed = 1) {
    const std::size_t K = k.blocks();
    const std::vector<double> base = detail::weighted_form(k);
    Splitmix rng(mix64(seed ^ 0x1457cafe01d2bd3cULL));
    CutResult best;
    std::vector<double> m(K * K);
    std::vector<char> s(K), t(K), prev(K);
    std::vector<double> c(K), rsum(K);

    auto alternate = [&](std::vector<char>& s0) {
        s = s0;
        for (int round = 0; round < 100; ++round) {
            std::fill(c.begin(), c.end(), 0.0);
            for (std::size_t i = 0; i < K; ++i)
                if (s[i])
                    for (std::size_t j = 0; j < K; ++j) c[j] += m[i * K + j];
            for (std::size_t j = 0; j < K; ++j) t[j] = c[j] >= 0.0;
            std::fill(rsum.begin(), rsum.end(), 0.0);
            for (std::size_t i = 0; i < K; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < K; ++j)
                    if (t[j]) acc += m[i * K + j];
                rsum[i] = acc;
            }
            prev = s;
            for (std::size_t i = 0; i < K; ++i) s[i] = rsum[i] >= 0.0;
            if (s == prev) break;
        }
        double val = 0.0;
        for (std::size_t i = 0; i < K; ++i)
            if (s[i]) val += rsum[i];
        return val;
    };

    auto consider = [&](double val) {
        if (val > best.value) {
            best.value = val;
            best.s_set.clear();
            best.t_set.clear();
            for (std::size_t i = 0; i < K; ++i)
                if (s[i]) best.s_set.push_back(i);
            for (std::size_t j = 0; j < K; ++j)
                if (t[j]) best.t_set.push_back(j);
        }
    };

    std::vector<char> start(K);
    for (int sign = 0; sign < 2; ++sign) {
        for (std::size_t i = 0; i < K * K; ++i) m[i] = sign ? -base[i] : base[i];
        std::fill(start.begin(), start.end(), 1);
        consider(alternate(start));
        for (std::size_t i = 0; i < K; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < K; ++j) acc += m[i * K + j];
            start[i] = acc >= 0.0;
        }
        consider(alternate(start));
        if (K <= 32) {
            for (std::size_t one = 0; one < K; ++one) {
                std::fill(start.begin(), start.end(), 0);
                start[one] = 1;
                consider(alternate(start));
            }
        }
        for (std::size_t r = 0; r < restarts; ++r) {
            for (std::size_t i = 0; i < K; ++i) start[i] = rng.next() & 1;
            consider(alternate(start));
        }
    }
    best.exact = false;
    return best;
}

// Exact when small enough, heuristic otherwise.
inline CutResult cut_norm(const Kernel& k, std::size_t restarts = 50, std::uint64_t seed = 1) {
    if (k.blocks() <= kMaxExactCutBlocks) return cut_norm_exact(k);
    return cut_norm_heuristic(k, restarts, seed);
}

// ||f - g||_cut without alignment.
inline CutResult cut_distance(const StepGraphon& f, const StepGraphon& g,
                              std::size_t restarts = 50, std::uint64_t seed = 1) {
    return cut_norm(difference_kernel(f, g), restarts, seed);
}

// Smallest K <= 24 whose equal-mass grid reproduces every cut point of both
// graphons (within 1e-9), so resampling at K is lossless; 24 otherwise.
inline std::size_t auto_resolution(const StepGraphon& f, const StepGraphon& g) {
    const auto cf = f.cut_points(), cg = g.cut_points();
    for (std::size_t k = 1; k <= kMaxAutoResolution; ++k) {
        auto fits = [&](const std::vector<double>& cuts) {
            for (double c : cuts) {
                const double scaled = c * static_cast<double>(k);
                if (std::fabs(scaled - std::round(scaled)) > 1e-9 * static_cast<double>(k))
                    return false;
            }
            return true;
        };
        if (fits(cf) && fits(cg)) return k;
    }
    return kMaxAutoResolution;
}

struct DeltaCutResult {
    double distance = 0.0;
    std::vector<std::size_t> permutation;
    std::size_t resolution = 0;
    bool exact = false;
};

namespace detail {

// D(pi)_ij = vf_ij - vg_{pi(i) pi(j)} on K equal blocks.
inline void permuted_difference(const std::vector<double>& vf, const std::vector<double>& vg,
                                const std::vector<std::size_t>& pi, std::size_t K,
                                std::vector<double>& out) {
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
            out[i * K + j] = vf[i * K + j] - vg[pi[i] * K + pi[j]];
}

inline std::vector<std::size_t> degree_alignment(const std::vector<double>& vf,
                                                 const std::vector<double>& vg, std::size_t K) {
    auto argsort_by_rowsum = [K](const std::vector<double>& v) {
        std::vector<double> rs(K, 0.0);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) rs[i] += v[i * K + j];
        std::vector<std::size_t> idx(K);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return rs[a] > rs[b];
        });
        return idx;
    };
    const auto af = argsort_by_rowsum(vf), ag = argsort_by_rowsum(vg);
    std::vector<std::size_t> pi(K);
    for (std::size_t r = 0; r < K; ++r) pi[af[r]] = ag[r];
    return pi;
}

}  // namespace detail

// Cut pseudometric between block structures: resample both to `resolution`
// equal-mass blocks (auto-picked losslessly when possible) and minimize the
// cut norm of the difference over block permutations. Exhaustive with
// rectangle-sum pruning up to 8 blocks; simulated annealing on transpositions
// above, re-scored exactly at the end when the kernel is small enough.
// Single-block references skip alignment entirely.
inline DeltaCutResult delta_cut(const StepGraphon& f, const StepGraphon& g,
                                std::size_t budget = 100000, std::uint64_t seed = 1,
                                std::size_t resolution = 0) {
    DeltaCutResult out;
    if (f.blocks() == 1 || g.blocks() == 1) {
        const CutResult cr = cut_distance(f, g, 50, seed);
        out.distance = cr.value;
        out.resolution = std::max(f.blocks(), g.blocks());
        out.permutation.resize(out.resolution);
        std::iota(out.permutation.begin(), out.permutation.end(), 0);
        out.exact = cr.exact;
        return out;
    }
    const std::size_t K = resolution > 0 ? resolution : auto_resolution(f, g);
    if (K < 1 || K > 64) throw std::invalid_argument("delta_cut: resolution must lie in [1,64]");
    const StepGraphon rf = f.resampled(K), rg = g.resampled(K);
    const std::vector<double>& vf = rf.values();
    const std::vector<double>& vg = rg.values();
    const std::vector<double> weights(K, 1.0 / static_cast<double>(K));
    out.resolution = K;

    std::vector<double> diff(K * K);
    Kernel kd;
    kd.weights = weights;

    if (K <= kExhaustivePermBlocks) {
        std::vector<std::size_t> perm(K);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> best_perm = perm, inc_s, inc_t;
        const double w2 = 1.0 / (static_cast<double>(K) * static_cast<double>(K));
        do {
            if (!inc_s.empty()) {
                double rect = 0.0;
                for (std::size_t i : inc_s)
                    for (std::size_t j : inc_t)
                        rect += vf[i * K + j] - vg[perm[i] * K + perm[j]];
                if (std::fabs(rect) * w2 >= best) continue;
            }
            detail::permuted_difference(vf, vg, perm, K, diff);
            kd.values = diff;
            const CutResult cr = cut_norm_exact(kd);
            if (cr.value < best) {
                best = cr.value;
                best_perm = perm;
                inc_s = cr.s_set;
                inc_t = cr.t_set;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        out.distance = best;
        out.permutation = best_perm;
        out.exact = true;
        return out;
    }

    Splitmix rng(mix64(seed ^ 0x9b97cba3f1c6d2e7ULL));
    auto energy = [&](const std::vector<std::size_t>& pi) {
        detail::permuted_difference(vf, vg, pi, K, diff);
        kd.values = diff;
        return cut_norm_heuristic(kd, 2, rng.next()).value;
    };

    std::vector<std::size_t> identity(K);
    std::iota(identity.begin(), identity.end(), 0);
    const std::vector<std::size_t> canonical = detail::degree_alignment(vf, vg, K);
    std::vector<std::size_t> best_perm = identity;
    double best_energy = energy(identity);
    {
        const double ec = energy(canonical);
        if (ec < best_energy) { best_energy = ec; best_perm = canonical; }
    }

    const std::size_t total_steps = std::max<std::size_t>(200, budget / 10);
    for (const auto& seed_perm : {identity, canonical}) {
        std::vector<std::size_t> cur = seed_perm;
        double cur_e = energy(cur);
        double temp = std::max(1e-4, 0.2 * (cur_e + 1e-6));
        for (std::size_t step = 0; step < total_steps / 2; ++step) {
            const std::size_t a = rng.below(K);
            std::size_t b = rng.below(K - 1);
            if (b >= a) ++b;
            std::swap(cur[a], cur[b]);
            const double e = energy(cur);
            const double de = e - cur_e;
            if (de <= 0.0 || rng.uniform() < std::exp(-de / temp)) {
                cur_e = e;
                if (e < best_energy) { best_energy = e; best_perm = cur; }
            } else {
                std::swap(cur[a], cur[b]);
            }
            temp *= 0.995;
        }
    }

    detail::permuted_difference(vf, vg, best_perm, K, diff);
    kd.values = diff;
    if (K <= kMaxExactCutBlocks) {
        const CutResult cr = cut_norm_exact(kd);
        out.distance = cr.value;
        out.exact = true;
    } else {
        const CutResult cr = cut_norm_heuristic(kd, 50, rng.next());
        out.distance = cr.value;
        out.exact = false;
    }
    out.permutation = best_perm;
    return out;
}

// Equal-index partition into k parts; values are edge densities between
// parts. A complete graph maps to the all-ones graphon exactly.
inline StepGraphon quotient_graphon(const SimpleGraph& g, std::size_t k) {
    const std::size_t n = g.vertex_count();
    if (k == 0 || k > n) throw std::invalid_argument("quotient_graphon: need 1 <= k <= n");
    std::vector<std::size_t> part(n), size(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        part[i] = i * k / n;
        ++size[part[i]];
    }
    std::vector<double> e(k * k, 0.0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::uint32_t v : g.neighbors(u)) {
            if (v <= u) continue;
            const std::size_t a = part[u], b = part[v];
            e[a * k + b] += 1.0;
            if (a != b) e[b * k + a] += 1.0;
        }
    std::vector<double> w(k), vals(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a) w[a] = static_cast<double>(size[a]) / static_cast<double>(n);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            double pairs;
            if (a == b)
                pairs = 0.5 * static_cast<double>(size[a]) * static_cast<double>(size[a] - 1);
            else
                pairs = static_cast<double>(size[a]) * static_cast<double>(size[b]);
            vals[a * k + b] = pairs > 0.0 ? std::clamp(e[a * k + b] / pairs, 0.0, 1.0) : 0.0;
        }
    return StepGraphon(std::move(w), std::move(vals));
}

// Distance from a sampled graph to a reference structure at a fixed
// quotient resolution.
inline double graph_to_reference_distance(const SimpleGraph& g, const StepGraphon& ref,
                                          std::size_t k, std::size_t budget = 20000,
                                          std::uint64_t seed = 1) {
    const StepGraphon q = quotient_graphon(g, k);
    return delta_cut(q, ref, budget, seed, k).distance;
}

}  // namespace graphon
