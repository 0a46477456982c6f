#pragma once

// Random graph sampling and tail-probability estimation.
//
// Edges are drawn from counter-based per-edge streams, so a sample is a pure
// function of (seed, n, model) independent of traversal order and thread
// count. The tilted estimator draws from an inhomogeneous proposal and
// reweights back to ER(n,p); with the identity tilt every log-weight term is
// exactly 0.0, so it degrades to naive Monte Carlo bitwise. Accumulation is
// chunked at a fixed width and merged in chunk order, which keeps results
// byte-identical for any --threads value.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "cut.hpp"
#include "parallel.hpp"
#include "rate.hpp"
#include "rng.hpp"
#include "solve.hpp"

namespace graphon {

inline constexpr std::size_t kMaxExactTailVertices = 7;
inline constexpr std::size_t kSampleChunk = 256;

inline SimpleGraph sample_inhomogeneous(std::size_t n, const StepGraphon& h, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_inhomogeneous: need n >= 1");
    std::vector<std::size_t> block(n);
    for (std::size_t i = 0; i < n; ++i)
        block[i] = h.block_at((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    SimpleGraph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (edge_uniform(seed, i, j) < h.value(block[i], block[j])) g.add_edge(i, j);
    return g;
}

inline SimpleGraph sample_er(std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("sample_er: p outside [0,1]");
    return sample_inhomogeneous(n, StepGraphon::constant(p), seed);
}

// Exact triangle count by sorted-adjacency intersection, O(sum deg^2).
inline long long triangle_count(const SimpleGraph& g) {
    const std::size_t n = g.vertex_count();
    long long count = 0;
    for (std::size_t u = 0; u < n; ++u) {
        const auto& nu = g.neighbors(u);
        for (std::uint32_t v : nu) {
            if (v <= u) continue;
            const auto& nv = g.neighbors(v);
            auto a = std::upper_bound(nu.begin(), nu.end(), v);
            auto b = std::upper_bound(nv.begin(), nv.end(), v);
            while (a != nu.end() && b != nv.end()) {
                if (*a < *b) ++a;
                else if (*b < *a) ++b;
                else { ++count; ++a; ++b; }
            }
        }
    }
    return count;
}

// Smallest integer count whose density reaches t: T >= t n^3.
inline long long triangle_threshold(double t, std::size_t n) {
    const double cube = static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(n);
    const double raw = std::ceil(t * cube - 1e-9);
    return raw <= 0.0 ? 0 : static_cast<long long>(raw);
}

// P(T >= t n^3) under ER(n,p) by enumerating all 2^C(n,2) labeled graphs.
inline double exact_tail(std::size_t n, double p, double t, unsigned threads = 0) {
    if (n < 1) throw std::invalid_argument("exact_tail: need n >= 1");
    if (n > kMaxExactTailVertices) throw std::length_error("exact_tail: n must be at most 7");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("exact_tail: p outside [0,1]");
    const std::size_t pairs = n * (n - 1) / 2;
    // pair (i<j) -> bit index
    std::vector<std::vector<std::size_t>> bit(n, std::vector<std::size_t>(n, 0));
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            bit[i][j] = bit[j][i] = next;
            ++next;
        }
    std::vector<std::uint32_t> tri_masks;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                tri_masks.push_back((1u << bit[i][j]) | (1u << bit[j][k]) | (1u << bit[i][k]));
    std::vector<double> edge_prob(pairs + 1);
    for (std::size_t e = 0; e <= pairs; ++e)
        edge_prob[e] = std::pow(p, static_cast<double>(e)) *
                       std::pow(1.0 - p, static_cast<double>(pairs - e));
    const long long thr = triangle_threshold(t, n);
    const std::uint64_t total = 1ULL << pairs;
    const std::uint64_t span = 1ULL << 16;
    const std::size_t chunks = static_cast<std::size_t>((total + span - 1) / span);
    std::vector<double> partial(chunks, 0.0);
    parallel_chunks(chunks, threads, [&](std::size_t c) {
        const std::uint64_t lo = static_cast<std::uint64_t>(c) * span;
        const std::uint64_t hi = std::min(total, lo + span);
        double acc = 0.0;
        for (std::uint64_t code = lo; code < hi; ++code) {
            long long tri = 0;
            for (std::uint32_t msk : tri_masks)
                if ((static_cast<std::uint32_t>(code) & msk) == msk) ++tri;
            if (tri >= thr) acc += edge_prob[static_cast<std::size_t>(std::popcount(code))];
        }
        partial[c] = acc;
    });
    double prob = 0.0;
    for (double x : partial) prob += x;
    return std::min(1.0, prob);
}

struct TailEstimate {
    std::size_t n = 0;
    double p = 0.0, t = 0.0;
    double log_prob_per_n2 = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    StepGraphon tilt = StepGraphon::constant(0.5);
    std::size_t accepted = 0;
};

// log dER(x)/dQ(x): sum over pairs of x log(p/q) + (1-x) log((1-p)/(1-q)).
// Terms with q == p are exactly zero.
inline double log_likelihood_ratio(const SimpleGraph& g, double p, const StepGraphon& tilt) {
    const std::size_t n = g.vertex_count();
    std::vector<std::size_t> block(n);
    for (std::size_t i = 0; i < n; ++i)
        block[i] = tilt.block_at((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    double lw = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double q = tilt.value(block[i], block[j]);
            if (q == p) continue;
            if (g.has_edge(i, j)) lw += std::log(p / q);
            else lw += std::log((1.0 - p) / (1.0 - q));
        }
    return lw;
}

namespace detail {

// Adjacency as packed bit rows for fast triangle counts at sampling scale.
struct BitGraph {
    std::size_t n = 0, words = 0;
    std::vector<std::uint64_t> rows;

    explicit BitGraph(std::size_t nn) : n(nn), words((nn + 63) / 64), rows(nn * words, 0) {}

    void set(std::size_t i, std::size_t j) {
        rows[i * words + j / 64] |= 1ULL << (j % 64);
        rows[j * words + i / 64] |= 1ULL << (i % 64);
    }
    bool get(std::size_t i, std::size_t j) const {
        return (rows[i * words + j / 64] >> (j % 64)) & 1ULL;
    }

    long long triangles() const {
        long long count = 0;
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v) {
                if (!get(u, v)) continue;
                // common neighbors w > v
                const std::uint64_t* ru = &rows[u * words];
                const std::uint64_t* rv = &rows[v * words];
                for (std::size_t w = v / 64; w < words; ++w) {
                    std::uint64_t x = ru[w] & rv[w];
                    if (w == v / 64) x &= ~((2ULL << (v % 64)) - 1);
                    count += std::popcount(x);
                }
            }
        return count;
    }
};

struct TiltPlan {
    std::size_t n = 0;
    std::vector<std::size_t> block;
    const StepGraphon* tilt = nullptr;
    double p = 0.0;

    TiltPlan(std::size_t nn, const StepGraphon& h, double pp) : n(nn), block(nn), tilt(&h), p(pp) {
        for (std::size_t i = 0; i < n; ++i)
            block[i] = h.block_at((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    }

    BitGraph draw(std::uint64_t seed) const {
        BitGraph g(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (edge_uniform(seed, i, j) < tilt->value(block[i], block[j])) g.set(i, j);
        return g;
    }

    double log_weight(const BitGraph& g) const {
        double lw = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double q = tilt->value(block[i], block[j]);
                if (q == p) continue;
                lw += g.get(i, j) ? std::log(p / q) : std::log((1.0 - p) / (1.0 - q));
            }
        return lw;
    }
};

inline std::uint64_t sample_seed(std::uint64_t seed, std::size_t k) {
    return mix64(seed ^ (0x5851f42d4c957f2dULL * (static_cast<std::uint64_t>(k) + 1)));
}

}  // namespace detail

// Importance-sampled upper-tail probability. Estimates P(T >= t n^3) as the
// weighted acceptance mean under the tilt and reports n^{-2} log of it with
// a delta-method standard error on the log scale. Zero acceptances yield
// -inf / +inf: the tilt is too weak for the event.
inline TailEstimate tilted_tail_estimate(std::size_t n, double p, double t,
                                         const StepGraphon& tilt, std::size_t samples,
                                         std::uint64_t seed, unsigned threads = 0) {
    if (n < 2) throw std::invalid_argument("tilted_tail_estimate: need n >= 2");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("tilted_tail_estimate: p outside (0,1)");
    if (samples < 100) throw std::invalid_argument("tilted_tail_estimate: need samples >= 100");
    for (double q : tilt.values())
        if (!(q > 0.0 && q < 1.0))
            throw std::domain_error("tilted_tail_estimate: tilt values must lie strictly in (0,1)");

    const long long thr = triangle_threshold(t, n);
    const detail::TiltPlan plan(n, tilt, p);

    struct Chunk {
        double lmax = -std::numeric_limits<double>::infinity();
        double s1 = 0.0, s2 = 0.0;
        std::size_t accepted = 0;
    };
    const std::size_t chunks = (samples + kSampleChunk - 1) / kSampleChunk;
    std::vector<Chunk> part(chunks);
    parallel_chunks(chunks, threads, [&](std::size_t c) {
        Chunk& out = part[c];
        std::vector<double> lws;
        const std::size_t lo = c * kSampleChunk, hi = std::min(samples, lo + kSampleChunk);
        for (std::size_t k = lo; k < hi; ++k) {
            const detail::BitGraph g = plan.draw(detail::sample_seed(seed, k));
            if (g.triangles() < thr) continue;
            lws.push_back(plan.log_weight(g));
        }
        if (lws.empty()) return;
        out.lmax = *std::max_element(lws.begin(), lws.end());
        for (double lw : lws) {
            const double e = std::exp(lw - out.lmax);
            out.s1 += e;
            out.s2 += e * e;
        }
        out.accepted = lws.size();
    });

    double L = -std::numeric_limits<double>::infinity();
    for (const Chunk& c : part) L = std::max(L, c.lmax);
    double s1 = 0.0, s2 = 0.0;
    std::size_t accepted = 0;
    for (const Chunk& c : part) {
        if (c.accepted == 0) continue;
        const double scale = std::exp(c.lmax - L);
        s1 += c.s1 * scale;
        s2 += c.s2 * scale * scale;
        accepted += c.accepted;
    }

    TailEstimate est;
    est.n = n;
    est.p = p;
    est.t = t;
    est.samples = samples;
    est.tilt = tilt;
    est.accepted = accepted;
    if (accepted == 0) {
        est.log_prob_per_n2 = -std::numeric_limits<double>::infinity();
        est.std_error = std::numeric_limits<double>::infinity();
        return est;
    }
    const double N = static_cast<double>(samples);
    const double log_prob = L + std::log(s1) - std::log(N);
    est.log_prob_per_n2 =
        std::min(0.0, log_prob) / (static_cast<double>(n) * static_cast<double>(n));
    // se on the log scale: sd(w 1)/ (sqrt(N) mean) with the exp(L) scale cancelling
    const double var_num = std::max(0.0, N * s2 - s1 * s1);
    est.std_error = samples > 1 ? std::sqrt(var_num / (N - 1.0)) / s1 : 0.0;
    return est;
}

struct ConditionalRow {
    std::string ref_label;
    double mean_distance = 0.0;
    double std_error = 0.0;
    std::size_t accepted_samples = 0;
};

// Proposal target nudged upward so typical proposal draws clear the integer
// threshold ceil(t n^3): the graphon-scale optimizer sits a few triangles
// under it at finite n.
inline double boosted_target(double t, std::size_t n) {
    if (!(t > 0.0)) return std::max(0.0, t);
    const double b = std::cbrt(6.0 * t);
    const double tb = t * (1.0 + 4.0 / (static_cast<double>(n) * b));
    return std::min(tb, 1.0 / 6.0 - 1e-9);
}

// Values pushed strictly inside (0,1) so a clique-like optimizer is a valid
// proposal.
inline StepGraphon soften_tilt(const StepGraphon& g, double eps = 1e-9) {
    std::vector<double> a = g.values();
    for (double& v : a) v = std::clamp(v, eps, 1.0 - eps);
    return StepGraphon(g.weights(), std::move(a));
}

// Conditional structure check: sample from a tilted proposal, keep graphs
// with T >= t n^3, reweight to the conditional ER law, and report the
// weighted mean cut distance from the K-block quotient to each reference.
// Default proposal: the variational optimizer at the boosted target,
// softened into (0,1). Any valid proposal leaves the estimand unchanged.
inline std::vector<ConditionalRow> conditional_structure_experiment(
    std::size_t n, double p, double t,
    const std::vector<std::pair<std::string, StepGraphon>>& refs, std::size_t K,
    std::size_t samples, std::uint64_t seed, const StepGraphon* tilt = nullptr,
    unsigned threads = 0, std::size_t cut_budget = 20000, std::size_t solver_blocks = 16) {
    if (n < 2) throw std::invalid_argument("conditional_structure_experiment: need n >= 2");
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("conditional_structure_experiment: p outside (0,1)");
    if (K < 1 || K > n)
        throw std::invalid_argument("conditional_structure_experiment: need 1 <= K <= n");
    if (samples < 100)
        throw std::invalid_argument("conditional_structure_experiment: need samples >= 100");
    if (refs.empty())
        throw std::invalid_argument("conditional_structure_experiment: need at least one reference");

    StepGraphon proposal = StepGraphon::constant(p);
    if (tilt != nullptr) {
        proposal = soften_tilt(*tilt);
    } else {
        const double tb = boosted_target(t, n);
        proposal = soften_tilt(solve_phi(p, tb, solver_blocks).optimizer);
    }

    const long long thr = triangle_threshold(t, n);
    const detail::TiltPlan plan(n, proposal, p);
    const std::size_t R = refs.size();

    struct Row {
        bool accepted = false;
        double lw = 0.0;
        std::vector<double> dist;
    };
    std::vector<Row> rows(samples);
    const std::size_t chunk = 16;
    const std::size_t chunks = (samples + chunk - 1) / chunk;
    parallel_chunks(chunks, threads, [&](std::size_t c) {
        const std::size_t lo = c * chunk, hi = std::min(samples, lo + chunk);
        for (std::size_t k = lo; k < hi; ++k) {
            const std::uint64_t sk = detail::sample_seed(seed, k);
            const detail::BitGraph bg = plan.draw(sk);
            if (bg.triangles() < thr) continue;
            Row& row = rows[k];
            row.accepted = true;
            row.lw = plan.log_weight(bg);
            SimpleGraph g(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (bg.get(i, j)) g.add_edge(i, j);
            row.dist.resize(R);
            for (std::size_t r = 0; r < R; ++r)
                row.dist[r] =
                    graph_to_reference_distance(g, refs[r].second, K, cut_budget, mix64(sk + r));
        }
    });

    double lmax = -std::numeric_limits<double>::infinity();
    std::size_t accepted = 0;
    for (const Row& r : rows)
        if (r.accepted) {
            lmax = std::max(lmax, r.lw);
            ++accepted;
        }
    std::vector<ConditionalRow> out(R);
    for (std::size_t r = 0; r < R; ++r) {
        out[r].ref_label = refs[r].first;
        out[r].accepted_samples = accepted;
    }
    if (accepted == 0) {
        for (auto& o : out) {
            o.mean_distance = std::numeric_limits<double>::quiet_NaN();
            o.std_error = std::numeric_limits<double>::quiet_NaN();
        }
        return out;
    }
    for (std::size_t r = 0; r < R; ++r) {
        double sw = 0.0;
        for (const Row& row : rows)
            if (row.accepted) sw += std::exp(row.lw - lmax);
        double mean = 0.0;
        for (const Row& row : rows)
            if (row.accepted) mean += std::exp(row.lw - lmax) * row.dist[r];
        mean /= sw;
        double var = 0.0;
        for (const Row& row : rows)
            if (row.accepted) {
                const double w = std::exp(row.lw - lmax);
                const double d = row.dist[r] - mean;
                var += w * w * d * d;
            }
        out[r].mean_distance = mean;
        out[r].std_error = std::sqrt(var) / sw;
    }
    return out;
}

}  // namespace graphon
