#pragma once

// Block-constant graphons (step functions on [0,1]^2) and small simple graphs.
// A StepGraphon is K block masses w_i > 0 summing to 1 plus a symmetric K x K
// value matrix with entries in [0,1]. All densities below are exact closed
// forms over blocks; nothing is quadrature.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace graphon {

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr std::size_t kMaxRefinementBlocks = 4096;
inline constexpr std::size_t kMaxPatternVertices = 8;

class SimpleGraph {
public:
    explicit SimpleGraph(std::size_t n) : adj_(n) {
        if (n == 0) throw std::invalid_argument("SimpleGraph: need at least one vertex");
    }

    static SimpleGraph from_edges(std::size_t n,
                                  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
        SimpleGraph g(n);
        for (auto [u, v] : edges) g.add_edge(u, v);
        return g;
    }

    std::size_t vertex_count() const { return adj_.size(); }
    std::size_t edge_count() const { return edges_; }

    // Set semantics: inserting an existing edge is a no-op.
    void add_edge(std::size_t u, std::size_t v) {
        if (u >= adj_.size() || v >= adj_.size())
            throw std::invalid_argument("SimpleGraph::add_edge: vertex out of range");
        if (u == v) throw std::invalid_argument("SimpleGraph::add_edge: self loop");
        auto it = std::lower_bound(adj_[u].begin(), adj_[u].end(), static_cast<std::uint32_t>(v));
        if (it != adj_[u].end() && *it == v) return;
        adj_[u].insert(it, static_cast<std::uint32_t>(v));
        auto jt = std::lower_bound(adj_[v].begin(), adj_[v].end(), static_cast<std::uint32_t>(u));
        adj_[v].insert(jt, static_cast<std::uint32_t>(u));
        ++edges_;
    }

    bool has_edge(std::size_t u, std::size_t v) const {
        if (u >= adj_.size() || v >= adj_.size()) return false;
        const auto& nu = adj_[u];
        return std::binary_search(nu.begin(), nu.end(), static_cast<std::uint32_t>(v));
    }

    // Sorted ascending.
    const std::vector<std::uint32_t>& neighbors(std::size_t v) const { return adj_.at(v); }
    std::size_t degree(std::size_t v) const { return adj_.at(v).size(); }

private:
    std::vector<std::vector<std::uint32_t>> adj_;
    std::size_t edges_ = 0;
};

inline SimpleGraph make_complete(std::size_t n) {
    SimpleGraph g(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) g.add_edge(u, v);
    return g;
}

inline SimpleGraph make_cycle(std::size_t n) {
    if (n < 3) throw std::invalid_argument("make_cycle: need n >= 3");
    SimpleGraph g(n);
    for (std::size_t u = 0; u < n; ++u) g.add_edge(u, (u + 1) % n);
    return g;
}

// Path with n vertices, n-1 edges.
inline SimpleGraph make_path(std::size_t n) {
    SimpleGraph g(n);
    for (std::size_t u = 0; u + 1 < n; ++u) g.add_edge(u, u + 1);
    return g;
}

class StepGraphon {
public:
    // values is row-major K x K. Weights must be positive and sum to 1 within
    // 1e-12; values must be symmetric within 1e-12 and inside [0,1] within
    // 1e-12. Stored values are exactly symmetrized and clamped to [0,1].
    StepGraphon(std::vector<double> weights, std::vector<double> values)
        : w_(std::move(weights)), a_(std::move(values)), k_(w_.size()) {
        validate();
    }

    StepGraphon(std::vector<double> weights, const std::vector<std::vector<double>>& rows)
        : w_(std::move(weights)), k_(w_.size()) {
        a_.reserve(k_ * k_);
        for (const auto& r : rows) {
            if (r.size() != k_) throw std::invalid_argument("StepGraphon: ragged value matrix");
            a_.insert(a_.end(), r.begin(), r.end());
        }
        validate();
    }

    static StepGraphon constant(double v) {
        return StepGraphon(std::vector<double>{1.0}, std::vector<double>{v});
    }

    // Empirical graphon f^G: n equal blocks, adjacency values, zero diagonal.
    static StepGraphon from_graph(const SimpleGraph& g) {
        const std::size_t n = g.vertex_count();
        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        std::vector<double> a(n * n, 0.0);
        for (std::size_t u = 0; u < n; ++u)
            for (std::uint32_t v : g.neighbors(u)) a[u * n + v] = 1.0;
        return StepGraphon(std::move(w), std::move(a));
    }

    std::size_t blocks() const { return k_; }
    double weight(std::size_t i) const { return w_[i]; }
    double value(std::size_t i, std::size_t j) const { return a_[i * k_ + j]; }
    const std::vector<double>& weights() const { return w_; }
    const std::vector<double>& values() const { return a_; }

    // Cumulative block boundaries; back() is exactly 1.
    std::vector<double> cut_points() const {
        std::vector<double> c(k_);
        double acc = 0.0;
        for (std::size_t i = 0; i < k_; ++i) { acc += w_[i]; c[i] = acc; }
        c.back() = 1.0;
        return c;
    }

    std::size_t block_at(double x) const {
        if (x < 0.0 || x > 1.0) throw std::domain_error("StepGraphon::block_at: x outside [0,1]");
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < k_; ++i) {
            acc += w_[i];
            if (x < acc) return i;
        }
        return k_ - 1;
    }

    double value_at(double x, double y) const { return value(block_at(x), block_at(y)); }

    StepGraphon permuted(std::span<const std::size_t> perm) const {
        if (perm.size() != k_) throw std::invalid_argument("StepGraphon::permuted: size mismatch");
        std::vector<bool> seen(k_, false);
        for (std::size_t i : perm) {
            if (i >= k_ || seen[i]) throw std::invalid_argument("StepGraphon::permuted: not a permutation");
            seen[i] = true;
        }
        std::vector<double> w(k_), a(k_ * k_);
        for (std::size_t i = 0; i < k_; ++i) w[i] = w_[perm[i]];
        for (std::size_t i = 0; i < k_; ++i)
            for (std::size_t j = 0; j < k_; ++j) a[i * k_ + j] = value(perm[i], perm[j]);
        return StepGraphon(std::move(w), std::move(a));
    }

    // Averages onto k equal-mass blocks (exact overlap integrals).
    StepGraphon resampled(std::size_t k) const {
        if (k == 0) throw std::invalid_argument("StepGraphon::resampled: k = 0");
        const auto cuts = cut_points();
        // overlap[b][i] = measure of [b/k,(b+1)/k] intersect source block i
        std::vector<double> overlap(k * k_, 0.0);
        for (std::size_t b = 0; b < k; ++b) {
            const double lo = static_cast<double>(b) / k, hi = static_cast<double>(b + 1) / k;
            double prev = 0.0;
            for (std::size_t i = 0; i < k_; ++i) {
                const double cur = cuts[i];
                const double o = std::max(0.0, std::min(hi, cur) - std::max(lo, prev));
                overlap[b * k_ + i] = o;
                prev = cur;
            }
        }
        std::vector<double> w(k, 1.0 / static_cast<double>(k));
        std::vector<double> a(k * k, 0.0);
        const double cell = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
        for (std::size_t b = 0; b < k; ++b)
            for (std::size_t c = 0; c < k; ++c) {
                double s = 0.0;
                for (std::size_t i = 0; i < k_; ++i) {
                    const double oi = overlap[b * k_ + i];
                    if (oi == 0.0) continue;
                    for (std::size_t j = 0; j < k_; ++j) {
                        const double oj = overlap[c * k_ + j];
                        if (oj != 0.0) s += oi * oj * value(i, j);
                    }
                }
                a[b * k + c] = std::clamp(s / cell, 0.0, 1.0);
            }
        return StepGraphon(std::move(w), std::move(a));
    }

private:
    void validate() {
        if (k_ == 0) throw std::invalid_argument("StepGraphon: empty weight vector");
        if (a_.size() != k_ * k_) throw std::invalid_argument("StepGraphon: value matrix is not K x K");
        double sum = 0.0;
        for (double w : w_) {
            if (!(w > 0.0)) throw std::invalid_argument("StepGraphon: weights must be positive");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > kWeightSumTol)
            throw std::invalid_argument("StepGraphon: weights must sum to 1 within 1e-12");
        for (std::size_t i = 0; i < k_; ++i)
            for (std::size_t j = i; j < k_; ++j) {
                double x = a_[i * k_ + j], y = a_[j * k_ + i];
                if (std::fabs(x - y) > 1e-12)
                    throw std::invalid_argument("StepGraphon: values must be symmetric");
                double v = 0.5 * (x + y);
                if (v < -1e-12 || v > 1.0 + 1e-12)
                    throw std::invalid_argument("StepGraphon: values must lie in [0,1]");
                v = std::clamp(v, 0.0, 1.0);
                a_[i * k_ + j] = a_[j * k_ + i] = v;
            }
    }

    std::vector<double> w_, a_;
    std::size_t k_;
};

inline double edge_density(const StepGraphon& f) {
    const std::size_t k = f.blocks();
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) s += f.weight(i) * f.weight(j) * f.value(i, j);
    return s;
}

inline double squared_edge_density(const StepGraphon& f) {
    const std::size_t k = f.blocks();
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double v = f.value(i, j);
            s += f.weight(i) * f.weight(j) * v * v;
        }
    return s;
}

inline double value_spread(const StepGraphon& f) {
    const auto& a = f.values();
    auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    return *hi - *lo;
}

// T(f) = (1/6) sum_{i,j,k} w_i w_j w_k a_ij a_jk a_ki, in [0, 1/6]. O(K^3).
inline double triangle_density(const StepGraphon& f) {
    const std::size_t k = f.blocks();
    const auto& w = f.weights();
    const auto& a = f.values();
    // m_ij = sum_l w_l a_il a_lj
    std::vector<double> m(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a[i * k + l] * w[l];
            if (ail == 0.0) continue;
            const double* row = &a[l * k];
            double* out = &m[i * k];
            for (std::size_t j = 0; j < k; ++j) out[j] += ail * row[j];
        }
    double t = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) t += w[i] * w[j] * m[i * k + j] * a[i * k + j];
    return std::clamp(t / 6.0, 0.0, 1.0 / 6.0);
}

// Homomorphism density t(H, f) over all vertex assignments [k(H)] -> blocks.
// Cost K^|V(H)|; patterns are capped at 8 vertices.
inline double hom_density(const SimpleGraph& pattern, const StepGraphon& f) {
    const std::size_t k = pattern.vertex_count();
    if (k > kMaxPatternVertices)
        throw std::length_error("hom_density: pattern has more than 8 vertices");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t u = 0; u < k; ++u)
        for (std::uint32_t v : pattern.neighbors(u))
            if (v > u) edges.emplace_back(u, v);
    const std::size_t K = f.blocks();
    std::vector<std::size_t> phi(k, 0);
    double total = 0.0;
    while (true) {
        double term = 1.0;
        for (std::size_t m = 0; m < k && term != 0.0; ++m) term *= f.weight(phi[m]);
        for (const auto& [u, v] : edges) {
            if (term == 0.0) break;
            term *= f.value(phi[u], phi[v]);
        }
        total += term;
        std::size_t pos = 0;
        while (pos < k && ++phi[pos] == K) phi[pos++] = 0;
        if (pos == k) break;
    }
    return total;
}

// f + delta(1 - f): pushes every value toward 1.
inline StepGraphon mix_toward_one(const StepGraphon& f, double delta) {
    if (delta < 0.0 || delta > 1.0) throw std::domain_error("mix_toward_one: delta outside [0,1]");
    std::vector<double> a = f.values();
    for (double& v : a) v = std::clamp(v + delta * (1.0 - v), 0.0, 1.0);
    return StepGraphon(f.weights(), std::move(a));
}

// (1-delta) f + delta p: pulls every value toward the background density.
inline StepGraphon mix_toward_p(const StepGraphon& f, double delta, double p) {
    if (delta < 0.0 || delta > 1.0) throw std::domain_error("mix_toward_p: delta outside [0,1]");
    if (p < 0.0 || p > 1.0) throw std::domain_error("mix_toward_p: p outside [0,1]");
    std::vector<double> a = f.values();
    for (double& v : a) v = std::clamp((1.0 - delta) * v + delta * p, 0.0, 1.0);
    return StepGraphon(f.weights(), std::move(a));
}

// Overlay of both partitions: returns (f', g') on identical weights such that
// f' == f and g' == g as functions. Throws length_error past 4096 blocks.
inline std::pair<StepGraphon, StepGraphon> common_refinement(const StepGraphon& f,
                                                             const StepGraphon& g) {
    const auto cf = f.cut_points(), cg = g.cut_points();
    std::vector<double> cuts;
    cuts.reserve(cf.size() + cg.size());
    std::merge(cf.begin(), cf.end(), cg.begin(), cg.end(), std::back_inserter(cuts));
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::fabs(a - b) <= 1e-14; }),
               cuts.end());
    if (cuts.empty() || std::fabs(cuts.back() - 1.0) > 1e-12) cuts.push_back(1.0);
    cuts.back() = 1.0;
    if (cuts.size() > kMaxRefinementBlocks)
        throw std::length_error("common_refinement: more than 4096 blocks");

    const std::size_t k = cuts.size();
    std::vector<double> w(k);
    std::vector<std::size_t> fi(k), gi(k);
    double prev = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
        w[b] = cuts[b] - prev;
        const double mid = 0.5 * (prev + cuts[b]);
        fi[b] = f.block_at(mid);
        gi[b] = g.block_at(mid);
        prev = cuts[b];
        if (!(w[b] > 0.0)) throw std::invalid_argument("common_refinement: degenerate block");
    }
    std::vector<double> fa(k * k), ga(k * k);
    for (std::size_t b = 0; b < k; ++b)
        for (std::size_t c = 0; c < k; ++c) {
            fa[b * k + c] = f.value(fi[b], fi[c]);
            ga[b * k + c] = g.value(gi[b], gi[c]);
        }
    return {StepGraphon(w, std::move(fa)), StepGraphon(std::move(w), std::move(ga))};
}

// L1 distance of the kernels; exact via common refinement.
inline double l1_distance(const StepGraphon& f, const StepGraphon& g) {
    const auto [rf, rg] = common_refinement(f, g);
    const std::size_t k = rf.blocks();
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            s += rf.weight(i) * rf.weight(j) * std::fabs(rf.value(i, j) - rg.value(i, j));
    return s;
}

}  // namespace graphon
