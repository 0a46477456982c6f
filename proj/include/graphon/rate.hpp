#pragma once

// Relative-entropy rate function and the triangle upper-tail exponent.
//
// ip_scalar(u,p) is the Bernoulli relative entropy (halved, per unordered
// pair); h_p(t) is the clique/constant tail exponent, zero up to p^3/6 and
// I_p((6t)^{1/3}) beyond. The convex minorant of h_p over [0,1/6] separates
// replica-symmetric points (h touches its minorant) from symmetry-broken
// ones (strict gap). Query points are inserted into the hull sample set, so
// a point on the convex part certifies at gap exactly 0 regardless of grid
// resolution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace graphon {

namespace detail {
// x log(x/q) with the 0 log 0 = 0 convention.
inline double xlog(double x, double q) { return x == 0.0 ? 0.0 : x * std::log(x / q); }
}  // namespace detail

// (1/2)[u log(u/p) + (1-u) log((1-u)/(1-p))], u in [0,1], p in (0,1).
inline double ip_scalar(double u, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("ip_scalar: p must lie in (0,1)");
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("ip_scalar: u must lie in [0,1]");
    return 0.5 * (detail::xlog(u, p) + detail::xlog(1.0 - u, 1.0 - p));
}

// d/du of ip_scalar; diverges at the endpoints.
inline double ip_scalar_deriv(double u, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("ip_scalar_deriv: p must lie in (0,1)");
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("ip_scalar_deriv: u must lie in (0,1)");
    return 0.5 * std::log(u * (1.0 - p) / ((1.0 - u) * p));
}

// I_p(f) = sum_{i,j} w_i w_j ip_scalar(a_ij, p).
inline double ip_graphon(const StepGraphon& f, double p) {
    const std::size_t k = f.blocks();
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            s += f.weight(i) * f.weight(j) * ip_scalar(f.value(i, j), p);
    return s;
}

// Upper-tail exponent h_p(t) on [0, 1/6].
inline double h_p(double t, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("h_p: p must lie in (0,1)");
    if (!(t >= 0.0 && t <= 1.0 / 6.0 + 1e-15)) throw std::domain_error("h_p: t must lie in [0,1/6]");
    const double t0 = p * p * p / 6.0;
    if (t <= t0) return 0.0;
    const double u = std::min(1.0, std::cbrt(6.0 * t));
    return ip_scalar(u, p);
}

// Piecewise-linear convex lower hull of sample points, queried by
// interpolation. Vertices have strictly increasing x.
struct ConvexMinorant {
    std::vector<double> x, y;

    double value(double q) const {
        if (x.empty()) throw std::logic_error("ConvexMinorant: empty hull");
        if (q < x.front() - 1e-15 || q > x.back() + 1e-15)
            throw std::domain_error("ConvexMinorant::value: query outside hull range");
        q = std::clamp(q, x.front(), x.back());
        const auto it = std::upper_bound(x.begin(), x.end(), q);
        if (it == x.begin()) return y.front();
        if (it == x.end()) return y.back();
        const std::size_t j = static_cast<std::size_t>(it - x.begin());
        const double s = (y[j] - y[j - 1]) / (x[j] - x[j - 1]);
        return y[j - 1] + s * (q - x[j - 1]);
    }

    // Slopes of the segments meeting q. At a vertex these differ; inside a
    // segment they coincide; at the extremes the one-sided value is reused.
    std::pair<double, double> slopes(double q) const {
        if (x.size() < 2) return {0.0, 0.0};
        if (q < x.front() - 1e-15 || q > x.back() + 1e-15)
            throw std::domain_error("ConvexMinorant::slopes: query outside hull range");
        q = std::clamp(q, x.front(), x.back());
        auto seg = [&](std::size_t j) { return (y[j + 1] - y[j]) / (x[j + 1] - x[j]); };
        const auto it = std::lower_bound(x.begin(), x.end(), q);
        if (it != x.end() && *it == q) {
            const std::size_t j = static_cast<std::size_t>(it - x.begin());
            const double left = j > 0 ? seg(j - 1) : seg(0);
            const double right = j + 1 < x.size() ? seg(j) : seg(x.size() - 2);
            return {left, right};
        }
        const std::size_t j = static_cast<std::size_t>(it - x.begin());
        const double s = seg(j == 0 ? 0 : j - 1);
        return {s, s};
    }
};

// Lower convex hull (Andrew monotone chain) of points sorted by strictly
// increasing x. Collinear interior points are dropped.
inline ConvexMinorant convex_minorant(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("convex_minorant: size mismatch");
    if (xs.size() < 2) throw std::invalid_argument("convex_minorant: need at least two points");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("convex_minorant: x must be strictly increasing");
    std::vector<std::size_t> hull;
    hull.reserve(xs.size());
    auto cross = [&](std::size_t a, std::size_t b, std::size_t c) {
        return (xs[b] - xs[a]) * (ys[c] - ys[a]) - (ys[b] - ys[a]) * (xs[c] - xs[a]);
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) <= 0.0)
            hull.pop_back();
        hull.push_back(i);
    }
    ConvexMinorant m;
    m.x.reserve(hull.size());
    m.y.reserve(hull.size());
    for (std::size_t i : hull) {
        m.x.push_back(xs[i]);
        m.y.push_back(ys[i]);
    }
    return m;
}

// Convex minorant of t -> h_p(t) over [0, 1/6], sampled on a uniform grid
// with the kink p^3/6 and every query inserted so certification at those
// points is grid independent.
inline ConvexMinorant h_p_minorant(double p, const std::vector<double>& queries,
                                   std::size_t grid_points = 10000) {
    if (grid_points < 2) throw std::invalid_argument("h_p_minorant: need at least two grid points");
    const double tmax = 1.0 / 6.0 - 1e-6;
    std::vector<double> xs;
    xs.reserve(grid_points + queries.size() + 2);
    for (std::size_t i = 0; i < grid_points; ++i)
        xs.push_back(tmax * static_cast<double>(i) / static_cast<double>(grid_points - 1));
    const double t0 = p * p * p / 6.0;
    if (t0 < 1.0 / 6.0) xs.push_back(t0);
    for (double q : queries) {
        if (!(q >= 0.0 && q <= 1.0 / 6.0 + 1e-15))
            throw std::domain_error("h_p_minorant: query outside [0,1/6]");
        xs.push_back(std::min(q, 1.0 / 6.0));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = h_p(xs[i], p);
    return convex_minorant(xs, ys);
}

enum class Phase { TrivialZero, ReplicaSymmetric, Boundary, Broken };

inline const char* phase_name(Phase ph) {
    switch (ph) {
        case Phase::TrivialZero: return "trivial_zero";
        case Phase::ReplicaSymmetric: return "replica_symmetric";
        case Phase::Boundary: return "boundary";
        case Phase::Broken: return "broken";
    }
    return "unknown";
}

struct PhasePoint {
    double p = 0.0, t = 0.0;
    double h = 0.0, h_hat = 0.0;
    double beta = 0.0, beta_left = 0.0, beta_right = 0.0;
    Phase phase = Phase::TrivialZero;
};

namespace detail {
inline PhasePoint classify_with(const ConvexMinorant& m, double p, double t, double tol) {
    PhasePoint r;
    r.p = p;
    r.t = t;
    const double t0 = p * p * p / 6.0;
    if (t <= t0) {
        r.phase = Phase::TrivialZero;
        return r;
    }
    r.h = h_p(t, p);
    r.h_hat = m.value(t);
    const auto [bl, br] = m.slopes(t);
    r.beta_left = bl;
    r.beta_right = br;
    r.beta = 0.5 * (bl + br);
    const double gap = std::max(0.0, r.h - r.h_hat);
    const double s = tol * (1.0 + std::fabs(r.h));
    if (gap <= s) r.phase = Phase::ReplicaSymmetric;
    else if (gap <= 10.0 * s) r.phase = Phase::Boundary;
    else r.phase = Phase::Broken;
    return r;
}
}  // namespace detail

// Certifies one (p,t). gap = h - minorant; the band tol*(1+|h|) separates
// replica-symmetric (gap below) from broken (gap above ten bands), with an
// explicit boundary verdict in between rather than a coin flip.
inline PhasePoint classify_phase(double p, double t, std::size_t grid_points = 10000,
                                 double tol = 1e-9) {
    if (!(t >= 0.0 && t <= 1.0 / 6.0 + 1e-15))
        throw std::domain_error("classify_phase: t must lie in [0,1/6]");
    const ConvexMinorant m = h_p_minorant(p, {t}, grid_points);
    return detail::classify_with(m, p, t, tol);
}

// Classifies many t against a single shared hull (all queries inserted).
inline std::vector<PhasePoint> phase_diagram(double p, const std::vector<double>& ts,
                                             std::size_t grid_points = 10000, double tol = 1e-9) {
    for (double t : ts)
        if (!(t >= 0.0 && t <= 1.0 / 6.0 + 1e-15))
            throw std::domain_error("phase_diagram: t must lie in [0,1/6]");
    const ConvexMinorant m = h_p_minorant(p, ts, grid_points);
    std::vector<PhasePoint> rows;
    rows.reserve(ts.size());
    for (double t : ts) rows.push_back(detail::classify_with(m, p, t, tol));
    return rows;
}

// True when a broken window sits strictly between two replica-symmetric
// stretches as t increases (the reentrant small-p structure).
inline bool has_double_transition(const std::vector<PhasePoint>& rows) {
    bool saw_rs = false, saw_broken_after_rs = false;
    for (const auto& r : rows) {
        if (r.phase == Phase::ReplicaSymmetric) {
            if (saw_broken_after_rs) return true;
            saw_rs = true;
        } else if (r.phase == Phase::Broken && saw_rs) {
            saw_broken_after_rs = true;
        }
    }
    return false;
}

// Transition-aware default grid: dense log spacing just above p^3/6, broad
// coverage of the interior, and probes hugging 1/6 where the upper
// replica-symmetric flank is thin. Sorted, deduplicated, all in (0, 1/6].
inline std::vector<double> default_phase_grid(double p, std::size_t count = 200) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("default_phase_grid: p must lie in (0,1)");
    if (count < 16) count = 16;
    const double t0 = p * p * p / 6.0;
    const double tmax = 1.0 / 6.0;
    std::vector<double> ts;
    ts.reserve(count + 16);
    auto logspace = [](double a, double b, std::size_t n, auto&& emit) {
        const double la = std::log(a), lb = std::log(b);
        for (std::size_t i = 0; i < n; ++i)
            emit(std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1)));
    };
    ts.push_back(0.5 * t0);
    ts.push_back(t0);
    const std::size_t na = count / 4, nc = count / 4, nb = count - na - nc;
    // lower flank: multipliers 1+eps, eps from 1e-3 to 1
    logspace(1e-3, 1.0, na, [&](double e) { ts.push_back(t0 * (1.0 + e)); });
    // interior
    logspace(std::min(2.0 * t0, tmax / 2.0), tmax - 1e-3, nb, [&](double t) { ts.push_back(t); });
    // upper flank: distance below 1/6 from 1e-3 down to 2e-6
    logspace(1e-3, 2e-6, nc, [&](double d) { ts.push_back(tmax - d); });
    for (int k = 1; k <= 3; ++k) ts.push_back(t0 * (1.0 + k * 1e-3));
    for (double d : {4e-5, 2e-5, 1e-5, 5e-6, 2e-6}) ts.push_back(tmax - d);
    std::vector<double> out;
    out.reserve(ts.size());
    for (double t : ts)
        if (t > 0.0 && t <= tmax) out.push_back(t);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::fabs(a - b) <= 1e-18; }),
              out.end());
    return out;
}

}  // namespace graphon
