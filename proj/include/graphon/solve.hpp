#pragma once

// Variational solver for phi(p,t) = inf { I_p(f) : T(f) >= t } over K
// equal-mass blocks, with the two closed-form candidates (constant and
// clique) injected exactly.
//
// Two engines share a multi-start pool. FixedPoint iterates the damped
// stationarity map a <- p e^{beta m} / (p e^{beta m} + 1 - p) and bisects
// beta until T crosses t; every beta evaluation restarts from the branch's
// original start, because warm starts slide off the clique branch onto the
// constant one near the phase boundary. ProjectedGradient minimizes
// I_p + mu max(0, t - T)^2 over an increasing penalty schedule with
// backtracking on the penalized objective. Each branch is retargeted onto
// T = t by mixing toward the constant p (never raises I_p, by convexity)
// or toward 1 when short. Reported phi-hat is an upper bound on phi within
// the block class; no global certificate is claimed.

#include <algorithm>
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

namespace graphon {

inline constexpr double kFeasibilitySlack = 1e-8;
inline constexpr std::size_t kMaxSolverBlocks = 64;

enum class SolveMethod { FixedPoint, ProjectedGradient, CandidateConstant, CandidateClique };

inline const char* method_name(SolveMethod m) {
    switch (m) {
        case SolveMethod::FixedPoint: return "fixed_point";
        case SolveMethod::ProjectedGradient: return "projected_gradient";
        case SolveMethod::CandidateConstant: return "candidate_constant";
        case SolveMethod::CandidateClique: return "candidate_clique";
    }
    return "unknown";
}

struct MultistartRecord {
    std::string label;
    double objective = 0.0;
};

struct SolveOptions {
    std::uint64_t seed = 1;
    std::size_t random_starts = 8;
    bool use_fixed_point = true;
    bool use_projected_gradient = true;
    std::size_t fp_sweeps = 4000;
    double fp_damping = 0.5;
    double fp_tol = 1e-13;
    double beta_max = 200.0;
    std::size_t beta_bisections = 48;
    std::vector<double> penalty = {10.0, 100.0, 1000.0, 10000.0};
    std::size_t pg_iterations = 2000;
    unsigned threads = 0;
};

struct SolveResult {
    StepGraphon optimizer = StepGraphon::constant(0.0);
    double objective = 0.0;
    double achieved_t = 0.0;
    SolveMethod method = SolveMethod::CandidateConstant;
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<MultistartRecord> multistart_log;
    std::vector<StepGraphon> distinct_optima;
};

// Constant graphon c_t with T = t exactly.
inline StepGraphon candidate_constant(double t) {
    if (!(t >= 0.0 && t < 1.0 / 6.0)) throw std::domain_error("candidate_constant: t outside [0,1/6)");
    return StepGraphon::constant(std::cbrt(6.0 * t));
}

// Clique graphon chi_t: blocks [b, 1-b] with b = (6t)^{1/3}, values 1 on the
// clique block, 0 elsewhere; T = t exactly.
inline StepGraphon candidate_clique(double t) {
    if (!(t > 0.0 && t < 1.0 / 6.0)) throw std::domain_error("candidate_clique: t outside (0,1/6)");
    const double b = std::cbrt(6.0 * t);
    return StepGraphon({b, 1.0 - b}, {1.0, 0.0, 0.0, 0.0});
}

namespace detail {

// Equal-mass K-block state as a flat symmetric K x K value matrix.
// m_ij = (1/K) sum_k a_ik a_kj carries the block weight already.
inline void dense_m(const std::vector<double>& a, std::size_t K, std::vector<double>& m) {
    std::fill(m.begin(), m.end(), 0.0);
    const double inv = 1.0 / static_cast<double>(K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const double aik = a[i * K + k] * inv;
            if (aik == 0.0) continue;
            const double* row = &a[k * K];
            double* out = &m[i * K];
            for (std::size_t j = 0; j < K; ++j) out[j] += aik * row[j];
        }
}

inline double dense_T(const std::vector<double>& a, const std::vector<double>& m, std::size_t K) {
    double s = 0.0;
    for (std::size_t i = 0; i < K * K; ++i) s += a[i] * m[i];
    return s / (6.0 * static_cast<double>(K) * static_cast<double>(K));
}

inline double dense_I(const std::vector<double>& a, std::size_t K, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < K * K; ++i) s += ip_scalar(a[i], p);
    return s / (static_cast<double>(K) * static_cast<double>(K));
}

inline StepGraphon dense_to_graphon(std::vector<double> a, std::size_t K) {
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j) {
            const double v = 0.5 * (a[i * K + j] + a[j * K + i]);
            a[i * K + j] = a[j * K + i] = std::clamp(v, 0.0, 1.0);
        }
    for (std::size_t i = 0; i < K; ++i) a[i * K + i] = std::clamp(a[i * K + i], 0.0, 1.0);
    return StepGraphon(std::vector<double>(K, 1.0 / static_cast<double>(K)), std::move(a));
}

struct BranchOutcome {
    std::vector<double> a;
    bool converged = false;
    std::size_t iterations = 0;
};

// Damped fixed-point relaxation at fixed beta, always from `start`.
// Returns the final residual; sweeps are accumulated into `used`.
inline double fp_relax(const std::vector<double>& start, std::size_t K, double p, double beta,
                       const SolveOptions& opts, std::vector<double>& a, std::vector<double>& m,
                       std::size_t& used) {
    a = start;
    const double odds = (1.0 - p) / p;
    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t sweep = 0; sweep < opts.fp_sweeps; ++sweep) {
        dense_m(a, K, m);
        residual = 0.0;
        for (std::size_t i = 0; i < K * K; ++i) {
            const double target = 1.0 / (1.0 + odds * std::exp(-beta * m[i]));
            residual = std::max(residual, std::fabs(target - a[i]));
            a[i] += opts.fp_damping * (target - a[i]);
        }
        ++used;
        if (residual <= opts.fp_tol) break;
    }
    return residual;
}

inline BranchOutcome fixed_point_branch(const std::vector<double>& start, std::size_t K, double p,
                                        double t, const SolveOptions& opts) {
    BranchOutcome out;
    std::vector<double> a(K * K), m(K * K);
    std::vector<double> best_a;
    double best_obj = std::numeric_limits<double>::infinity();
    bool best_resid_ok = false;

    auto evaluate = [&](double beta) {
        const double residual = fp_relax(start, K, p, beta, opts, a, m, out.iterations);
        const double T = dense_T(a, m, K);
        if (T >= t - kFeasibilitySlack) {
            const double obj = dense_I(a, K, p);
            if (obj < best_obj) {
                best_obj = obj;
                best_a = a;
                best_resid_ok = residual <= opts.fp_tol;
            }
        }
        return T;
    };

    double lo = 0.0, hi = opts.beta_max;
    const double t_hi = evaluate(hi);
    if (t_hi < t - kFeasibilitySlack) {
        // Even the hardest tilt cannot reach t from this start.
        out.a = a;
        out.converged = false;
        return out;
    }
    for (std::size_t it = 0; it < opts.beta_bisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double T = evaluate(mid);
        if (T >= t - kFeasibilitySlack) hi = mid;
        else lo = mid;
    }
    out.a = best_a;
    out.converged = best_resid_ok;
    return out;
}

// Gradient of I_p + mu max(0, t - T)^2 in the ordered-entry parametrization.
inline void pg_gradient(const std::vector<double>& a, const std::vector<double>& m, std::size_t K,
                        double p, double t, double mu, double T, std::vector<double>& g) {
    const double r = std::max(0.0, t - T);
    const double w2 = 1.0 / (static_cast<double>(K) * static_cast<double>(K));
    for (std::size_t i = 0; i < K * K; ++i)
        g[i] = w2 * (ip_scalar_deriv(a[i], p) - mu * r * m[i]);
}

inline double pg_objective(const std::vector<double>& a, std::size_t K, double p, double t,
                           double mu, std::vector<double>& m) {
    dense_m(a, K, m);
    const double r = std::max(0.0, t - dense_T(a, m, K));
    return dense_I(a, K, p) + mu * r * r;
}

// Largest curvature scale of the penalized objective by power iteration on
// central-difference Hessian-vector products.
inline double pg_curvature(const std::vector<double>& a, std::size_t K, double p, double t,
                           double mu, Splitmix& rng) {
    const std::size_t n = K * K;
    std::vector<double> v(n), plus(n), minus(n), gp(n), gm(n), m(n);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i; j < K; ++j) {
            const double x = rng.uniform() - 0.5;
            v[i * K + j] = v[j * K + i] = x;
        }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 1.0;
    for (double& x : v) x /= norm;
    const double eps = 1e-5;
    double lambda = 1.0;
    auto grad_at = [&](const std::vector<double>& point, std::vector<double>& g) {
        dense_m(point, K, m);
        pg_gradient(point, m, K, p, t, mu, dense_T(point, m, K), g);
    };
    for (int it = 0; it < 8; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            plus[i] = std::clamp(a[i] + eps * v[i], 1e-12, 1.0 - 1e-12);
            minus[i] = std::clamp(a[i] - eps * v[i], 1e-12, 1.0 - 1e-12);
        }
        grad_at(plus, gp);
        grad_at(minus, gm);
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = (gp[i] - gm[i]) / (2.0 * eps);
            nrm += v[i] * v[i];
        }
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
        lambda = nrm;
        for (double& x : v) x /= nrm;
    }
    return std::max(lambda, 1.0);
}

inline BranchOutcome projected_gradient_branch(const std::vector<double>& start, std::size_t K,
                                               double p, double t, const SolveOptions& opts,
                                               std::uint64_t rng_seed) {
    BranchOutcome out;
    const std::size_t n = K * K;
    std::vector<double> a = start, m(n), g(n), trial(n);
    for (double& x : a) x = std::clamp(x, 1e-12, 1.0 - 1e-12);
    Splitmix rng(mix64(rng_seed ^ 0x7a0f1d2c3b4a5968ULL));
    for (double mu : opts.penalty) {
        const double L = pg_curvature(a, K, p, t, mu, rng);
        const double base_step = 1.0 / (L + mu);
        double f_cur = pg_objective(a, K, p, t, mu, m);
        int stagnant = 0;
        for (std::size_t it = 0; it < opts.pg_iterations; ++it) {
            dense_m(a, K, m);
            pg_gradient(a, m, K, p, t, mu, dense_T(a, m, K), g);
            double step = base_step;
            bool accepted = false;
            double f_new = f_cur;
            while (step > 1e-18) {
                for (std::size_t i = 0; i < n; ++i)
                    trial[i] = std::clamp(a[i] - step * g[i], 1e-12, 1.0 - 1e-12);
                f_new = pg_objective(trial, K, p, t, mu, m);
                if (f_new <= f_cur - 1e-14) { accepted = true; break; }
                step *= 0.5;
            }
            ++out.iterations;
            if (!accepted) break;
            a.swap(trial);
            stagnant = (f_cur - f_new < 1e-15) ? stagnant + 1 : 0;
            f_cur = f_new;
            if (stagnant >= 5) break;
        }
    }
    dense_m(a, K, m);
    out.converged = (t - dense_T(a, m, K)) <= 1e-9;
    out.a = std::move(a);
    return out;
}

}  // namespace detail

// Pins T(f) onto t from the feasible side: mixing toward the constant p
// lowers T without raising I_p (convexity); mixing toward 1 raises T when
// the iterate fell short. 80 bisections leave |T - t| far below 1e-8.
inline StepGraphon retarget_to_t(const StepGraphon& f, double p, double t) {
    const double T0 = triangle_density(f);
    if (T0 >= t && T0 - t <= 1e-12) return f;
    if (T0 > t) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (triangle_density(mix_toward_p(f, mid, p)) >= t) lo = mid;
            else hi = mid;
        }
        return mix_toward_p(f, lo, p);
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (triangle_density(mix_toward_one(f, mid)) >= t) hi = mid;
        else lo = mid;
    }
    return mix_toward_one(f, hi);
}

inline SolveResult solve_phi(double p, double t, std::size_t K = 16, SolveOptions opts = {}) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("solve_phi: p must lie in (0,1)");
    if (!(t >= 0.0 && t < 1.0 / 6.0)) throw std::domain_error("solve_phi: t must lie in [0,1/6)");
    if (K < 1 || K > kMaxSolverBlocks) throw std::invalid_argument("solve_phi: K must lie in [1,64]");

    SolveResult res;
    if (t <= p * p * p / 6.0) {
        res.optimizer = StepGraphon::constant(p);
        res.objective = 0.0;
        res.achieved_t = triangle_density(res.optimizer);
        res.method = SolveMethod::CandidateConstant;
        res.converged = true;
        res.multistart_log.push_back({"trivial", 0.0});
        res.distinct_optima.push_back(res.optimizer);
        return res;
    }

    struct Branch {
        std::string label;
        SolveMethod method = SolveMethod::FixedPoint;
        std::vector<double> start;  // empty for closed-form candidates
        StepGraphon result = StepGraphon::constant(0.0);
        double objective = std::numeric_limits<double>::infinity();
        double achieved = 0.0;
        bool converged = false;
        std::size_t iterations = 0;
    };

    const std::size_t n = K * K;
    std::vector<std::pair<std::string, std::vector<double>>> starts;
    starts.emplace_back("constant", std::vector<double>(n, std::cbrt(6.0 * t)));
    {
        const StepGraphon chi = candidate_clique(t).resampled(K);
        starts.emplace_back("clique", chi.values());
    }
    for (std::size_t r = 0; r < opts.random_starts; ++r) {
        Splitmix rng(mix64(opts.seed * 0x9e3779b97f4a7c15ULL + r + 1));
        std::vector<double> a(n);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = i; j < K; ++j) {
                const double v = 0.05 + 0.9 * rng.uniform();
                a[i * K + j] = a[j * K + i] = v;
            }
        starts.emplace_back("random" + std::to_string(r), std::move(a));
    }
    {
        std::vector<double> a(n);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) {
                const bool cross = (i < K / 2) != (j < K / 2);
                a[i * K + j] = K > 1 ? (cross ? 0.9 : 0.1) : 0.5;
            }
        starts.emplace_back("bipartite", std::move(a));
    }

    std::vector<Branch> branches;
    {
        Branch c;
        c.label = "candidate_constant";
        c.method = SolveMethod::CandidateConstant;
        branches.push_back(std::move(c));
        Branch q;
        q.label = "candidate_clique";
        q.method = SolveMethod::CandidateClique;
        branches.push_back(std::move(q));
    }
    if (opts.use_fixed_point)
        for (const auto& [label, a] : starts) {
            Branch b;
            b.label = "fp:" + label;
            b.method = SolveMethod::FixedPoint;
            b.start = a;
            branches.push_back(std::move(b));
        }
    if (opts.use_projected_gradient)
        for (const auto& [label, a] : starts) {
            Branch b;
            b.label = "pg:" + label;
            b.method = SolveMethod::ProjectedGradient;
            b.start = a;
            branches.push_back(std::move(b));
        }

    parallel_chunks(branches.size(), opts.threads, [&](std::size_t idx) {
        Branch& b = branches[idx];
        if (b.method == SolveMethod::CandidateConstant) {
            b.result = candidate_constant(t);
            b.converged = true;
        } else if (b.method == SolveMethod::CandidateClique) {
            b.result = candidate_clique(t);
            b.converged = true;
        } else {
            detail::BranchOutcome o;
            if (b.method == SolveMethod::FixedPoint)
                o = detail::fixed_point_branch(b.start, K, p, t, opts);
            else
                o = detail::projected_gradient_branch(b.start, K, p, t, opts,
                                                      opts.seed + idx * 0x100000001b3ULL);
            b.iterations = o.iterations;
            b.converged = o.converged;
            b.result = retarget_to_t(detail::dense_to_graphon(std::move(o.a), K), p, t);
        }
        b.objective = ip_graphon(b.result, p);
        b.achieved = triangle_density(b.result);
    });

    std::size_t win = 0;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        res.multistart_log.push_back({branches[i].label, branches[i].objective});
        if (branches[i].achieved >= t - kFeasibilitySlack &&
            branches[i].objective < branches[win].objective)
            win = i;
    }
    const Branch& w = branches[win];
    res.optimizer = w.result;
    res.objective = w.objective;
    res.achieved_t = w.achieved;
    res.method = w.method;
    res.converged = w.converged;
    res.iterations = w.iterations;

    // Distinct near-optimal structures: cheap L1 screen first, cut-aligned
    // comparison only for genuinely different block patterns.
    for (const Branch& b : branches) {
        if (!(b.objective <= res.objective + 1e-6)) continue;
        if (b.achieved < t - kFeasibilitySlack) continue;
        bool duplicate = false;
        for (const StepGraphon& kept : res.distinct_optima) {
            if (l1_distance(b.result, kept) <= 1e-4 ||
                delta_cut(b.result, kept, 5000, opts.seed).distance <= 1e-3) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate && res.distinct_optima.size() < 16) res.distinct_optima.push_back(b.result);
    }
    return res;
}

// (phi(p,t), (t/s)^{1/3} phi(p,s)); the first is strictly smaller past
// solver tolerance when p^3/6 < t < s < 1/6.
inline std::pair<double, double> scaling_check(double p, double t, double s, std::size_t K = 16,
                                               const SolveOptions& opts = {}) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("scaling_check: p must lie in (0,1)");
    if (!(p * p * p / 6.0 < t && t < s && s < 1.0 / 6.0))
        throw std::domain_error("scaling_check: need p^3/6 < t < s < 1/6");
    const double phi_t = solve_phi(p, t, K, opts).objective;
    const double phi_s = solve_phi(p, s, K, opts).objective;
    return {phi_t, std::cbrt(t / s) * phi_s};
}

struct SmallPRow {
    double p = 0.0;
    double objective = 0.0;
    double ratio = 0.0;           // objective / log(1/p)
    double clique_distance = 0.0; // delta_cut(optimizer, chi_t)
};

// Tracks phi(p,t)/log(1/p) and the optimizer's distance to chi_t along a
// decreasing p list; the ratio tends to (6t)^{2/3}/2 and the distance
// shrinks as the clique takes over.
inline std::vector<SmallPRow> small_p_limit_check(double t, const std::vector<double>& p_list,
                                                  std::size_t K = 16, const SolveOptions& opts = {},
                                                  std::size_t cut_budget = 100000) {
    if (!(t > 0.0 && t < 1.0 / 6.0))
        throw std::domain_error("small_p_limit_check: t outside (0,1/6)");
    const double b = std::cbrt(6.0 * t);
    for (std::size_t i = 0; i < p_list.size(); ++i) {
        if (!(p_list[i] > 0.0 && p_list[i] < b))
            throw std::domain_error("small_p_limit_check: p outside (0,(6t)^{1/3})");
        if (i > 0 && !(p_list[i] < p_list[i - 1]))
            throw std::invalid_argument("small_p_limit_check: p_list must be strictly decreasing");
    }
    const StepGraphon chi = candidate_clique(t);
    std::vector<SmallPRow> rows;
    rows.reserve(p_list.size());
    for (double p : p_list) {
        const SolveResult r = solve_phi(p, t, K, opts);
        SmallPRow row;
        row.p = p;
        row.objective = r.objective;
        row.ratio = r.objective / std::log(1.0 / p);
        row.clique_distance = delta_cut(r.optimizer, chi, cut_budget, opts.seed).distance;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace graphon
