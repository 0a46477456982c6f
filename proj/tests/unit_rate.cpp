#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "graphon/rate.hpp"
#include "graphon/rng.hpp"
#include "graphon/solve.hpp"

using namespace graphon;
using Catch::Approx;

TEST_CASE("relative entropy matches frozen values", "[rate]") {
    CHECK(ip_scalar(1.0, 0.5) == Approx(0.34657359027997264).margin(1e-15));
    CHECK(ip_scalar(0.8434326653017492, 0.2) == Approx(0.4792279273605666).margin(1e-15));
    CHECK(ip_scalar(0.3, 0.3) == 0.0);
    CHECK(ip_scalar(0.0, 0.5) == Approx(0.5 * std::log(2.0)).margin(1e-15));
    // graphon version sums w_i w_j ip(a_ij)
    StepGraphon f({0.5, 0.5}, {0.9, 0.1, 0.1, 0.8});
    double expect = 0.25 * ip_scalar(0.9, 0.3) + 0.5 * ip_scalar(0.1, 0.3) + 0.25 * ip_scalar(0.8, 0.3);
    CHECK(ip_graphon(f, 0.3) == Approx(expect).margin(1e-15));
}

TEST_CASE("relative entropy rejects bad arguments", "[rate]") {
    CHECK_THROWS_AS(ip_scalar(0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(ip_scalar(0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(ip_scalar(-0.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(ip_scalar(1.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(ip_scalar_deriv(0.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(ip_scalar_deriv(1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(h_p(0.2, 0.5), std::domain_error);
    CHECK_THROWS_AS(h_p(-0.01, 0.5), std::domain_error);
    CHECK_THROWS_AS(h_p(0.05, 0.0), std::domain_error);
}

TEST_CASE("relative entropy is convex with matching derivative", "[rate]") {
    Splitmix rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = 0.05 + 0.9 * rng.uniform();
        double u1 = rng.uniform(), u2 = rng.uniform();
        if (u1 > u2) std::swap(u1, u2);
        const double lam = rng.uniform();
        const double mid = lam * u1 + (1.0 - lam) * u2;
        const double chord = lam * ip_scalar(u1, p) + (1.0 - lam) * ip_scalar(u2, p);
        CHECK(ip_scalar(mid, p) <= chord + 1e-12);
    }
    // derivative against central differences away from the endpoints
    for (double u : {0.1, 0.3, 0.55, 0.9}) {
        const double h = 1e-6;
        const double fd = (ip_scalar(u + h, 0.35) - ip_scalar(u - h, 0.35)) / (2.0 * h);
        CHECK(ip_scalar_deriv(u, 0.35) == Approx(fd).margin(1e-8));
    }
}

TEST_CASE("tail exponent has a flat stretch then the clique value", "[rate]") {
    const double p = 0.5;
    const double t0 = p * p * p / 6.0;
    CHECK(h_p(0.0, p) == 0.0);
    CHECK(h_p(0.5 * t0, p) == 0.0);
    CHECK(h_p(t0, p) == 0.0);
    CHECK(h_p(0.035, 0.5) == Approx(0.008963579789052711).margin(1e-15));
    CHECK(h_p(0.125, 0.01) == Approx(1.9395688055885751).margin(1e-12));
    CHECK(h_p(1.0 / 6.0, p) == Approx(ip_scalar(1.0, p)).margin(1e-12));
    // continuous at the kink and nondecreasing beyond it
    CHECK(h_p(t0 * (1.0 + 1e-9), p) < 1e-6);
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double t = t0 + (1.0 / 6.0 - t0) * i / 100.0;
        const double v = h_p(t, p);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
}

TEST_CASE("convex minorant keeps convex data and bridges concave dips", "[rate]") {
    // strictly convex samples survive as hull vertices
    std::vector<double> xs, ys;
    for (int i = 0; i <= 20; ++i) {
        const double x = i / 20.0;
        xs.push_back(x);
        ys.push_back(x * x);
    }
    ConvexMinorant m = convex_minorant(xs, ys);
    REQUIRE(m.x.size() == xs.size());
    CHECK(m.value(0.5) == Approx(0.25).margin(1e-15));
    CHECK(m.value(0.525) == Approx(0.5 * (0.25 + 0.3025)).margin(1e-12));

    // a tent gets replaced by its base chord
    ConvexMinorant tent = convex_minorant({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
    REQUIRE(tent.x.size() == 2);
    CHECK(tent.value(0.5) == Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(convex_minorant({0.0, 0.0}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(convex_minorant({0.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(convex_minorant({0.0, 1.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(m.value(-0.5), std::domain_error);
    CHECK_THROWS_AS(m.value(1.5), std::domain_error);
}

TEST_CASE("minorant slopes are nondecreasing and bracket the kink", "[rate]") {
    ConvexMinorant m = convex_minorant({0.0, 1.0, 2.0, 3.0}, {3.0, 1.0, 0.5, 1.5});
    auto [l0, r0] = m.slopes(0.0);
    CHECK(l0 == r0);
    CHECK(r0 == Approx(-2.0));
    auto [l1, r1] = m.slopes(1.0);
    CHECK(l1 == Approx(-2.0));
    CHECK(r1 == Approx(-0.5));
    auto [lm, rm] = m.slopes(1.5);
    CHECK(lm == rm);
    CHECK(lm == Approx(-0.5));
    CHECK_THROWS_AS(m.slopes(-1.0), std::domain_error);
}

TEST_CASE("tail exponent minorant lies below and certifies queries", "[rate]") {
    const double p = 0.5;
    Splitmix rng(5);
    std::vector<double> queries = {0.035, 0.16};
    for (int i = 0; i < 300; ++i) queries.push_back((1.0 / 6.0 - 1e-6) * rng.uniform());
    ConvexMinorant m = h_p_minorant(p, queries, 4000);
    // domination is exact at inserted points; between samples the hull chord
    // may sit O(grid^2) above a strictly convex h, which is why queries are
    // inserted rather than interpolated
    for (double t : queries) CHECK(m.value(t) <= h_p(t, p) + 1e-12);
    // hull slopes nondecreasing across vertices
    for (std::size_t j = 2; j < m.x.size(); ++j) {
        const double s1 = (m.y[j - 1] - m.y[j - 2]) / (m.x[j - 1] - m.x[j - 2]);
        const double s2 = (m.y[j] - m.y[j - 1]) / (m.x[j] - m.x[j - 1]);
        CHECK(s2 >= s1 - 1e-12);
    }
    CHECK_THROWS_AS(h_p_minorant(p, {0.2}), std::domain_error);
    CHECK_THROWS_AS(h_p_minorant(p, {}, 1), std::invalid_argument);
}

TEST_CASE("phase verdicts at pinned points", "[rate]") {
    PhasePoint rs = classify_phase(0.5, 0.035);
    CHECK(rs.phase == Phase::ReplicaSymmetric);
    CHECK(rs.h == Approx(0.008963579789052711).margin(1e-15));
    CHECK(rs.h - rs.h_hat <= 1e-12);  // query inserted into the hull, gap collapses
    CHECK(rs.beta_left <= rs.beta + 1e-12);
    CHECK(rs.beta <= rs.beta_right + 1e-12);
    CHECK(std::string(phase_name(rs.phase)) == "replica_symmetric");

    PhasePoint tz = classify_phase(0.5, 0.01);
    CHECK(tz.phase == Phase::TrivialZero);
    CHECK(tz.h == 0.0);
    CHECK(std::string(phase_name(tz.phase)) == "trivial_zero");

    PhasePoint br = classify_phase(0.01, 0.125);
    CHECK(br.phase == Phase::Broken);
    CHECK(br.h == Approx(1.9395688055885751).margin(1e-12));
    CHECK(br.h - br.h_hat > 1e-3);
    CHECK(std::string(phase_name(br.phase)) == "broken");

    CHECK_THROWS_AS(classify_phase(0.5, 0.5), std::domain_error);
}

TEST_CASE("hull slope agrees with the analytic derivative inside a smooth stretch", "[rate]") {
    // dh/dt = ip'((6t)^{1/3}) * 2 / (6t)^{2/3} on the replica-symmetric branch
    const double p = 0.5, t = 0.05;
    PhasePoint r = classify_phase(p, t, 20000);
    REQUIRE(r.phase == Phase::ReplicaSymmetric);
    const double u = std::cbrt(6.0 * t);
    const double analytic = ip_scalar_deriv(u, p) * 2.0 / (u * u);
    CHECK(r.beta == Approx(analytic).epsilon(1e-3));
    CHECK(r.beta_right - r.beta_left < 1e-3);
}

TEST_CASE("small p diagram goes symmetric, broken, then symmetric again", "[rate]") {
    const double p = 0.01;
    std::vector<double> ts = default_phase_grid(p, 200);
    REQUIRE(ts.size() >= 180);
    for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);
    CHECK(ts.front() > 0.0);
    CHECK(ts.back() <= 1.0 / 6.0 + 1e-18);

    std::vector<PhasePoint> rows = phase_diagram(p, ts);
    REQUIRE(rows.size() == ts.size());
    CHECK(has_double_transition(rows));
    bool saw_trivial = false, saw_rs = false, saw_broken = false;
    for (const auto& r : rows) {
        if (r.phase == Phase::TrivialZero) saw_trivial = true;
        if (r.phase == Phase::ReplicaSymmetric) saw_rs = true;
        if (r.phase == Phase::Broken) saw_broken = true;
    }
    CHECK(saw_trivial);
    CHECK(saw_rs);
    CHECK(saw_broken);
    // the flank hugging 1/6 must come back symmetric
    CHECK(rows.back().phase == Phase::ReplicaSymmetric);
}

TEST_CASE("moderate p diagram has a single symmetric branch", "[rate]") {
    const double p = 0.5;
    std::vector<double> ts = default_phase_grid(p, 120);
    std::vector<PhasePoint> rows = phase_diagram(p, ts);
    CHECK_FALSE(has_double_transition(rows));
    for (const auto& r : rows) CHECK(r.phase != Phase::Broken);
}

TEST_CASE("double transition detector needs the full sandwich", "[rate]") {
    auto mk = [](Phase ph) {
        PhasePoint r;
        r.phase = ph;
        return r;
    };
    using P = Phase;
    CHECK(has_double_transition({mk(P::ReplicaSymmetric), mk(P::Broken), mk(P::ReplicaSymmetric)}));
    CHECK(has_double_transition({mk(P::TrivialZero), mk(P::ReplicaSymmetric), mk(P::Boundary),
                                 mk(P::Broken), mk(P::ReplicaSymmetric)}));
    CHECK_FALSE(has_double_transition({mk(P::ReplicaSymmetric), mk(P::Broken)}));
    CHECK_FALSE(has_double_transition({mk(P::Broken), mk(P::ReplicaSymmetric)}));
    CHECK_FALSE(has_double_transition({mk(P::ReplicaSymmetric), mk(P::ReplicaSymmetric)}));
    CHECK_FALSE(has_double_transition({}));
}

TEST_CASE("candidate rate values at the pinned broken point", "[rate]") {
    const double p = 0.01, t = 0.125;
    StepGraphon c = candidate_constant(t);
    CHECK(c.blocks() == 1);
    CHECK(c.value(0, 0) == Approx(0.9085602964160698).margin(1e-15));
    CHECK(ip_graphon(c, p) == Approx(1.9395688055885751).margin(1e-12));
    StepGraphon chi = candidate_clique(t);
    CHECK(ip_graphon(chi, p) == Approx(1.9016190985637504).margin(1e-12));
    CHECK(ip_graphon(chi, p) < ip_graphon(c, p));
}
