#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "graphon/rate.hpp"
#include "graphon/sample.hpp"
#include "graphon/solve.hpp"
#include "test_util.hpp"

using namespace graphon;
using Catch::Approx;

TEST_CASE("edge probabilities zero and one are deterministic", "[sample]") {
    SimpleGraph empty = sample_er(50, 0.0, 1);
    CHECK(empty.edge_count() == 0);
    SimpleGraph full = sample_er(50, 1.0, 1);
    CHECK(full.edge_count() == 50 * 49 / 2);
}

TEST_CASE("uniform sampling is the constant graphon special case", "[sample]") {
    for (std::uint64_t seed : {1ULL, 7ULL, 999ULL}) {
        SimpleGraph a = sample_er(80, 0.37, seed);
        SimpleGraph b = sample_inhomogeneous(80, StepGraphon::constant(0.37), seed);
        REQUIRE(a.edge_count() == b.edge_count());
        for (std::size_t u = 0; u < 80; ++u) CHECK(a.neighbors(u) == b.neighbors(u));
    }
    // same seed reproduces, fresh seed does not
    SimpleGraph x = sample_er(60, 0.5, 11), y = sample_er(60, 0.5, 11), z = sample_er(60, 0.5, 12);
    CHECK(x.edge_count() == y.edge_count());
    bool differ = z.edge_count() != x.edge_count();
    for (std::size_t u = 0; u < 60 && !differ; ++u) differ = x.neighbors(u) != z.neighbors(u);
    CHECK(differ);
}

TEST_CASE("sampled densities sit inside four sigma", "[sample]") {
    const std::size_t n = 1000;
    const double p = 0.5;
    SimpleGraph g = sample_er(n, p, 42);
    const double pairs = 0.5 * n * (n - 1);
    const double sd = std::sqrt(pairs * p * (1 - p));
    CHECK(std::fabs(g.edge_count() - pairs * p) <= 4.0 * sd);

    StepGraphon two({0.5, 0.5}, {0.8, 0.1, 0.1, 0.6});
    SimpleGraph h = sample_inhomogeneous(500, two, 43);
    std::size_t within0 = 0, cross = 0;
    for (std::size_t u = 0; u < 500; ++u)
        for (std::uint32_t v : h.neighbors(u)) {
            if (v <= u) continue;
            const bool bu = u >= 250, bv = v >= 250;
            if (!bu && !bv) ++within0;
            else if (bu != bv) ++cross;
        }
    const double pw = 250.0 * 249.0 / 2.0;
    CHECK(std::fabs(within0 - pw * 0.8) <= 4.0 * std::sqrt(pw * 0.8 * 0.2));
    const double pc = 250.0 * 250.0;
    CHECK(std::fabs(cross - pc * 0.1) <= 4.0 * std::sqrt(pc * 0.1 * 0.9));
}

TEST_CASE("triangle counting matches brute force", "[sample]") {
    CHECK(triangle_count(make_complete(4)) == 4);
    CHECK(triangle_count(make_complete(5)) == 10);
    CHECK(triangle_count(make_cycle(5)) == 0);
    CHECK(triangle_count(make_cycle(3)) == 1);
    CHECK(triangle_count(make_path(6)) == 0);

    Splitmix rng(17);
    SimpleGraph g = testutil::random_graph(rng, 200, 0.3);
    long long brute = 0;
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = i + 1; j < 200; ++j)
            for (std::size_t k = j + 1; k < 200; ++k)
                if (g.has_edge(i, j) && g.has_edge(j, k) && g.has_edge(i, k)) ++brute;
    CHECK(triangle_count(g) == brute);
}

TEST_CASE("graph and graphon triangle densities agree", "[sample]") {
    Splitmix rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        SimpleGraph g = testutil::random_graph(rng, 60, 0.4);
        const double t = triangle_density(StepGraphon::from_graph(g));
        CHECK(std::llround(t * 60.0 * 60.0 * 60.0) == triangle_count(g));
    }
}

TEST_CASE("threshold rounding is exact on lattice targets", "[sample]") {
    CHECK(triangle_threshold(3.0 / 216.0, 6) == 3);
    CHECK(triangle_threshold(2.0 / 125.0, 5) == 2);
    CHECK(triangle_threshold(1.0 / 27.0, 3) == 1);
    CHECK(triangle_threshold(0.0, 10) == 0);
    // just above a lattice point rounds up
    CHECK(triangle_threshold(3.0 / 216.0 + 1e-6, 6) == 4);
}

TEST_CASE("exact enumeration matches the frozen references", "[sample]") {
    CHECK(exact_tail(3, 0.5, 1.0 / 27.0) == Approx(0.125).margin(1e-15));
    CHECK(exact_tail(5, 0.3, 2.0 / 125.0) == Approx(0.047348987399999834).margin(1e-15));
    CHECK(exact_tail(6, 0.5, 3.0 / 216.0) == Approx(0.399444580078125).margin(1e-15));
    CHECK(exact_tail(5, 0.3, 0.0) == Approx(1.0).margin(1e-12));
    // four vertices cap at C(4,3) = 4 triangles, hit only by the full graph
    CHECK(exact_tail(4, 0.9, 4.0 / 64.0) == Approx(std::pow(0.9, 6)).margin(1e-12));
    CHECK_THROWS_AS(exact_tail(8, 0.5, 0.01), std::length_error);
    CHECK_THROWS_AS(exact_tail(5, 1.5, 0.01), std::domain_error);
}

TEST_CASE("identity tilt reduces to plain monte carlo", "[sample]") {
    const std::size_t n = 6, N = 2048;
    const double p = 0.5, t = 3.0 / 216.0;
    StepGraphon ident = StepGraphon::constant(p);
    // likelihood ratio terms cancel exactly, not merely to rounding
    Splitmix rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        SimpleGraph g = testutil::random_graph(rng, 30, 0.5);
        CHECK(log_likelihood_ratio(g, p, ident) == 0.0);
    }
    TailEstimate e = tilted_tail_estimate(n, p, t, ident, N, 5);
    CHECK(e.samples == N);
    REQUIRE(e.accepted > 0);
    const double est = std::exp(e.log_prob_per_n2 * n * n);
    CHECK(est == Approx(static_cast<double>(e.accepted) / N).epsilon(1e-12));
    // and the plain estimate agrees with enumeration at four sigma
    const double exact = exact_tail(n, p, t);
    CHECK(std::fabs(std::log(est) - std::log(exact)) <= 4.0 * e.std_error);
}

TEST_CASE("tilted estimates stay unbiased across seeds", "[sample]") {
    const std::size_t n = 5, N = 4096;
    const double p = 0.4, t = 2.0 / 125.0;
    const double exact = exact_tail(n, p, t);
    StepGraphon tilt = soften_tilt(StepGraphon({0.5, 0.5}, {0.9, 0.4, 0.4, 0.4}));
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        TailEstimate e = tilted_tail_estimate(n, p, t, tilt, N, seed);
        REQUIRE(e.accepted > 0);
        const double lest = e.log_prob_per_n2 * n * n;
        CHECK(std::fabs(lest - std::log(exact)) <= 4.0 * e.std_error);
    }
}

TEST_CASE("likelihood bookkeeping matches the tilt entropy", "[sample]") {
    // E_Q[log dP/dQ] = -n(n-1) ip(q, p) for a constant tilt q
    const std::size_t n = 200;
    const double p = 0.5, q = 0.7;
    StepGraphon tilt = StepGraphon::constant(q);
    double mean = 0.0;
    const int reps = 32;
    for (int r = 0; r < reps; ++r) {
        SimpleGraph g = sample_inhomogeneous(n, tilt, 1000 + r);
        mean += log_likelihood_ratio(g, p, tilt);
    }
    mean /= reps;
    const double per_pair = mean / (static_cast<double>(n) * (n - 1));
    CHECK(per_pair == Approx(-ip_scalar(q, p)).margin(1e-3));
}

TEST_CASE("estimates do not depend on the thread count", "[sample]") {
    StepGraphon tilt = soften_tilt(StepGraphon({0.5, 0.5}, {0.8, 0.3, 0.3, 0.3}));
    TailEstimate a = tilted_tail_estimate(12, 0.3, 0.01, tilt, 4096, 9, 1);
    TailEstimate b = tilted_tail_estimate(12, 0.3, 0.01, tilt, 4096, 9, 2);
    TailEstimate c = tilted_tail_estimate(12, 0.3, 0.01, tilt, 4096, 9, 4);
    CHECK(a.log_prob_per_n2 == b.log_prob_per_n2);
    CHECK(a.std_error == b.std_error);
    CHECK(a.accepted == b.accepted);
    CHECK(a.log_prob_per_n2 == c.log_prob_per_n2);
}

TEST_CASE("starved estimators report infinite uncertainty", "[sample]") {
    // identity proposal never reaches a far tail with this few samples
    TailEstimate e = tilted_tail_estimate(20, 0.2, 0.15, StepGraphon::constant(0.2), 256, 1);
    CHECK(e.accepted == 0);
    CHECK(std::isinf(e.log_prob_per_n2));
    CHECK(e.log_prob_per_n2 < 0.0);
    CHECK(std::isinf(e.std_error));
}

TEST_CASE("proposal target boost shrinks with n and clamps at the ceiling", "[sample]") {
    const double t = 1.0 / 48.0;
    CHECK(boosted_target(t, 48) == Approx(t * (1.0 + 4.0 / 24.0)).margin(1e-15));
    CHECK(boosted_target(t, 1000) < boosted_target(t, 100));
    CHECK(boosted_target(t, 100) < boosted_target(t, 10));
    CHECK(boosted_target(0.16, 8) <= 1.0 / 6.0 - 1e-9 + 1e-18);

    StepGraphon soft = soften_tilt(candidate_clique(0.02));
    for (std::size_t i = 0; i < soft.blocks(); ++i)
        for (std::size_t j = 0; j < soft.blocks(); ++j) {
            CHECK(soft.value(i, j) >= 1e-9);
            CHECK(soft.value(i, j) <= 1.0 - 1e-9);
        }
    CHECK(soft.weight(0) == candidate_clique(0.02).weight(0));
}

TEST_CASE("conditioned samples look like the planted structure", "[sample]") {
    const std::size_t n = 24;
    const double p = 0.3;
    const double t = 0.5 * p * p * p / 6.0;  // below threshold: proposal is the background itself
    std::vector<std::pair<std::string, StepGraphon>> refs = {
        {"flat", StepGraphon::constant(p)},
        {"clique", candidate_clique(0.02)},
    };
    auto rows = conditional_structure_experiment(n, p, t, refs, 6, 256, 3, nullptr, 0, 4000, 8);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ref_label == "flat");
    CHECK(rows[1].ref_label == "clique");
    CHECK(rows[0].accepted_samples == rows[1].accepted_samples);
    CHECK(rows[0].accepted_samples > 100);
    CHECK(rows[0].mean_distance < rows[1].mean_distance);
    CHECK(rows[0].std_error > 0.0);

    CHECK_THROWS_AS(conditional_structure_experiment(n, p, t, refs, 6, 50, 3), std::invalid_argument);
    CHECK_THROWS_AS(conditional_structure_experiment(n, p, t, refs, 25, 256, 3), std::invalid_argument);
    CHECK_THROWS_AS(conditional_structure_experiment(n, p, t, {}, 6, 256, 3), std::invalid_argument);
    CHECK_THROWS_AS(conditional_structure_experiment(1, p, t, refs, 1, 256, 3), std::invalid_argument);
}
