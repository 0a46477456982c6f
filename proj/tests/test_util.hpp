#pragma once

// Shared helpers for the unit suites: random step graphons with positive
// normalized weights, and a process runner for CLI round-trip checks.

#include <array>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "graphon/core.hpp"
#include "graphon/rng.hpp"

namespace testutil {

// Random graphon with 1..max_blocks blocks, weights bounded away from 0.
inline graphon::StepGraphon random_graphon(graphon::Splitmix& rng, std::size_t max_blocks = 6) {
    const std::size_t k = 1 + rng.below(max_blocks);
    std::vector<double> w(k);
    double sum = 0.0;
    for (double& x : w) {
        x = 0.1 + rng.uniform();
        sum += x;
    }
    for (double& x : w) x /= sum;
    // renormalize exactly
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) acc += w[i];
    w[k - 1] = 1.0 - acc;
    std::vector<double> a(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            const double v = rng.uniform();
            a[i * k + j] = a[j * k + i] = v;
        }
    return graphon::StepGraphon(std::move(w), std::move(a));
}

inline graphon::SimpleGraph random_graph(graphon::Splitmix& rng, std::size_t n, double p) {
    graphon::SimpleGraph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p) g.add_edge(i, j);
    return g;
}

struct CliResult {
    int exit_code = -1;
    std::string output;
};

// Runs the CLI with stderr folded into stdout.
inline CliResult run_cli(const std::string& args) {
    CliResult res;
    const std::string cmd = std::string(GRAPHON_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.output.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return res;
}

}  // namespace testutil
