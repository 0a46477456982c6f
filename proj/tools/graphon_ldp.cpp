// Command-line front end. Every run is a pure function of (subcommand,
// flags, seed): numeric output is printed at 9 significant digits and
// repeated runs are byte-identical. Exit codes: 0 success, 1 usage,
// 2 domain/input error, 3 non-convergence or acceptance starvation
// (partial output is still emitted).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphon/core.hpp"
#include "graphon/cut.hpp"
#include "graphon/io.hpp"
#include "graphon/rate.hpp"
#include "graphon/sample.hpp"
#include "graphon/solve.hpp"

namespace {

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(out_path);
    if (!f) throw std::invalid_argument("cannot write output file: " + out_path);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

graphon::StepGraphon resolve_tilt(const std::string& spec, double p, double t,
                                  std::size_t blocks, std::uint64_t seed, unsigned threads) {
    using namespace graphon;
    if (spec == "identity") return StepGraphon::constant(p);
    if (spec == "constant") return candidate_constant(t);
    if (spec == "clique") return soften_tilt(candidate_clique(t));
    if (spec == "auto") {
        SolveOptions opts;
        opts.seed = seed;
        opts.threads = threads;
        return soften_tilt(solve_phi(p, t, blocks, opts).optimizer);
    }
    return load_graphon(spec);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Triangle upper-tail large deviations for dense random graphs: rate function, "
                 "variational phase structure, cut distances, and tilted Monte Carlo"};
    app.require_subcommand(1);

    std::string out_path;
    unsigned threads = 0;
    app.add_option("--out", out_path, "Write output to this file instead of stdout");
    app.add_option("--threads", threads,
                   "Worker threads (0 = GRAPHON_LDP_THREADS env, then hardware)");

    // rate
    auto* rate = app.add_subcommand("rate", "Evaluate I_p on a scalar, a graphon file, or h_p(t)");
    double rate_p = 0.5, rate_u = 0.0, rate_t = 0.0;
    std::string rate_file;
    rate->add_option("--p", rate_p, "Background edge density")->required();
    auto* rate_u_opt = rate->add_option("--u", rate_u, "Scalar argument of I_p");
    auto* rate_t_opt = rate->add_option("--t", rate_t, "Triangle density for h_p(t)");
    auto* rate_f_opt = rate->add_option("--graphon", rate_file, "StepGraphon JSON file for I_p(f)");

    // minorant
    auto* minorant = app.add_subcommand("minorant", "Tabulate h_p and its convex minorant");
    double min_p = 0.5;
    std::size_t min_points = 200, min_grid = 10000;
    std::vector<double> min_extra;
    minorant->add_option("--p", min_p, "Background edge density")->required();
    minorant->add_option("--points", min_points, "Number of tabulated t values");
    minorant->add_option("--grid", min_grid, "Hull sample resolution");
    minorant->add_option("--t", min_extra, "Extra t values to include");

    // phase
    auto* phase = app.add_subcommand("phase", "Classify (p,t) points as trivial/RS/boundary/broken");
    double ph_p = 0.5, ph_t = -1.0, ph_tol = 1e-9;
    std::size_t ph_grid = 10000, ph_tgrid = 200;
    phase->add_option("--p", ph_p, "Background edge density")->required();
    auto* ph_t_opt = phase->add_option("--t", ph_t, "Single t to classify (JSON output)");
    phase->add_option("--t-grid", ph_tgrid, "Number of grid t values (CSV output)");
    phase->add_option("--grid", ph_grid, "Hull sample resolution");
    phase->add_option("--tol", ph_tol, "Relative tolerance band for the RS test");

    // solve
    auto* solve = app.add_subcommand("solve", "Solve the upper-tail variational problem");
    double so_p = 0.5, so_t = 0.05;
    std::size_t so_blocks = 16, so_starts = 8;
    std::uint64_t so_seed = 1;
    std::string so_method = "auto";
    bool so_optima = false;
    solve->add_option("--p", so_p, "Background edge density")->required();
    solve->add_option("--t", so_t, "Triangle density constraint")->required();
    solve->add_option("--blocks", so_blocks, "Equal-mass blocks in the search class");
    solve->add_option("--seed", so_seed, "Random start seed");
    solve->add_option("--random-starts", so_starts, "Number of random starts");
    solve->add_option("--method", so_method, "auto|fp|pg|candidates")
        ->check(CLI::IsMember({"auto", "fp", "pg", "candidates"}));
    solve->add_flag("--include-optima", so_optima, "Embed all distinct optima in the JSON");

    // cutdist
    auto* cutdist = app.add_subcommand("cutdist", "Cut norm or aligned cut distance");
    std::string cd_f, cd_g, cd_graph_f, cd_graph_g, cd_mode = "delta";
    std::size_t cd_resolution = 0, cd_budget = 100000, cd_restarts = 50;
    std::uint64_t cd_seed = 1;
    cutdist->add_option("--f", cd_f, "First graphon JSON file");
    cutdist->add_option("--g", cd_g, "Second graphon JSON file");
    cutdist->add_option("--graph-f", cd_graph_f, "First graph text file (empirical graphon)");
    cutdist->add_option("--graph-g", cd_graph_g, "Second graph text file (empirical graphon)");
    cutdist->add_option("--mode", cd_mode, "delta (alignment-minimized) or norm (labeled)")
        ->check(CLI::IsMember({"delta", "norm"}));
    cutdist->add_option("--resolution", cd_resolution, "Resampling blocks for delta (0 = auto)");
    cutdist->add_option("--budget", cd_budget, "Permutation search budget");
    cutdist->add_option("--restarts", cd_restarts, "Heuristic restarts for norm mode");
    cutdist->add_option("--seed", cd_seed, "Search seed");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Tilted importance-sampling tail estimate");
    std::size_t si_n = 32, si_samples = 10000, si_blocks = 16;
    double si_p = 0.5, si_t = 0.035;
    std::uint64_t si_seed = 1;
    std::string si_tilt = "constant";
    simulate->add_option("--n", si_n, "Graph size")->required();
    simulate->add_option("--p", si_p, "Background edge density")->required();
    simulate->add_option("--t", si_t, "Triangle density threshold")->required();
    simulate->add_option("--samples", si_samples, "Monte Carlo samples");
    simulate->add_option("--seed", si_seed, "Sampling seed");
    simulate->add_option("--tilt", si_tilt,
                         "identity|constant|clique|auto|FILE proposal graphon");
    simulate->add_option("--blocks", si_blocks, "Solver blocks when --tilt auto");

    // validate
    auto* validate = app.add_subcommand("validate", "Exact enumeration vs tilted estimates");
    std::size_t va_n = 6, va_samples = 20000, va_seeds = 10, va_blocks = 16;
    double va_p = 0.5, va_t = -1.0;
    long long va_min_tri = -1;
    std::uint64_t va_seed = 1;
    std::string va_tilt = "auto";
    validate->add_option("--n", va_n, "Graph size (at most 7)")->required();
    validate->add_option("--p", va_p, "Background edge density")->required();
    auto* va_t_opt = validate->add_option("--t", va_t, "Triangle density threshold");
    auto* va_m_opt =
        validate->add_option("--min-triangles", va_min_tri, "Threshold as a triangle count");
    validate->add_option("--samples", va_samples, "Samples per seed");
    validate->add_option("--seeds", va_seeds, "Number of independent seeds");
    validate->add_option("--seed", va_seed, "Base seed");
    validate->add_option("--tilt", va_tilt, "identity|constant|clique|auto|FILE proposal");
    validate->add_option("--blocks", va_blocks, "Solver blocks when --tilt auto");

    // conditional
    auto* conditional =
        app.add_subcommand("conditional", "Distance from conditioned samples to references");
    std::size_t co_n = 48, co_samples = 400, co_quotient = 8, co_blocks = 16, co_budget = 20000;
    double co_p = 0.5, co_t = 0.035;
    std::uint64_t co_seed = 1;
    std::string co_refs = "constant,clique", co_tilt = "auto";
    conditional->add_option("--n", co_n, "Graph size")->required();
    conditional->add_option("--p", co_p, "Background edge density")->required();
    conditional->add_option("--t", co_t, "Conditioning triangle density")->required();
    conditional->add_option("--refs", co_refs,
                            "Comma list: constant, clique, optimizer, or graphon files");
    conditional->add_option("--quotient", co_quotient, "Quotient blocks for sampled graphs");
    conditional->add_option("--samples", co_samples, "Proposal samples");
    conditional->add_option("--seed", co_seed, "Sampling seed");
    conditional->add_option("--tilt", co_tilt, "auto|identity|constant|clique|FILE proposal");
    conditional->add_option("--blocks", co_blocks, "Solver blocks for auto tilt/optimizer ref");
    conditional->add_option("--budget", co_budget, "Cut-distance search budget per sample");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    using namespace graphon;
    try {
        if (rate->parsed()) {
            const int given = (rate_u_opt->count() > 0) + (rate_t_opt->count() > 0) +
                              (rate_f_opt->count() > 0);
            if (given != 1)
                throw std::invalid_argument("rate: give exactly one of --u, --t, --graphon");
            double value = 0.0;
            if (rate_u_opt->count() > 0) value = ip_scalar(rate_u, rate_p);
            else if (rate_t_opt->count() > 0) value = h_p(rate_t, rate_p);
            else value = ip_graphon(load_graphon(rate_file), rate_p);
            emit(format_g9(value), out_path);
            return 0;
        }

        if (minorant->parsed()) {
            std::vector<double> ts = default_phase_grid(min_p, min_points);
            ts.insert(ts.end(), min_extra.begin(), min_extra.end());
            std::sort(ts.begin(), ts.end());
            ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
            const auto rows = phase_diagram(min_p, ts, min_grid);
            std::ostringstream csv;
            csv << "# schema: graphon_ldp.minorant v1\n";
            csv << "t,h,h_hat,gap\n";
            for (const PhasePoint& r : rows)
                csv << format_g9(r.t) << ',' << format_g9(r.h) << ',' << format_g9(r.h_hat)
                    << ',' << format_g9(std::max(0.0, r.h - r.h_hat)) << '\n';
            emit(csv.str(), out_path);
            return 0;
        }

        if (phase->parsed()) {
            if (ph_t_opt->count() > 0) {
                const PhasePoint r = classify_phase(ph_p, ph_t, ph_grid, ph_tol);
                emit(dump_rounded(phase_point_to_json(r)), out_path);
                return 0;
            }
            const auto rows = phase_diagram(ph_p, default_phase_grid(ph_p, ph_tgrid), ph_grid,
                                            ph_tol);
            emit(phase_csv(rows), out_path);
            return 0;
        }

        if (solve->parsed()) {
            SolveOptions opts;
            opts.seed = so_seed;
            opts.random_starts = so_starts;
            opts.threads = threads;
            opts.use_fixed_point = so_method == "auto" || so_method == "fp";
            opts.use_projected_gradient = so_method == "auto" || so_method == "pg";
            if (so_method == "candidates") {
                opts.use_fixed_point = false;
                opts.use_projected_gradient = false;
            }
            const SolveResult res = solve_phi(so_p, so_t, so_blocks, opts);
            nlohmann::json j = solve_result_to_json(res, so_optima);
            j["p"] = so_p;
            j["t"] = so_t;
            j["blocks"] = so_blocks;
            j["seed"] = so_seed;
            emit(dump_rounded(std::move(j)), out_path);
            return res.converged ? 0 : 3;
        }

        if (cutdist->parsed()) {
            auto load_side = [](const std::string& graphon_file, const std::string& graph_file,
                                const char* which) {
                if (!graphon_file.empty() && !graph_file.empty())
                    throw std::invalid_argument(std::string("cutdist: give only one input for ") +
                                                which);
                if (!graphon_file.empty()) return load_graphon(graphon_file);
                if (!graph_file.empty()) return StepGraphon::from_graph(load_graph(graph_file));
                throw std::invalid_argument(std::string("cutdist: missing input for ") + which);
            };
            const StepGraphon F = load_side(cd_f, cd_graph_f, "--f/--graph-f");
            const StepGraphon G = load_side(cd_g, cd_graph_g, "--g/--graph-g");
            nlohmann::json j;
            if (cd_mode == "norm") {
                const CutResult cr = cut_distance(F, G, cd_restarts, cd_seed);
                j["mode"] = "norm";
                j["value"] = cr.value;
                j["exact"] = cr.exact;
            } else {
                const DeltaCutResult dr = delta_cut(F, G, cd_budget, cd_seed, cd_resolution);
                j["mode"] = "delta";
                j["distance"] = dr.distance;
                j["resolution"] = dr.resolution;
                j["exact"] = dr.exact;
                j["permutation"] = dr.permutation;
            }
            emit(dump_rounded(std::move(j)), out_path);
            return 0;
        }

        if (simulate->parsed()) {
            const StepGraphon tilt = resolve_tilt(si_tilt, si_p, si_t, si_blocks, si_seed, threads);
            const TailEstimate est =
                tilted_tail_estimate(si_n, si_p, si_t, tilt, si_samples, si_seed, threads);
            emit(dump_rounded(tail_estimate_to_json(est)), out_path);
            if (est.accepted == 0) {
                std::cerr << "warning: no accepted samples; strengthen the tilt\n";
                return 3;
            }
            return 0;
        }

        if (validate->parsed()) {
            if ((va_t_opt->count() > 0) == (va_m_opt->count() > 0))
                throw std::invalid_argument("validate: give exactly one of --t, --min-triangles");
            const double cube = static_cast<double>(va_n) * static_cast<double>(va_n) *
                                static_cast<double>(va_n);
            const double t = va_t_opt->count() > 0 ? va_t : static_cast<double>(va_min_tri) / cube;
            const double exact = exact_tail(va_n, va_p, t, threads);
            const StepGraphon tilt = resolve_tilt(va_tilt, va_p, t, va_blocks, va_seed, threads);
            std::ostringstream csv;
            csv << "# schema: graphon_ldp.validate v1\n";
            csv << "seed,exact,estimate,std_error_log,z\n";
            double max_abs_z = 0.0;
            bool starved = false;
            const double n2 = static_cast<double>(va_n) * static_cast<double>(va_n);
            for (std::size_t s = 0; s < va_seeds; ++s) {
                const std::uint64_t seed = va_seed + s;
                const TailEstimate est =
                    tilted_tail_estimate(va_n, va_p, t, tilt, va_samples, seed, threads);
                const double log_est = est.log_prob_per_n2 * n2;
                const double z = (log_est - std::log(exact)) / est.std_error;
                max_abs_z = std::max(max_abs_z, std::fabs(z));
                starved = starved || est.accepted == 0;
                csv << seed << ',' << format_g9(exact) << ',' << format_g9(std::exp(log_est))
                    << ',' << format_g9(est.std_error) << ',' << format_g9(z) << '\n';
            }
            csv << "# max_abs_z " << format_g9(max_abs_z) << '\n';
            emit(csv.str(), out_path);
            return starved ? 3 : 0;
        }

        if (conditional->parsed()) {
            std::vector<std::pair<std::string, StepGraphon>> refs;
            std::stringstream tokens(co_refs);
            std::string token;
            while (std::getline(tokens, token, ',')) {
                if (token.empty()) continue;
                if (token == "constant") refs.emplace_back("constant", candidate_constant(co_t));
                else if (token == "clique") refs.emplace_back("clique", candidate_clique(co_t));
                else if (token == "optimizer") {
                    SolveOptions opts;
                    opts.seed = co_seed;
                    opts.threads = threads;
                    refs.emplace_back("optimizer", solve_phi(co_p, co_t, co_blocks, opts).optimizer);
                } else {
                    refs.emplace_back(token, load_graphon(token));
                }
            }
            StepGraphon tilt = StepGraphon::constant(co_p);
            const StepGraphon* tilt_ptr = nullptr;
            if (co_tilt != "auto") {
                tilt = resolve_tilt(co_tilt, co_p, co_t, co_blocks, co_seed, threads);
                tilt_ptr = &tilt;
            }
            const auto rows = conditional_structure_experiment(
                co_n, co_p, co_t, refs, co_quotient, co_samples, co_seed, tilt_ptr, threads,
                co_budget, co_blocks);
            std::string text = conditional_csv(rows);
            const bool starved = rows.empty() || rows.front().accepted_samples == 0;
            if (starved) text += "# warning: acceptance starvation, strengthen the tilt\n";
            emit(text, out_path);
            return starved ? 3 : 0;
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
