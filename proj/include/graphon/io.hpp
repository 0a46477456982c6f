#pragma once

// Serialization: StepGraphon as JSON {"weights": [...], "values": [[...]]},
// SimpleGraph as "n m" followed by one "u v" edge per line (0-based), and
// 9-significant-digit number formatting applied to every emitted value so
// repeated runs are byte-identical.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "rate.hpp"
#include "sample.hpp"
#include "solve.hpp"

namespace graphon {

inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline nlohmann::json graphon_to_json(const StepGraphon& f) {
    nlohmann::json j;
    j["weights"] = f.weights();
    std::vector<std::vector<double>> rows(f.blocks(), std::vector<double>(f.blocks()));
    for (std::size_t i = 0; i < f.blocks(); ++i)
        for (std::size_t k = 0; k < f.blocks(); ++k) rows[i][k] = f.value(i, k);
    j["values"] = rows;
    return j;
}

inline StepGraphon graphon_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("weights") || !j.contains("values"))
        throw std::invalid_argument("graphon JSON needs \"weights\" and \"values\"");
    const auto weights = j.at("weights").get<std::vector<double>>();
    const auto rows = j.at("values").get<std::vector<std::vector<double>>>();
    if (rows.size() != weights.size())
        throw std::invalid_argument("graphon JSON: values row count must match weights");
    return StepGraphon(weights, rows);
}

inline StepGraphon load_graphon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open graphon file: " + path);
    nlohmann::json j;
    in >> j;
    return graphon_from_json(j);
}

inline void save_graphon(const std::string& path, const StepGraphon& f) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write graphon file: " + path);
    out << graphon_to_json(f).dump(2) << '\n';
}

inline SimpleGraph graph_from_stream(std::istream& in) {
    std::size_t n = 0, m = 0;
    if (!(in >> n >> m)) throw std::invalid_argument("graph text: expected \"n m\" header");
    SimpleGraph g(n);
    for (std::size_t e = 0; e < m; ++e) {
        std::size_t u = 0, v = 0;
        if (!(in >> u >> v)) throw std::invalid_argument("graph text: truncated edge list");
        g.add_edge(u, v);
    }
    return g;
}

inline SimpleGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open graph file: " + path);
    return graph_from_stream(in);
}

inline void write_graph(std::ostream& out, const SimpleGraph& g) {
    out << g.vertex_count() << ' ' << g.edge_count() << '\n';
    for (std::size_t u = 0; u < g.vertex_count(); ++u)
        for (std::uint32_t v : g.neighbors(u))
            if (v > u) out << u << ' ' << v << '\n';
}

// Rounds every float in place to 9 significant digits (the printed
// precision), so dump() output carries no extra noise.
inline void round_numbers(nlohmann::json& j) {
    if (j.is_number_float()) {
        j = std::stod(format_g9(j.get<double>()));
    } else if (j.is_array() || j.is_object()) {
        for (auto& item : j) round_numbers(item);
    }
}

inline std::string dump_rounded(nlohmann::json j, int indent = 2) {
    round_numbers(j);
    return j.dump(indent);
}

inline nlohmann::json phase_point_to_json(const PhasePoint& r) {
    nlohmann::json j;
    j["p"] = r.p;
    j["t"] = r.t;
    j["h"] = r.h;
    j["h_hat"] = r.h_hat;
    j["beta"] = r.beta;
    j["beta_left"] = r.beta_left;
    j["beta_right"] = r.beta_right;
    j["phase"] = phase_name(r.phase);
    return j;
}

inline std::string phase_csv(const std::vector<PhasePoint>& rows) {
    std::ostringstream out;
    out << "# schema: graphon_ldp.phase v1\n";
    out << "p,t,h,h_hat,beta,phase\n";
    for (const PhasePoint& r : rows)
        out << format_g9(r.p) << ',' << format_g9(r.t) << ',' << format_g9(r.h) << ','
            << format_g9(r.h_hat) << ',' << format_g9(r.beta) << ',' << phase_name(r.phase)
            << '\n';
    out << "# double_transition " << (has_double_transition(rows) ? 1 : 0) << '\n';
    return out.str();
}

inline nlohmann::json solve_result_to_json(const SolveResult& r, bool include_optima = false) {
    nlohmann::json j;
    j["objective"] = r.objective;
    j["achieved_t"] = r.achieved_t;
    j["method"] = method_name(r.method);
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["optimizer"] = graphon_to_json(r.optimizer);
    nlohmann::json log = nlohmann::json::array();
    for (const MultistartRecord& m : r.multistart_log)
        log.push_back({{"label", m.label}, {"objective", m.objective}});
    j["multistart"] = log;
    j["distinct_optima"] = r.distinct_optima.size();
    if (include_optima) {
        nlohmann::json opts = nlohmann::json::array();
        for (const StepGraphon& g : r.distinct_optima) opts.push_back(graphon_to_json(g));
        j["optima"] = opts;
    }
    return j;
}

inline nlohmann::json tail_estimate_to_json(const TailEstimate& e) {
    nlohmann::json j;
    j["n"] = e.n;
    j["p"] = e.p;
    j["t"] = e.t;
    j["log_prob_per_n2"] = e.log_prob_per_n2;
    j["std_error"] = e.std_error;
    j["samples"] = e.samples;
    j["accepted"] = e.accepted;
    j["tilt"] = graphon_to_json(e.tilt);
    return j;
}

inline std::string conditional_csv(const std::vector<ConditionalRow>& rows) {
    std::ostringstream out;
    out << "# schema: graphon_ldp.conditional v1\n";
    out << "ref_label,mean_distance,std_error,accepted_samples\n";
    for (const ConditionalRow& r : rows)
        out << r.ref_label << ',' << format_g9(r.mean_distance) << ',' << format_g9(r.std_error)
            << ',' << r.accepted_samples << '\n';
    return out.str();
}

}  // namespace graphon
