#pragma once

// Scenario config files: a small sectioned key = value format.
//
//     # four-agent switching consensus run
//     [graphs]
//     file = graphs/switch_a.txt          # repeated, one per topology
//     file = graphs/switch_b.txt
//
//     [schedule]
//     segments = 0.5:1 0.5:2 1:3          # duration:topology, 1-based
//     periodic = true
//
//     [model]
//     type = si                           # si | di
//
//     [gains]
//     b = 1 -4 -3 6                       # plant side only, nonzero
//
//     [params]
//     lambda1 = 0.4
//     lambda2 = 0.2
//     rho = 0.55                          # required for di
//
//     [initial]
//     x0 = -1 1.2 -3 1.5
//     v0 = -0.2 -1 0.2 1                  # required for di
//
//     [sim]
//     horizon = 40
//     step = 0.001                        # optional, default 1e-3
//     record_every = 10                   # optional, default 1
//
//     [output]
//     directory = out/run                 # optional
//
// Graph paths resolve relative to the config file. Unknown sections or keys
// are rejected. '#' starts a comment anywhere on a line. rho and v0 are
// accepted (and kept) on si configs so the same file can be re-run as di.
//
// Loading checks dimensions and parameter signs but not the step-vs-dwell
// relation; that is the simulator's gate, so that `validate` can still
// report on schedules a simulation would refuse.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <nupi/detail/text.hpp>
#include <nupi/errors.hpp>
#include <nupi/simulate.hpp>

namespace nupi {

/// A parsed scenario plus the file-level information needed to re-emit it.
struct ScenarioFile {
    Scenario scenario;
    std::vector<std::filesystem::path> graph_files;  // resolved
    std::vector<Segment> segments;
    bool periodic = false;
    std::filesystem::path output_dir;  // empty when the config names none
    std::filesystem::path source;
    bool has_rho = false;  // rho/v0 present in the file (kept for si configs)
    double rho = 0.0;
    Eigen::VectorXd v0;
};

namespace detail {

inline Eigen::VectorXd parse_vector(const std::string& text, const std::string& where) {
    const auto toks = tokens(text);
    if (toks.empty()) throw ParseError(where + ": expected a list of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(toks.size()));
    for (std::size_t i = 0; i < toks.size(); ++i) {
        std::size_t used = 0;
        try {
            out(static_cast<Eigen::Index>(i)) = std::stod(toks[i], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != toks[i].size()) throw ParseError(where + ": bad number '" + toks[i] + "'");
    }
    return out;
}

inline double parse_double(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ParseError(where + ": bad number '" + text + "'");
    return v;
}

inline int parse_int(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ParseError(where + ": bad integer '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& text, const std::string& where) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ParseError(where + ": expected true or false, got '" + text + "'");
}

}  // namespace detail

inline ScenarioFile load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open");
    auto at = [&](int line) { return path.string() + ":" + std::to_string(line); };

    static const std::map<std::string, std::set<std::string>> known = {
        {"graphs", {"file"}},
        {"schedule", {"segments", "periodic"}},
        {"model", {"type"}},
        {"gains", {"b"}},
        {"params", {"lambda1", "lambda2", "rho"}},
        {"initial", {"x0", "v0"}},
        {"sim", {"horizon", "step", "record_every"}},
        {"output", {"directory"}},
    };

    struct Entry {
        int line = 0;
        std::string value;
    };
    std::map<std::string, std::vector<std::pair<std::string, Entry>>> sections;
    {
        std::string raw, section;
        int lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            const std::string line = detail::strip_comment(raw);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ParseError(at(lineno) + ": unterminated section header");
                section = detail::trim(line.substr(1, line.size() - 2));
                if (!known.count(section))
                    throw ParseError(at(lineno) + ": unknown section [" + section + "]");
                sections[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError(at(lineno) + ": expected 'key = value'");
            if (section.empty()) throw ParseError(at(lineno) + ": key outside of any section");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (!known.at(section).count(key))
                throw ParseError(at(lineno) + ": unknown key '" + key + "' in [" + section + "]");
            if (value.empty()) throw ParseError(at(lineno) + ": empty value for '" + key + "'");
            sections[section].push_back({key, {lineno, value}});
        }
    }

    for (const char* name : {"graphs", "schedule", "model", "gains", "params", "initial", "sim"})
        if (!sections.count(name))
            throw ParseError(path.string() + ": missing section [" + std::string(name) + "]");

    // Repetition is only meaningful for [graphs] file entries.
    for (const auto& [name, entries] : sections) {
        std::set<std::string> seen;
        for (const auto& [key, entry] : entries) {
            if (name == "graphs" && key == "file") continue;
            if (!seen.insert(key).second)
                throw ParseError(at(entry.line) + ": duplicate key '" + key + "'");
        }
    }

    auto get = [&](const std::string& section, const std::string& key,
                   bool required) -> std::optional<std::pair<int, std::string>> {
        auto it = sections.find(section);
        if (it != sections.end())
            for (const auto& [k, entry] : it->second)
                if (k == key) return std::make_pair(entry.line, entry.value);
        if (required)
            throw ParseError(path.string() + ": missing key '" + key + "' in [" + section + "]");
        return std::nullopt;
    };

    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    // graphs
    std::vector<std::filesystem::path> graph_files;
    std::vector<DiGraph> graphs;
    for (const auto& [key, entry] : sections.at("graphs")) {
        std::filesystem::path p(entry.value);
        if (p.is_relative()) p = base / p;
        graph_files.push_back(p);
        graphs.push_back(load_digraph(p));
    }
    if (graphs.empty()) throw ParseError(path.string() + ": [graphs] needs at least one file");

    // schedule
    std::vector<Segment> segments;
    const auto seg_entry = *get("schedule", "segments", true);
    for (const std::string& tok : detail::tokens(seg_entry.second)) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw ParseError(at(seg_entry.first) + ": segment '" + tok +
                             "' is not duration:topology");
        Segment s;
        s.duration = detail::parse_double(tok.substr(0, colon), at(seg_entry.first));
        s.topology = detail::parse_int(tok.substr(colon + 1), at(seg_entry.first));
        segments.push_back(s);
    }
    bool periodic = false;
    if (auto p = get("schedule", "periodic", false))
        periodic = detail::parse_bool(p->second, at(p->first));

    // model
    const auto model_entry = *get("model", "type", true);
    Model model;
    if (model_entry.second == "si")
        model = Model::SI;
    else if (model_entry.second == "di")
        model = Model::DI;
    else
        throw ParseError(at(model_entry.first) + ": model type must be si or di");

    // params
    ControllerParams params;
    params.lambda1 = detail::parse_double(get("params", "lambda1", true)->second, path.string());
    params.lambda2 = detail::parse_double(get("params", "lambda2", true)->second, path.string());
    bool has_rho = false;
    double rho = 0.0;
    if (auto r = get("params", "rho", model == Model::DI)) {
        has_rho = true;
        rho = detail::parse_double(r->second, at(r->first));
        params.rho = rho;
    }

    // gains and initial state
    const auto b = detail::parse_vector(get("gains", "b", true)->second, path.string());
    const auto x0 = detail::parse_vector(get("initial", "x0", true)->second, path.string());
    Eigen::VectorXd v0;
    if (auto v = get("initial", "v0", model == Model::DI))
        v0 = detail::parse_vector(v->second, at(v->first));

    // sim
    const double horizon = detail::parse_double(get("sim", "horizon", true)->second, path.string());
    double step = 1e-3;
    if (auto s = get("sim", "step", false)) step = detail::parse_double(s->second, at(s->first));
    int record_every = 1;
    if (auto r = get("sim", "record_every", false))
        record_every = detail::parse_int(r->second, at(r->first));

    std::filesystem::path output_dir;
    if (auto o = get("output", "directory", false)) output_dir = o->second;

    try {
        Scenario sc{SwitchSchedule::from_segments(std::move(graphs), segments, periodic),
                    GainVector(b),
                    params,
                    model,
                    x0,
                    model == Model::DI ? v0 : Eigen::VectorXd(),
                    horizon,
                    step,
                    record_every};
        const int n = sc.schedule.agent_count();
        if (sc.x0.size() != n) throw DimensionError("x0 length must match the agent count");
        if (sc.gains.size() != n)
            throw DimensionError("gain vector length must match the agent count");
        if (sc.model == Model::SI)
            sc.params.require_si();
        else {
            sc.params.require_di();
            if (sc.v0.size() != n) throw DimensionError("v0 length must match the agent count");
        }
        if (!(sc.horizon > 0.0)) throw ArgumentError("horizon must be positive");
        if (!(sc.step > 0.0)) throw ArgumentError("step must be positive");
        if (sc.record_every < 1) throw ArgumentError("record_every must be >= 1");

        return ScenarioFile{std::move(sc),  std::move(graph_files), std::move(segments),
                            periodic,       std::move(output_dir),  path,
                            has_rho,        rho,                    std::move(v0)};
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

/// Overrides applied by the command line on top of a parsed config.
struct ScenarioOverrides {
    std::optional<Model> model;
    std::optional<double> horizon;
    std::optional<double> step;
};

inline void apply_overrides(ScenarioFile& sf, const ScenarioOverrides& ov) {
    Scenario& sc = sf.scenario;
    if (ov.horizon) {
        if (!(*ov.horizon > 0.0)) throw ArgumentError("horizon must be positive");
        sc.horizon = *ov.horizon;
    }
    if (ov.step) {
        if (!(*ov.step > 0.0)) throw ArgumentError("step must be positive");
        sc.step = *ov.step;
    }
    if (ov.model && *ov.model != sc.model) {
        sc.model = *ov.model;
        if (sc.model == Model::DI) {
            if (!sf.has_rho)
                throw ArgumentError(sf.source.string() + ": di override needs rho in [params]");
            if (sf.v0.size() != sc.x0.size())
                throw ArgumentError(sf.source.string() + ": di override needs v0 in [initial]");
            sc.params.rho = sf.rho;
            sc.params.require_di();
            sc.v0 = sf.v0;
        } else {
            sc.v0 = Eigen::VectorXd();
        }
    }
}

/// Re-emits a loadable config describing exactly this scenario; numbers keep
/// 17 significant digits and graph paths are written as resolved.
inline void dump_scenario(const ScenarioFile& sf, std::ostream& out) {
    using detail::g17;
    const Scenario& sc = sf.scenario;
    out << "[graphs]\n";
    for (const auto& p : sf.graph_files)
        out << "file = " << std::filesystem::absolute(p).string() << "\n";
    out << "\n[schedule]\n";
    out << "segments =";
    for (const Segment& s : sf.segments) out << " " << g17(s.duration) << ":" << s.topology;
    out << "\n";
    out << "periodic = " << (sf.periodic ? "true" : "false") << "\n";
    out << "\n[model]\n";
    out << "type = " << (sc.model == Model::SI ? "si" : "di") << "\n";
    out << "\n[gains]\n";
    out << "b =";
    for (int i = 0; i < sc.gains.size(); ++i) out << " " << g17(sc.gains[i]);
    out << "\n";
    out << "\n[params]\n";
    out << "lambda1 = " << g17(sc.params.lambda1) << "\n";
    out << "lambda2 = " << g17(sc.params.lambda2) << "\n";
    if (sf.has_rho) out << "rho = " << g17(sf.rho) << "\n";
    out << "\n[initial]\n";
    out << "x0 =";
    for (Eigen::Index i = 0; i < sc.x0.size(); ++i) out << " " << g17(sc.x0(i));
    out << "\n";
    if (sf.v0.size() > 0) {
        out << "v0 =";
        for (Eigen::Index i = 0; i < sf.v0.size(); ++i) out << " " << g17(sf.v0(i));
        out << "\n";
    }
    out << "\n[sim]\n";
    out << "horizon = " << g17(sc.horizon) << "\n";
    out << "step = " << g17(sc.step) << "\n";
    out << "record_every = " << sc.record_every << "\n";
    if (!sf.output_dir.empty()) {
        out << "\n[output]\n";
        out << "directory = " << sf.output_dir.string() << "\n";
    }
}

}  // namespace nupi
