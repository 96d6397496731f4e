// Command-line front end: graph analysis, schedule validation, and scenario
// simulation with CSV + diagnostics output.
//
// Exit codes: 0 success, 1 validation/config failure, 2 divergence at
// runtime, 64 usage error.

#include <nupi/nupi.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace nupi;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kDivergence = 2;
constexpr int kUsage = 64;

std::string fmt_members(const std::vector<int>& members) {
    std::string out = "{";
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(members[i] + 1);
    }
    return out + "}";
}

std::string fmt_gap(double g) {
    return std::isfinite(g) ? detail::g17(g) : std::string("inf");
}

int cmd_analyze(const std::vector<std::string>& files, std::ostream& out) {
    std::vector<DiGraph> family;
    for (const auto& f : files) {
        DiGraph g = load_digraph(f);
        out << "== " << f << "\n";
        out << "agents: " << g.size() << ", edges: " << g.edge_count() << "\n";
        out << "strongly connected: " << (is_strongly_connected(g) ? "yes" : "no") << "\n";

        out << "strongly connected components:";
        for (const auto& c : strongly_connected_components(g)) out << " " << fmt_members(c);
        out << "\n";

        const auto bcs = basis_bicomponents(g);
        out << "basis bicomponents (d = " << bcs.size() << "):";
        for (const auto& bc : bcs) out << " " << fmt_members(bc.members);
        out << "\n";

        const Laplacian l = laplacian(g);
        out << "rank(L) = " << laplacian_rank(l) << "  (n - d = " << (g.size() - (int)bcs.size())
            << ")\n";
        for (const auto& bc : bcs) {
            const auto omega = left_null_vector(reduced_laplacian(l, bc.members)).omega;
            out << "left eigenvector of " << fmt_members(bc.members) << ":";
            for (Eigen::Index i = 0; i < omega.size(); ++i) out << " " << detail::g17(omega(i));
            out << "\n";
        }
        family.push_back(std::move(g));
    }
    out << "== family\n";
    out << "jointly strongly connected basis: "
        << (has_jointly_strongly_connected_basis(family) ? "yes" : "no") << "\n";
    return kOk;
}

void print_schedule_report(const ScheduleValidation& rep, double step, std::ostream& out) {
    out << "jointly strongly connected basis: " << (rep.joint_basis ? "yes" : "no") << "\n";
    out << "tau_min_observed = " << fmt_gap(rep.tau_min) << "\n";
    for (std::size_t l = 0; l < rep.reactivation_gap.size(); ++l)
        out << "reactivation_gap_" << (l + 1) << " = " << fmt_gap(rep.reactivation_gap[l]) << "\n";
    out << "all topologies reactivated: " << (rep.all_reactivated ? "yes" : "no") << "\n";
    if (rep.tau_min < step)
        out << "warning: tau_min_observed " << fmt_gap(rep.tau_min)
            << " is below the integrator step " << detail::g17(step) << "\n";
    out << "result: " << (rep.pass ? "PASS" : "FAIL") << "\n";
}

int cmd_validate(const std::string& config, std::ostream& out) {
    const ScenarioFile sf = load_scenario(config);
    out << "scenario: " << config << "\n";
    out << "topologies: " << sf.scenario.schedule.topology_count()
        << ", agents: " << sf.scenario.schedule.agent_count() << "\n";
    const ScheduleValidation rep = sf.scenario.schedule.validate();
    print_schedule_report(rep, sf.scenario.step, out);
    return rep.pass ? kOk : kValidationFailure;
}

fs::path pick_output_dir(const ScenarioFile& sf, const std::optional<std::string>& out_flag,
                         bool multi) {
    fs::path base;
    if (out_flag)
        base = *out_flag;
    else if (!sf.output_dir.empty())
        return sf.output_dir;
    else if (const char* env = std::getenv("NUPI_OUT_DIR"))
        base = env;
    else
        base = "out";
    if (multi && out_flag) return base / sf.source.stem();
    if (!out_flag) return base / sf.source.stem();
    return base;
}

struct SimulateFlags {
    std::optional<std::string> model;
    std::optional<double> horizon;
    std::optional<double> step;
    std::optional<std::string> out_dir;
    bool dump_config = false;
};

int run_one(const std::string& config, const SimulateFlags& flags, bool multi, std::ostream& out) {
    ScenarioFile sf = load_scenario(config);
    ScenarioOverrides ov;
    if (flags.model) ov.model = (*flags.model == "di") ? Model::DI : Model::SI;
    ov.horizon = flags.horizon;
    ov.step = flags.step;
    apply_overrides(sf, ov);

    if (flags.dump_config) {
        dump_scenario(sf, out);
        return kOk;
    }

    out << "run: " << config << "\n";
    const ScheduleValidation rep = sf.scenario.schedule.validate();
    if (rep.pass) {
        out << "assumption check: PASS (tau_min_observed = " << fmt_gap(rep.tau_min) << ")\n";
    } else {
        out << "assumption check: FAIL; running anyway, but the convergence guarantees "
               "need the switching assumptions\n";
        print_schedule_report(rep, sf.scenario.step, out);
    }

    const Trajectory tr = simulate(sf.scenario);
    const DiagnosticsReport diag = diagnostics(tr, sf.scenario.gains);

    const fs::path dir = pick_output_dir(sf, flags.out_dir, multi);
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "trajectory.csv");
        write_trajectory_csv(tr, csv);
    }
    {
        std::ofstream rpt(dir / "diagnostics.txt");
        write_report(diag, rpt);
    }
    {
        std::ofstream csv(dir / "diagnostics.csv");
        write_report_csv(diag, csv);
    }

    out << "samples = " << tr.sample_count() << "\n";
    out << "final_diameter = " << detail::g17(diag.final_diameter) << "\n";
    if (tr.model == Model::DI)
        out << "velocity_tail = " << detail::g17(diag.velocity_tail) << "\n";
    out << "nussbaum_bound = " << (diag.nussbaum.pass ? "PASS" : "FAIL") << "\n";
    out << "wrote " << (dir / "trajectory.csv").string() << "\n";
    out << "wrote " << (dir / "diagnostics.txt").string() << "\n";
    out << "wrote " << (dir / "diagnostics.csv").string() << "\n";
    return kOk;
}

int guarded_run(const std::string& config, const SimulateFlags& flags, bool multi,
                std::ostream& out) {
    try {
        return run_one(config, flags, multi, out);
    } catch (const DivergenceError& e) {
        out << "error: " << config << ": " << e.what() << "\n";
        return kDivergence;
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return kValidationFailure;
    }
}

int cmd_simulate(const std::vector<std::string>& configs, const SimulateFlags& flags, int jobs) {
    const bool multi = configs.size() > 1;
    if (flags.dump_config && multi) {
        std::cerr << "--dump-config takes a single config\n";
        return kUsage;
    }
    if (!multi || jobs <= 1) {
        int worst = kOk;
        for (const auto& c : configs) worst = std::max(worst, guarded_run(c, flags, multi, std::cout));
        return worst;
    }

    // Independent scenario files only; each run buffers its own report.
    std::vector<std::future<std::pair<int, std::string>>> futures;
    futures.reserve(configs.size());
    std::size_t next = 0;
    std::vector<std::pair<int, std::string>> results(configs.size());
    while (next < configs.size()) {
        const std::size_t batch = std::min<std::size_t>(jobs, configs.size() - next);
        futures.clear();
        for (std::size_t j = 0; j < batch; ++j) {
            const std::string& cfg = configs[next + j];
            futures.push_back(std::async(std::launch::async, [&flags, cfg] {
                std::ostringstream buf;
                int code = guarded_run(cfg, flags, true, buf);
                return std::make_pair(code, buf.str());
            }));
        }
        for (std::size_t j = 0; j < batch; ++j) results[next + j] = futures[j].get();
        next += batch;
    }
    int worst = kOk;
    for (const auto& [code, text] : results) {
        std::cout << text;
        worst = std::max(worst, code);
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlinear-PI consensus toolkit for agents with unknown control directions"};
    app.require_subcommand(1);

    std::vector<std::string> graph_files;
    auto* analyze = app.add_subcommand(
        "analyze", "Decompose digraphs: components, basis bicomponents, joint connectivity");
    analyze->add_option("files", graph_files, "graph files (edge lists)")->required();

    std::string validate_config;
    auto* validate =
        app.add_subcommand("validate", "Check a scenario's switching assumptions without running");
    validate->add_option("config", validate_config, "scenario config")->required();

    std::vector<std::string> sim_configs;
    SimulateFlags flags;
    int jobs = 1;
    std::string model_str;
    double horizon_val = 0.0, step_val = 0.0;
    std::string out_str;
    auto* simulate_cmd = app.add_subcommand(
        "simulate", "Run scenario(s); writes trajectory CSV and a diagnostics report");
    simulate_cmd->add_option("configs", sim_configs, "scenario config file(s)")->required();
    auto* model_opt = simulate_cmd->add_option("--model", model_str, "override agent model")
                          ->check(CLI::IsMember({"si", "di"}));
    auto* horizon_opt =
        simulate_cmd->add_option("--horizon", horizon_val, "override horizon (seconds)");
    auto* step_opt = simulate_cmd->add_option("--step", step_val, "override integrator step");
    auto* out_opt = simulate_cmd->add_option("--out", out_str, "output directory");
    simulate_cmd->add_flag("--dump-config", flags.dump_config,
                           "print the effective config and exit");
    simulate_cmd->add_option("--jobs", jobs, "run multiple configs in parallel")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kUsage;
    }

    try {
        if (*analyze) return cmd_analyze(graph_files, std::cout);
        if (*validate) return cmd_validate(validate_config, std::cout);
        if (*model_opt) flags.model = model_str;
        if (*horizon_opt) flags.horizon = horizon_val;
        if (*step_opt) flags.step = step_val;
        if (*out_opt) flags.out_dir = out_str;
        return cmd_simulate(sim_configs, flags, jobs);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDivergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationFailure;
    }
}
