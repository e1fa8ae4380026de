// Command-line front end: scenario simulation, hypothesis analysis,
// transport snapshots, registered-example reproduction, and
// continuous-dependence sweeps.
//
// Exit codes: 0 success, 1 usage or config error, 2 reproduction check
// failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "delaydiff/json_io.hpp"
#include "delaydiff/registry.hpp"

namespace fs = std::filesystem;
using namespace delaydiff;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    return j;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t";
    for (int i = 1; i <= traj.dim; ++i) out += ",x_" + std::to_string(i);
    out += "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += fmt(traj.times[i]);
        for (int k = 0; k < traj.dim; ++k) out += "," + fmt(traj.values[i](k));
        out += "\n";
    }
    return out;
}

json trajectory_json(const Trajectory& traj) {
    json j;
    j["t"] = traj.times;
    json vals = json::array();
    for (const Vec& v : traj.values) vals.push_back(jsonio::vec_to_json(v));
    j["x"] = std::move(vals);
    j["residual"] = traj.residual_report;
    return j;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, const std::string& format) {
    const Scenario scn = jsonio::scenario_from_json(load_config(config_path));
    const Trajectory traj = solve_stepping(scn);
    fs::create_directories(out_dir);
    if (format == "json") {
        write_file(fs::path(out_dir) / "trajectory.json", trajectory_json(traj).dump(2) + "\n");
    } else {
        write_file(fs::path(out_dir) / "trajectory.csv", trajectory_csv(traj));
    }
    if (!scn.norm_requests.empty()) {
        std::string csv = "t,p,window,norm\n";
        for (const auto& req : scn.norm_requests) {
            for (double t : scn.output_grid) {
                if (t < 0.0) continue;
                double window;
                if (req.fixed_window) window = *req.fixed_window;
                else window = largest_delay(scn.delay, t, 2.0 * std::max(t, scn.horizon_T)).h_of_t;
                if (t - window < traj.times.front()) continue;
                const double n = window_norm(traj, t, req.p, window);
                csv += fmt(t) + "," + (std::isfinite(req.p) ? fmt(req.p) : "inf") + "," + fmt(window) + "," + fmt(n) + "\n";
            }
        }
        write_file(fs::path(out_dir) / "norms.csv", csv);
    }
    std::cout << "wrote " << out_dir << " (residual " << fmt(traj.residual_report) << ")\n";
    return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& out_path, std::optional<double> p) {
    const Scenario scn = jsonio::scenario_from_json(load_config(config_path));
    json out;
    out["hypotheses"] = jsonio::report_to_json(audit_hypotheses(scn.delay, scn.matrix, scn.horizon_T, p));
    try {
        out["certificate_pointwise"] = jsonio::certificate_to_json(certify_exponential(scn, 0.1));
    } catch (const Error& e) {
        out["certificate_pointwise"] = json{{"refused", e.what()}};
    }
    if (scn.delay.declared_tau_max) {
        try {
            out["certificate_window"] = jsonio::certificate_to_json(certify_exponential(scn, 0.1, CertKind::SupWindowExp));
        } catch (const Error& e) {
            out["certificate_window"] = json{{"refused", e.what()}};
        }
    }
    if (p && std::isfinite(*p)) {
        try {
            out["certificate_lp"] = jsonio::certificate_to_json(certify_exponential_Lp(scn, *p));
        } catch (const Error& e) {
            out["certificate_lp"] = json{{"refused", e.what()}};
        }
        out["density_check"] = [&] {
            const auto r = check_H6_H9(scn.delay, scn.matrix, *p, scn.horizon_T);
            return json{{"phi_sup", r.phi_sup},
                        {"product", r.product},
                        {"H6", jsonio::verdict_name(r.verdict_H6)},
                        {"H9", jsonio::verdict_name(r.verdict_H9)},
                        {"analytic", r.analytic}};
        }();
    }
    const std::string text = out.dump(2) + "\n";
    if (out_path.empty()) std::cout << text;
    else write_file(out_path, text);
    return 0;
}

int cmd_transport(const std::string& config_path, const std::string& times_arg, const std::string& out_dir) {
    const json j = load_config(config_path);
    if (!j.contains("field")) throw ConfigError("/field", "missing field");
    if (!j.contains("matrix")) throw ConfigError("/matrix", "missing field");
    if (!j.contains("u0")) throw ConfigError("/u0", "missing field");
    const TransportField field = jsonio::field_from_json(j.at("field"), "/field");
    const SystemMatrix A = make_system_matrix(jsonio::matrix_from_json(j.at("matrix"), "/matrix"));
    Signal u0 = jsonio::signal_from_json(j.at("u0"), "/u0");
    const double step = j.contains("ode_step") ? j.at("ode_step").get<double>() : 0.0;
    const double tol = j.contains("root_tol") ? j.at("root_tol").get<double>() : 1e-10;
    int nx = j.contains("x_points") ? j.at("x_points").get<int>() : 65;

    std::vector<double> times;
    std::stringstream ss(times_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) times.push_back(std::stod(tok));
    if (times.empty()) throw ConfigError("", "no snapshot times given");

    const auto maps = transport::make_characteristic_maps(field, step, tol);
    fs::create_directories(out_dir);
    std::cout << "T0 = " << fmt(maps.T0) << "\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto snap = transport::solve_transport(maps, A, u0, times[i], linspace(0.0, 1.0, static_cast<std::size_t>(nx)));
        std::string csv = "x";
        for (int k = 1; k <= A.dim(); ++k) csv += ",u_" + std::to_string(k);
        csv += "\n";
        for (std::size_t q = 0; q < snap.x_grid.size(); ++q) {
            csv += fmt(snap.x_grid[q]);
            for (int k = 0; k < A.dim(); ++k) csv += "," + fmt(snap.values[q](k));
            csv += "\n";
        }
        write_file(fs::path(out_dir) / ("u_t" + std::to_string(i) + ".csv"), csv);
        if (!snap.compatible && times[i] == times.front())
            std::cout << "note: u0(0) != A u0(1); boundary trace starts with a jump\n";
    }
    std::cout << "wrote " << times.size() << " snapshot(s) to " << out_dir << "\n";
    return 0;
}

int cmd_reproduce(const std::string& id, const std::string& out_dir) {
    const auto rep = registry::run_example(id);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        for (const auto& [name, content] : rep.artifacts) write_file(fs::path(out_dir) / name, content);
    }
    for (const auto& c : rep.checks) {
        std::cout << (c.passed ? "[pass] " : "[FAIL] ") << rep.id << ": " << c.name << "  (measured " << fmt(c.measured)
                  << ", expected " << fmt(c.expected);
        if (c.tolerance > 0) std::cout << " +- " << fmt(c.tolerance);
        std::cout << ")  -- " << c.basis << "\n";
    }
    return rep.all_passed() ? 0 : 2;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
    const json j = load_config(config_path);
    const Scenario scn = jsonio::scenario_from_json(j);
    if (!j.contains("sweep")) throw ConfigError("/sweep", "missing field");
    const json& sj = j.at("sweep");
    const int k_max = sj.contains("k_max") ? sj.at("k_max").get<int>() : 50;
    const std::string mode_s = sj.contains("mode") ? sj.at("mode").get<std::string>() : "uniform-compact";
    ConvergenceMode mode = ConvergenceMode::UniformCompact;
    if (mode_s == "pointwise") mode = ConvergenceMode::Pointwise;
    else if (mode_s == "uniform-global") mode = ConvergenceMode::UniformGlobal;
    else if (mode_s != "uniform-compact") throw ConfigError("/sweep/mode", "unknown mode '" + mode_s + "'");

    // perturbation family: A_k = A + (1/k) P, x0_k = x0 + (1/k) q
    Mat P = Mat::Identity(scn.matrix.dim(), scn.matrix.dim());
    if (sj.contains("matrix_step")) P = jsonio::matrix_from_json(sj.at("matrix_step"), "/sweep/matrix_step");
    Vec q = Vec::Zero(scn.matrix.dim());
    if (sj.contains("initial_step")) q = jsonio::vec_from_json(sj.at("initial_step"), "/sweep/initial_step");

    const Scenario base = scn;
    auto A_seq = [&](int k) { return make_system_matrix(base.matrix.entries + P / static_cast<double>(k)); };
    auto x0_seq = [&](int k) -> Signal {
        if (q.isZero()) return base.initial;
        if (const auto* cf = std::get_if<ConstantForm>(&base.initial.form)) {
            Signal s = base.initial;
            s.form = ConstantForm{cf->value + q / static_cast<double>(k)};
            return s;
        }
        throw ConfigError("/sweep/initial_step", "initial-condition stepping needs a constant-form initial signal");
    };
    const ConvergenceTable table = continuous_dependence_sweep(A_seq, x0_seq, base, k_max, mode);

    std::string csv = "k,sup_distance\n";
    for (std::size_t i = 0; i < table.k.size(); ++i)
        csv += std::to_string(table.k[i]) + "," + fmt(table.sup_distance[i]) + "\n";
    if (out_dir.empty()) std::cout << csv;
    else {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "sweep.csv", csv);
        std::cout << "wrote " << (fs::path(out_dir) / "sweep.csv").string() << "\n";
        if (!table.note.empty()) std::cout << table.note << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and analysis toolkit for difference equations with a time-dependent delay"};
    app.require_subcommand(1);

    std::string config, out_dir, format = "csv", times_arg, example_id, out_path;
    std::optional<double> p_opt;

    auto* sim = app.add_subcommand("simulate", "solve a scenario and write the trajectory");
    sim->add_option("--config", config, "scenario JSON file")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* ana = app.add_subcommand("analyze", "hypothesis report and decay certificates");
    ana->add_option("--config", config, "scenario JSON file")->required();
    ana->add_option("--out", out_path, "output JSON file (stdout if omitted)");
    double p_val = 0.0;
    auto* popt = ana->add_option("--p", p_val, "exponent for the integrability checks");

    auto* tra = app.add_subcommand("transport", "solve the boundary-coupled transport problem");
    tra->add_option("--config", config, "field/matrix/u0 JSON file")->required();
    tra->add_option("--times", times_arg, "comma-separated snapshot times")->required();
    tra->add_option("--out", out_dir, "output directory")->required();

    auto* repro = app.add_subcommand("reproduce", "run a registered example and check its expected values");
    repro->add_option("example", example_id, "example id (see --list)")->required();
    repro->add_option("--out", out_dir, "directory for emitted data files");

    auto* list = app.add_subcommand("list", "list the registered example ids");

    auto* swp = app.add_subcommand("sweep", "continuous-dependence table over a perturbation family");
    swp->add_option("--config", config, "scenario JSON file with a /sweep block")->required();
    swp->add_option("--out", out_dir, "output directory (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return (code == 0) ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config, out_dir, format);
        if (ana->parsed()) {
            if (popt->count() > 0) p_opt = p_val;
            return cmd_analyze(config, out_path, p_opt);
        }
        if (tra->parsed()) return cmd_transport(config, times_arg, out_dir);
        if (repro->parsed()) return cmd_reproduce(example_id, out_dir);
        if (list->parsed()) {
            for (const auto& id : registry::example_ids()) std::cout << id << "\n";
            return 0;
        }
        if (swp->parsed()) return cmd_sweep(config, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
