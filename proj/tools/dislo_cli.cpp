// Command-line front end for the dislocation-density DDE library.
//
// Subcommands: solve, analytic, tcr, convergence, scan, scenario.
// Exit codes: 0 success, 2 numeric failure (divergence, non-convergence),
// 3 input error (bad flags, malformed files).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dislo/dislo.hpp"

namespace {

namespace fs = std::filesystem;

/// Resolve an output file name against --out / DISLO_OUTDIR.
fs::path out_path(const std::string& explicit_path, const std::string& default_name) {
    if (!explicit_path.empty())
        return explicit_path;
    const char* dir = std::getenv("DISLO_OUTDIR");
    return fs::path(dir ? dir : ".") / default_name;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os)
        throw dislo::format_error("cannot open output file '" + p.string() + "'");
    return os;
}

std::vector<dislo::TrackSample> load_track(const std::string& file) {
    std::ifstream in(file);
    if (!in)
        throw dislo::format_error("cannot open track file '" + file + "'");
    return dislo::read_track_csv(in);
}

dislo::Method method_from_flag(const std::string& s) {
    auto m = dislo::parse_method(s);
    if (!m)
        throw dislo::format_error("unknown method '" + s + "'");
    return *m;
}

/// Shared constant-model flags: either --case or explicit coefficients.
struct ModelArgs {
    std::string case_label;
    double A1 = 10.0, A2 = 1.0, A3 = 0.9;
    double rho_cr = 1.0, rho0 = 0.0, a8 = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--case", case_label, "benchmark case label (i..vii)");
        cmd->add_option("--A1", A1, "hardening coefficient");
        cmd->add_option("--A2", A2, "recovery coefficient");
        cmd->add_option("--A3", A3, "recrystallization coefficient");
        cmd->add_option("--rho-cr", rho_cr, "critical density");
        cmd->add_option("--rho0", rho0, "initial density");
        cmd->add_option("--a8", a8, "density exponent in the delay term");
    }

    dislo::ConstantModel model() const {
        if (!case_label.empty())
            return dislo::benchmark_case(case_label).model;
        return {A1, A2, A3, a8, rho0, rho_cr};
    }
};

int cmd_solve(const ModelArgs& ma, const std::string& method_flag, int N, int intervals,
              double horizon, const std::string& out, const std::string& summary) {
    const dislo::Method method = method_from_flag(method_flag);

    dislo::SolutionPath path;
    std::optional<double> tcr;
    if (ma.case_label.empty() && ma.A1 == 0.0 && ma.rho0 == 0.0) {
        // degenerate case: the zero path, no crossing ever happens
        dislo::bernoulli_degenerate_check(ma.A1, ma.rho0);
        dislo::DdeProblem p;
        p.rhs = [](double, double, double) { return 0.0; };
        p.t_cr = horizon;
        p.eta = 0.0;
        p.horizon = horizon;
        path = dislo::solve(p, method, N);
    } else {
        const dislo::ConstantModel m = ma.model();
        tcr = dislo::t_cr_constant(m);
        path = dislo::solve(dislo::make_problem(m, intervals * *tcr), method, N);
    }

    auto os = open_out(out_path(out, "path.csv"));
    path.write_csv(os);

    nlohmann::json j;
    j["t_cr"] = tcr ? nlohmann::json(*tcr) : nlohmann::json(nullptr);
    double rho_max = path.values[0][0];
    for (const auto& iv : path.values)
        for (double y : iv)
            rho_max = std::max(rho_max, y);
    j["rho_max"] = rho_max;
    j["method"] = path.method;
    j["N"] = N;
    j["flags"] = {{"went_negative", path.went_negative},
                  {"exceeded_bound", path.exceeded_bound}};
    auto js = open_out(out_path(summary, "path_summary.json"));
    js << j.dump(2) << '\n';
    return 0;
}

int cmd_analytic(const ModelArgs& ma, double t, int intervals) {
    const dislo::ConstantModel m = ma.model();
    const dislo::AnalyticSolution sol(m, intervals);
    std::cout.precision(17);
    std::cout << sol(t) << '\n';
    return 0;
}

int cmd_tcr(const ModelArgs& ma, const std::string& preset_name, double horizon) {
    std::cout.precision(17);
    if (!preset_name.empty()) {
        const dislo::MaterialPreset preset = dislo::named_preset(preset_name);
        const dislo::CoefficientTrack track = dislo::preset_constant_track(preset);
        auto cr = dislo::detect_t_cr(track, preset.rho0, preset.a9, horizon / 100000.0, horizon);
        if (!cr) {
            std::cout << "no crossing within horizon\n";
            return 0;
        }
        std::cout << cr->t_cr << '\n';
        return 0;
    }
    const dislo::ConstantModel m = ma.model();
    const double closed = dislo::t_cr_constant(m);
    const auto track = dislo::CoefficientTrack::constant(m.A1, m.A2, m.A3, 1.0, m.rho_cr);
    auto cr = dislo::detect_t_cr(track, m.rho0, 0.0, closed / 10000.0, 10.0 * closed);
    std::cout << "closed-form " << closed << '\n';
    std::cout << "detected    " << (cr ? cr->t_cr : -1.0) << '\n';
    return 0;
}

int cmd_convergence(const ModelArgs& ma, const std::string& methods_flag,
                    const std::string& ladder_flag, const std::string& out,
                    const std::string& table_out) {
    std::vector<dislo::Method> methods;
    {
        std::stringstream ss(methods_flag);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                methods.push_back(method_from_flag(tok));
    }
    if (methods.empty())
        throw dislo::format_error("method list must not be empty");
    std::vector<long> Ns;
    {
        std::stringstream ss(ladder_flag);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                Ns.push_back(std::stol(tok));
    }
    if (Ns.empty())
        throw dislo::format_error("N ladder must not be empty");

    dislo::TestCase tc;
    if (!ma.case_label.empty()) {
        tc = dislo::benchmark_case(ma.case_label);
    } else {
        tc.label = "custom";
        tc.model = ma.model();
        tc.model.validate();
        tc.analytic_reference = (tc.model.a8 == 0.0 || tc.model.a8 == 1.0) && tc.model.stable();
        if (tc.model.a8 == 1.0)
            tc.horizon_intervals = 2;
    }
    const dislo::ErrorReport report = dislo::run_case(tc, methods, Ns);

    auto os = open_out(out_path(out, "convergence.csv"));
    report.write_csv(os);
    if (!table_out.empty()) {
        auto ts = open_out(table_out);
        report.write_table(ts);
    }
    report.write_table(std::cout);
    return 0;
}

int cmd_scan(const ModelArgs& ma, const std::string& a3_flag, int N, const std::string& out) {
    std::vector<double> a3s;
    {
        std::stringstream ss(a3_flag);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                a3s.push_back(std::stod(tok));
    }
    if (a3s.empty())
        throw dislo::format_error("A3 value list must not be empty");
    dislo::ConstantModel base = ma.model();
    const auto entries = dislo::stability_scan(base, a3s, N);
    char buf[160];
    std::string text = "A3          class                 sign_changes  growth   min\n";
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof buf, "%-11g %-21s %12d  %7.3f  %g\n", e.A3,
                      dislo::stability_name(e.cls), e.sign_changes, e.growth_factor, e.min_value);
        text += buf;
    }
    std::cout << text;
    if (!out.empty()) {
        auto os = open_out(out);
        os << "A3,class,sign_changes,growth,min\n";
        for (const auto& e : entries) {
            std::snprintf(buf, sizeof buf, "%.17g,%s,%d,%.6f,%.17g\n", e.A3,
                          dislo::stability_name(e.cls), e.sign_changes, e.growth_factor,
                          e.min_value);
            os << buf;
        }
    }
    return 0;
}

int cmd_scenario(const std::string& preset_name, const std::string& preset_file,
                 const std::string& track_file, double rho0_flag, bool rho0_set,
                 const std::string& method_flag, int N, double horizon_flag,
                 const std::string& out, const std::string& summary,
                 const std::vector<std::string>& compare_files) {
    dislo::MaterialPreset preset;
    if (!preset_file.empty()) {
        std::ifstream in(preset_file);
        if (!in)
            throw dislo::format_error("cannot open preset file '" + preset_file + "'");
        preset = dislo::read_preset(in);
    } else {
        preset = dislo::named_preset(preset_name.empty() ? "copper-575" : preset_name);
    }
    const double rho0 = rho0_set ? rho0_flag : preset.rho0;
    const dislo::Method method = method_from_flag(method_flag);

    auto run_one = [&](const std::string& track) {
        dislo::CoefficientTrack coeffs =
            track.empty() ? dislo::preset_constant_track(preset)
                          : dislo::preset_track(preset, load_track(track));
        double horizon = horizon_flag;
        if (!(horizon > 0.0)) {
            if (track.empty() || !std::isfinite(coeffs.t_max()))
                throw dislo::format_error("--horizon is required without a finite track");
            horizon = coeffs.t_max();
        }
        return dislo::run_scenario(preset, coeffs, rho0, method, N, horizon);
    };

    if (!compare_files.empty()) {
        if (compare_files.size() != 2)
            throw dislo::format_error("--compare needs exactly two track files");
        const auto first = run_one(compare_files[0]);
        const auto second = run_one(compare_files[1]);
        const auto cmp = dislo::compare_lines(first, second);
        nlohmann::json j;
        j["verdict"] = cmp.verdict;
        j["text"] = cmp.text;
        j["t_cr_first"] = cmp.t_cr_first ? nlohmann::json(*cmp.t_cr_first) : nullptr;
        j["t_cr_second"] = cmp.t_cr_second ? nlohmann::json(*cmp.t_cr_second) : nullptr;
        std::cout << j.dump(2) << '\n';
        auto js = open_out(out_path(summary, "compare.json"));
        js << j.dump(2) << '\n';
        return 0;
    }

    const dislo::ScenarioResult r = run_one(track_file);
    auto os = open_out(out_path(out, "scenario.csv"));
    dislo::write_scenario_csv(r, os);
    auto js = open_out(out_path(summary, "scenario_summary.json"));
    js << dislo::scenario_summary(r).dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dislocation-density DDE toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file");

    // solve
    auto* solve = app.add_subcommand("solve", "solve the constant-coefficient model");
    ModelArgs solve_ma;
    solve_ma.attach(solve);
    std::string solve_method = "explicit-euler", solve_out, solve_summary;
    int solve_N = 1000, solve_intervals = 10;
    double solve_horizon = 1.0;
    solve->add_option("--method", solve_method, "explicit-euler | backward-euler | rk4");
    solve->add_option("--N", solve_N, "steps per delay interval");
    solve->add_option("--intervals", solve_intervals, "horizon in multiples of t_cr");
    solve->add_option("--horizon", solve_horizon, "horizon [s] for the degenerate zero case");
    solve->add_option("--out", solve_out, "path CSV output file");
    solve->add_option("--summary", solve_summary, "summary JSON output file");

    // analytic
    auto* analytic = app.add_subcommand("analytic", "evaluate the analytic solution at a time");
    ModelArgs an_ma;
    an_ma.attach(analytic);
    double an_t = 0.0;
    int an_intervals = 10;
    analytic->add_option("--t", an_t, "evaluation time")->required();
    analytic->add_option("--intervals", an_intervals, "recursion depth in delay intervals");

    // tcr
    auto* tcr = app.add_subcommand("tcr", "critical time: closed form vs numeric detection");
    ModelArgs tcr_ma;
    tcr_ma.attach(tcr);
    std::string tcr_preset;
    double tcr_horizon = 10.0;
    tcr->add_option("--preset", tcr_preset, "material preset name");
    tcr->add_option("--horizon", tcr_horizon, "search horizon [s] for preset mode");

    // convergence
    auto* conv = app.add_subcommand("convergence", "worst-case error table over an N ladder");
    ModelArgs conv_ma;
    conv_ma.attach(conv);
    std::string conv_methods = "euler,beuler,rk4";
    std::string conv_ladder = "10,100,1000,10000,100000";
    std::string conv_out, conv_table;
    conv->add_option("--methods", conv_methods, "comma-separated method list");
    conv->add_option("--N-ladder", conv_ladder, "comma-separated steps-per-interval ladder");
    conv->add_option("--out", conv_out, "report CSV output file");
    conv->add_option("--table", conv_table, "aligned text table output file");

    // scan
    auto* scan = app.add_subcommand("scan", "stability classification over an A3 sweep");
    ModelArgs scan_ma;
    scan_ma.attach(scan);
    std::string scan_a3 = "0.0,0.5,0.9,1.5,5.0";
    std::string scan_out;
    int scan_N = 10000;
    scan->add_option("--A3-values", scan_a3, "comma-separated A3 values");
    scan->add_option("--N", scan_N, "steps per delay interval");
    scan->add_option("--out", scan_out, "scan CSV output file");

    // scenario
    auto* scen = app.add_subcommand("scenario", "run a material preset along a flow-line track");
    std::string scen_preset, scen_preset_file, scen_track, scen_method = "explicit-euler";
    std::string scen_out, scen_summary;
    std::vector<std::string> scen_compare;
    double scen_rho0 = 0.0, scen_horizon = 0.0;
    int scen_N = 1000;
    auto* rho0_opt = scen->add_option("--rho0", scen_rho0, "starting density [1/m^2]");
    scen->add_option("--preset", scen_preset, "preset name (copper-575, dp-steel-1100, ...)");
    scen->add_option("--preset-file", scen_preset_file, "key=value preset file");
    scen->add_option("--track", scen_track, "track CSV (t,T_C,eps_dot)");
    scen->add_option("--method", scen_method, "explicit-euler | backward-euler | rk4");
    scen->add_option("--N", scen_N, "steps per delay interval");
    scen->add_option("--horizon", scen_horizon, "horizon [s] (defaults to the track's end)");
    scen->add_option("--out", scen_out, "scenario CSV output file");
    scen->add_option("--summary", scen_summary, "summary JSON output file");
    scen->add_option("--compare", scen_compare, "two track files: compare flow lines")
        ->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        if (solve->parsed())
            return cmd_solve(solve_ma, solve_method, solve_N, solve_intervals, solve_horizon,
                             solve_out, solve_summary);
        if (analytic->parsed())
            return cmd_analytic(an_ma, an_t, an_intervals);
        if (tcr->parsed())
            return cmd_tcr(tcr_ma, tcr_preset, tcr_horizon);
        if (conv->parsed())
            return cmd_convergence(conv_ma, conv_methods, conv_ladder, conv_out, conv_table);
        if (scan->parsed())
            return cmd_scan(scan_ma, scan_a3, scan_N, scan_out);
        if (scen->parsed())
            return cmd_scenario(scen_preset, scen_preset_file, scen_track, scen_rho0,
                                rho0_opt->count() > 0, scen_method, scen_N, scen_horizon,
                                scen_out, scen_summary, scen_compare);
    } catch (const dislo::divergence_error& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const dislo::solver_error& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const dislo::accuracy_error& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const dislo::format_error& e) {
        std::cerr << "input error: " << e.what();
        if (e.row() >= 0)
            std::cerr << " (row " << e.row() << ")";
        std::cerr << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 3;
    }
    return 3;
}
