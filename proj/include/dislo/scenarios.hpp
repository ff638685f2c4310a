#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dislo/coefficients.hpp"
#include "dislo/errors.hpp"
#include "dislo/integrators.hpp"

namespace dislo {

/// Directly specified (A1, A2, A3) for a fixed laboratory condition, where
/// the underlying a_i constants are not known individually.
struct CompositeCoefficients {
    double A1 = 0, A2 = 0, A3 = 0;
};

/// A named material configuration. Exactly one of `material` (formula-driven
/// from a (T, eps_dot) track) or `composite` (fixed A_i for one condition)
/// must be set.
struct MaterialPreset {
    std::string name = "custom";
    std::optional<MaterialCoefficients> material;
    std::optional<CompositeCoefficients> composite;
    double a8 = 0, a9 = 0;
    double mu = 0;        // shear modulus [MPa]
    double a6 = 1.0;      // flow-stress scale (affine default, see README)
    double a7 = 0.0;      // flow-stress offset [MPa]
    double b = 2.5e-10;   // Burgers vector [m], generic fcc/bcc scale
    double a11 = 1e4;     // additive floor of rho_cr [1/m^2]
    std::optional<double> rho_cr; // required for composite presets
    double eps_dot = 1.0; // default strain rate for constant-condition runs [1/s]
    double T = 0.0;       // default temperature for constant-condition runs [K]
    double rho0 = 1e4;    // starting density [1/m^2]

    void validate() const {
        if (material.has_value() == composite.has_value())
            throw std::invalid_argument(
                "MaterialPreset: exactly one of material/composite must be set");
        if (a8 < 0.0 || a8 > 1.0 || a9 < 0.0 || a9 > 1.0)
            throw std::domain_error("MaterialPreset: a8 and a9 must lie in [0, 1]");
        if (!(mu > 0.0) || !(b > 0.0))
            throw std::domain_error("MaterialPreset: mu and b must be positive");
        if (composite && !rho_cr)
            throw std::invalid_argument("MaterialPreset: composite presets need rho_cr");
        if (material)
            material->validate();
        if (rho0 < 0.0)
            throw std::domain_error("MaterialPreset: rho0 must be nonnegative");
    }
};

/// Copper hot-compression conditions; composite coefficients at 575/625/675 C.
/// rho_cr values are representative thresholds close below the A1/A2 plateau
/// (the individual a10/a12 constants behind them are not available).
inline MaterialPreset copper_preset(int T_celsius = 575) {
    MaterialPreset p;
    p.name = "copper-" + std::to_string(T_celsius);
    p.a8 = 1.0;
    p.a9 = 0.0;
    p.mu = 45000.0;
    p.T = T_celsius + kCelsiusOffset;
    switch (T_celsius) {
    case 575:
        p.composite = CompositeCoefficients{5.35882e14, 11.134, 9.9962e-14};
        p.rho_cr = 4.8e13;
        break;
    case 625:
        p.composite = CompositeCoefficients{3.91516e14, 12.9833, 3.30145e-13};
        p.rho_cr = 3.0e13;
        break;
    case 675:
        p.composite = CompositeCoefficients{2.95672e14, 14.8963, 9.61261e-13};
        p.rho_cr = 1.97e13;
        break;
    default:
        throw std::invalid_argument("copper_preset: temperature must be 575, 625 or 675 C");
    }
    return p;
}

/// DP-steel hot-compression conditions at 1000/1100/1200 C.
inline MaterialPreset dp_steel_preset(int T_celsius = 1100) {
    MaterialPreset p;
    p.name = "dp-steel-" + std::to_string(T_celsius);
    p.a8 = 0.45239;
    p.a9 = 0.13751;
    p.mu = 75000.0;
    p.T = T_celsius + kCelsiusOffset;
    switch (T_celsius) {
    case 1000:
        p.composite = CompositeCoefficients{3.93394e14, 7.17277, 6.41439e-7};
        p.rho_cr = 5.45e13;
        break;
    case 1100:
        p.composite = CompositeCoefficients{3.34986e14, 12.7284, 1.49657e-6};
        p.rho_cr = 2.62e13;
        break;
    case 1200:
        p.composite = CompositeCoefficients{2.91544e14, 20.895, 3.11231e-6};
        p.rho_cr = 1.39e13;
        break;
    default:
        throw std::invalid_argument("dp_steel_preset: temperature must be 1000, 1100 or 1200 C");
    }
    return p;
}

inline MaterialPreset named_preset(const std::string& name) {
    if (name == "copper" || name == "copper-575")
        return copper_preset(575);
    if (name == "copper-625")
        return copper_preset(625);
    if (name == "copper-675")
        return copper_preset(675);
    if (name == "dp-steel" || name == "dp-steel-1100")
        return dp_steel_preset(1100);
    if (name == "dp-steel-1000")
        return dp_steel_preset(1000);
    if (name == "dp-steel-1200")
        return dp_steel_preset(1200);
    throw std::invalid_argument("unknown preset '" + name + "'");
}

/// Flat key=value preset file ('#' comments, blank lines ignored). Either the
/// full a1..a13,b,mu,Q,D material record or composite A1,A2,A3 (+rho_cr).
inline MaterialPreset read_preset(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        if (eq == std::string::npos)
            throw format_error("preset line is not key=value", row);
        auto strip = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }

    MaterialPreset p;
    auto num = [&kv, &p](const std::string& key) -> std::optional<double> {
        auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw format_error("preset value for '" + key + "' is not numeric");
        }
    };
    if (auto it = kv.find("name"); it != kv.end())
        p.name = it->second;

    const bool has_composite = kv.count("A1") || kv.count("A2") || kv.count("A3");
    const bool has_material = kv.count("a2") || kv.count("a3") || kv.count("Q");
    if (has_composite && has_material)
        throw format_error("preset mixes composite A1..A3 with formula coefficients");
    if (has_composite) {
        CompositeCoefficients c;
        c.A1 = num("A1").value_or(0.0);
        c.A2 = num("A2").value_or(0.0);
        c.A3 = num("A3").value_or(0.0);
        p.composite = c;
    } else if (has_material) {
        MaterialCoefficients m;
        auto req = [&num](const std::string& key) {
            auto v = num(key);
            if (!v)
                throw format_error("preset is missing required key '" + key + "'");
            return *v;
        };
        m.a1 = req("a1");
        m.a2 = req("a2");
        m.a3 = req("a3");
        m.a4 = req("a4");
        m.a5 = req("a5");
        m.a10 = num("a10").value_or(0.0);
        m.a11 = num("a11").value_or(1e4);
        m.a12 = num("a12").value_or(0.0);
        m.a13 = req("a13");
        m.b = num("b").value_or(2.5e-10);
        m.Q = req("Q");
        m.D = req("D");
        p.material = m;
    } else {
        throw format_error("preset defines neither composite A1..A3 nor a_i coefficients");
    }
    p.a8 = num("a8").value_or(0.0);
    p.a9 = num("a9").value_or(0.0);
    p.mu = num("mu").value_or(0.0);
    p.a6 = num("a6").value_or(1.0);
    p.a7 = num("a7").value_or(0.0);
    p.b = num("b").value_or(p.b);
    p.a11 = num("a11").value_or(1e4);
    if (auto v = num("rho_cr"))
        p.rho_cr = *v;
    p.eps_dot = num("eps_dot").value_or(1.0);
    if (auto v = num("T_C"))
        p.T = *v + kCelsiusOffset;
    p.rho0 = num("rho0").value_or(1e4);
    if (p.material) {
        p.material->mu = p.mu;
        p.material->b = p.b;
        if (auto v = num("a6"))
            p.material->a6 = *v;
        if (auto v = num("a7"))
            p.material->a7 = *v;
        p.material->a8 = p.a8;
        p.material->a9 = p.a9;
    }
    p.validate();
    return p;
}

/// CoefficientTrack for a preset along a sampled (t, T, eps_dot) track.
/// Formula presets recompute the A_i pointwise; composite presets keep their
/// fixed A_i and take eps_dot/T from the track.
inline CoefficientTrack preset_track(const MaterialPreset& preset,
                                     const std::vector<TrackSample>& samples) {
    preset.validate();
    if (preset.material)
        return CoefficientTrack::from_samples(samples, *preset.material);
    std::vector<std::pair<double, CoefficientSet>> rows;
    rows.reserve(samples.size());
    for (const TrackSample& s : samples)
        rows.push_back({s.t,
                        {preset.composite->A1, preset.composite->A2, preset.composite->A3,
                         s.eps_dot, s.T, *preset.rho_cr}});
    return CoefficientTrack::tabulated(std::move(rows));
}

/// Constant-condition track from the preset's own (T, eps_dot).
inline CoefficientTrack preset_constant_track(const MaterialPreset& preset) {
    preset.validate();
    if (preset.composite)
        return CoefficientTrack::constant(preset.composite->A1, preset.composite->A2,
                                          preset.composite->A3, preset.eps_dot, *preset.rho_cr,
                                          preset.T);
    std::vector<TrackSample> two{{0.0, preset.T, preset.eps_dot},
                                 {1e30, preset.T, preset.eps_dot}};
    return CoefficientTrack::from_samples(std::move(two), *preset.material);
}

/// Node-aligned output series of a scenario run.
struct ScenarioResult {
    std::optional<double> t_cr;
    double rho_max = 0.0;
    bool went_negative = false;
    bool exceeded_bound = false;
    SolutionPath path;
    std::vector<double> t, rho, sigma_f, A1, A2, A3, T, eps_dot;
};

/// Solve the full model for a preset along a track and derive the flow-stress
/// series (with the max(rho, 0) guard for transient negatives).
inline ScenarioResult run_scenario(const MaterialPreset& preset, const CoefficientTrack& track,
                                   double rho0, Method method, int N, double horizon) {
    preset.validate();
    if (rho0 < 0.0)
        throw std::domain_error("run_scenario: rho0 must be nonnegative");
    const FullModelResult full =
        solve_full_model(track, preset.a8, preset.a9, rho0, horizon, method, N);
    ScenarioResult r;
    r.t_cr = full.t_cr;
    r.path = full.path;
    r.went_negative = full.path.went_negative;
    r.exceeded_bound = full.path.exceeded_bound;
    for (int j = 0; j < r.path.intervals(); ++j)
        for (std::size_t k = (j == 0) ? 0 : 1; k < r.path.values[j].size(); ++k) {
            const double t = r.path.node_time(j, static_cast<int>(k));
            const double y = r.path.values[j][k];
            const CoefficientSet c = track.at(t);
            r.t.push_back(t);
            r.rho.push_back(y);
            r.sigma_f.push_back(flow_stress(std::max(y, 0.0), preset.a6, preset.a7, preset.b,
                                            preset.mu));
            r.A1.push_back(c.A1);
            r.A2.push_back(c.A2);
            r.A3.push_back(c.A3);
            r.T.push_back(c.T);
            r.eps_dot.push_back(c.eps_dot);
            r.rho_max = std::max(r.rho_max, y);
        }
    return r;
}

/// Overload for the preset's own constant condition.
inline ScenarioResult run_scenario(const MaterialPreset& preset, double rho0, Method method,
                                   int N, double horizon) {
    return run_scenario(preset, preset_constant_track(preset), rho0, method, N, horizon);
}

/// CSV `t,rho,sigma_f,A1,A2,A3,T,eps_dot` at 17 significant digits.
inline void write_scenario_csv(const ScenarioResult& r, std::ostream& os) {
    os << "t,rho,sigma_f,A1,A2,A3,T,eps_dot\n";
    char buf[256];
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.t[i], r.rho[i], r.sigma_f[i], r.A1[i], r.A2[i], r.A3[i], r.T[i],
                      r.eps_dot[i]);
        os << buf;
    }
}

/// Read back a scenario CSV (column order as written).
inline ScenarioResult read_scenario_csv(std::istream& in) {
    ScenarioResult r;
    std::string line;
    long row = 0;
    if (!std::getline(in, line))
        throw format_error("empty scenario file");
    if (line.find("t,rho,sigma_f") != 0)
        throw format_error("scenario file must start with header 't,rho,sigma_f,...'", 0);
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ss(line);
        double v[8];
        std::string field;
        for (int i = 0; i < 8; ++i) {
            if (!std::getline(ss, field, ','))
                throw format_error("scenario row has fewer than 8 fields", row);
            try {
                v[i] = std::stod(field);
            } catch (const std::exception&) {
                throw format_error("scenario row is not numeric", row);
            }
        }
        r.t.push_back(v[0]);
        r.rho.push_back(v[1]);
        r.sigma_f.push_back(v[2]);
        r.A1.push_back(v[3]);
        r.A2.push_back(v[4]);
        r.A3.push_back(v[5]);
        r.T.push_back(v[6]);
        r.eps_dot.push_back(v[7]);
        r.rho_max = std::max(r.rho_max, v[1]);
    }
    return r;
}

/// JSON summary {t_cr, rho_max, flags}; t_cr is null when no crossing occurs.
inline nlohmann::json scenario_summary(const ScenarioResult& r) {
    nlohmann::json j;
    if (r.t_cr)
        j["t_cr"] = *r.t_cr;
    else
        j["t_cr"] = nullptr;
    j["rho_max"] = r.rho_max;
    j["flags"] = {{"went_negative", r.went_negative}, {"exceeded_bound", r.exceeded_bound},
                  {"no_crossing", !r.t_cr.has_value()}};
    return j;
}

/// Which of two flow lines reaches its critical density first.
struct LineComparison {
    std::optional<double> t_cr_first;  // first line's onset, if any
    std::optional<double> t_cr_second; // second line's onset, if any
    std::string verdict; // first-earlier | second-earlier | tie | first-only | second-only | neither
    std::string text;    // human-readable one-liner
};

inline LineComparison compare_lines(const ScenarioResult& first, const ScenarioResult& second,
                                    double rel_tol = 1e-9) {
    LineComparison c;
    c.t_cr_first = first.t_cr;
    c.t_cr_second = second.t_cr;
    if (!first.t_cr && !second.t_cr) {
        c.verdict = "neither";
        c.text = "no recrystallization within horizon on either line";
    } else if (first.t_cr && !second.t_cr) {
        c.verdict = "first-only";
        c.text = "second line: no recrystallization within horizon";
    } else if (!first.t_cr && second.t_cr) {
        c.verdict = "second-only";
        c.text = "first line: no recrystallization within horizon";
    } else {
        const double a = *first.t_cr, b = *second.t_cr;
        if (std::abs(a - b) <= rel_tol * std::max({std::abs(a), std::abs(b), 1e-300})) {
            c.verdict = "tie";
            c.text = "both lines reach the critical density at the same time";
        } else if (a < b) {
            c.verdict = "first-earlier";
            c.text = "first line reaches the critical density earlier";
        } else {
            c.verdict = "second-earlier";
            c.text = "second line reaches the critical density earlier";
        }
    }
    return c;
}

} // namespace dislo
