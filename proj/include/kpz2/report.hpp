#pragma once

// Experiment configuration and JSON serialization of results. Non-finite numbers are
// written as the strings "inf", "-inf" or "nan" so that reports stay valid JSON.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpz2/conditions.hpp"
#include "kpz2/spectra.hpp"

#ifndef KPZ2_VERSION
#define KPZ2_VERSION "0.1.0"
#endif

namespace kpz2 {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;
inline constexpr const char* library_version = KPZ2_VERSION;

struct ExperimentConfig {
    std::uint64_t seed = 20240601;
    std::vector<Eigen::Index> sizes{64, 128, 256, 512};
    std::map<std::string, int> budgets{{"probes", 8},   {"fstar_steps", 60}, {"samples", 32},
                                       {"ascent_steps", 200}, {"max_iter", 1000}};
    std::map<std::string, double> tolerances{{"opnorm", 1e-10}, {"growth_per_octave", 0.07},
                                             {"margin", 0.7}};
    std::string output;              ///< empty: stdout
    std::string format = "json";     ///< json or csv (csv for spectral grids only)

    void validate() const {
        if (sizes.empty())
            throw ParameterOutOfRange("sizes must be nonempty");
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (sizes[i] < 1)
                throw ParameterOutOfRange("sizes must be positive");
            if (i > 0 && sizes[i] <= sizes[i - 1])
                throw ParameterOutOfRange("sizes must be strictly increasing");
        }
        for (const auto& [k, v] : budgets)
            if (v <= 0)
                throw ParameterOutOfRange("budget '" + k + "' must be positive");
        for (const auto& [k, v] : tolerances)
            if (!(v > 0.0) || !std::isfinite(v))
                throw ParameterOutOfRange("tolerance '" + k + "' must be positive");
        if (format != "json" && format != "csv")
            throw ParameterOutOfRange("format must be json or csv");
    }

    int budget(const std::string& k) const { return budgets.at(k); }
    double tolerance(const std::string& k) const { return tolerances.at(k); }

    TrendOptions trend_options() const {
        TrendOptions t;
        t.min_growth_per_octave = tolerance("growth_per_octave");
        t.margin = tolerance("margin");
        return t;
    }
};

inline json number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

inline json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v)
        a.push_back(number(x));
    return a;
}

inline json complex_json(Complex z) { return json::array({number(z.real()), number(z.imag())}); }

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["sizes"] = c.sizes;
    j["budgets"] = json(c.budgets);
    json tol;
    for (const auto& [k, v] : c.tolerances)
        tol[k] = number(v);
    j["tolerances"] = tol;
    j["output"] = c.output;
    j["format"] = c.format;
    return j;
}

/// Fields present in `j` override those of `c`; unknown keys are rejected.
inline void merge_config(ExperimentConfig& c, const json& j) {
    if (!j.is_object())
        throw ParameterOutOfRange("config must be a JSON object");
    for (const auto& [key, val] : j.items()) {
        if (key == "seed")
            c.seed = val.get<std::uint64_t>();
        else if (key == "sizes")
            c.sizes = val.get<std::vector<Eigen::Index>>();
        else if (key == "budgets")
            for (const auto& [k, v] : val.items()) {
                if (!c.budgets.count(k))
                    throw ParameterOutOfRange("unknown budget '" + k + "'");
                c.budgets[k] = v.get<int>();
            }
        else if (key == "tolerances")
            for (const auto& [k, v] : val.items()) {
                if (!c.tolerances.count(k))
                    throw ParameterOutOfRange("unknown tolerance '" + k + "'");
                c.tolerances[k] = v.get<double>();
            }
        else if (key == "output")
            c.output = val.get<std::string>();
        else if (key == "format")
            c.format = val.get<std::string>();
        else
            throw ParameterOutOfRange("unknown config key '" + key + "'");
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParameterOutOfRange("cannot read config file " + path);
    ExperimentConfig c;
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParameterOutOfRange("config file " + path + ": " + e.what());
    }
    merge_config(c, j);
    return c;
}

inline json to_json(const ModelFit& f) {
    json j;
    j["model"] = to_string(f.model);
    j["a"] = number(f.a);
    j["b"] = number(f.b);
    j["residual"] = number(f.residual);
    j["growth_per_octave"] = number(f.growth_per_octave);
    j["valid"] = f.valid;
    return j;
}

inline json to_json(const NormTrend& t) {
    json j;
    j["sizes"] = numbers(t.sizes);
    j["values"] = numbers(t.values);
    j["fit"] = to_string(t.fit);
    j["growing"] = t.growing;
    json m = json::array();
    for (const auto& f : t.models)
        m.push_back(to_json(f));
    j["models"] = m;
    if (!t.note.empty())
        j["note"] = t.note;
    return j;
}

inline json to_json(const ConditionReport& r) {
    json j;
    j["label"] = r.label;
    j["sizes"] = numbers(r.sizes);
    j["semantics"] = "each value is a sup over probes of a ratio; conditions with KP are "
                     "nonlinear and are not matrix norms";
    json tr;
    for (const auto& [k, t] : r.trends)
        tr[k] = to_json(t);
    j["conditions"] = tr;
    j["mandatory"] = mandatory_conditions();
    j["verdict"] = to_string(r.verdict);
    return j;
}

inline json to_json(const SpectralGrid& g) {
    json j;
    j["p"] = number(g.p.value());
    j["n"] = g.n;
    json pts = json::array();
    for (std::size_t i = 0; i < g.grid.size(); ++i)
        pts.push_back({{"lambda", complex_json(g.grid[i])}, {"value", number(g.values[i])}});
    j["points"] = pts;
    return j;
}

inline json to_json(const DiskCheckReport& r) {
    json j;
    j["p"] = number(r.p.value());
    j["center"] = number(r.center);
    j["radius"] = number(r.radius);
    json pts = json::array();
    for (const auto& pr : r.points) {
        json q;
        q["lambda"] = complex_json(pr.lambda);
        q["inside"] = pr.inside;
        q["expected"] = pr.inside ? "growth" : "bounded";
        q["singular"] = pr.singular;
        q["trend"] = to_json(pr.trend);
        q["pass"] = pr.pass;
        pts.push_back(q);
    }
    j["points"] = pts;
    j["pass"] = r.pass;
    return j;
}

inline json to_json(const EigenResult& e) {
    json j;
    j["symmetric_solver"] = e.symmetric;
    json v = json::array();
    for (const auto& z : e.values)
        v.push_back(complex_json(z));
    j["eigenvalues"] = v;
    return j;
}

/// Report envelope shared by all commands.
inline json make_report(const std::string& command, const std::string& op,
                        const ExperimentConfig& cfg, json extra_config, json results) {
    json j;
    j["schema_version"] = schema_version;
    j["library_version"] = library_version;
    j["command"] = command;
    json c = to_json(cfg);
    c["op"] = op;
    for (const auto& [k, v] : extra_config.items())
        c[k] = v;
    j["config"] = c;
    j["results"] = std::move(results);
    return j;
}

} // namespace kpz2
