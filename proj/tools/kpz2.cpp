// kpz2: batch experiments on truncated Z_2 operators.
//
//   kpz2 norm --op cesaro --p 2 --sizes 64,128,256,512
//   kpz2 norm --op scalar:1,0,1,1 --z2
//   kpz2 check --op TU:normalized-blocks:4
//   kpz2 spectrum --op cesaro --p 2 --disk-check
//   kpz2 spectrum --op hilbert:1 --eigs --n 100
//   kpz2 spectrum --op cesaro --p 4 --grid 3:0,0.5:0.5 --n 256 --format csv
//   kpz2 calibrate-tu --out calibration/tu_isometry.json
//
// Exit codes: 0 success, 1 usage or spec error, 2 numerical warning, 3 solver failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpz2/opspec.hpp"
#include "kpz2/report.hpp"

namespace {

using namespace kpz2;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_warning = 2;
constexpr int exit_solver = 3;

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::vector<Eigen::Index> sizes;
    std::string out;
    std::string format;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* sizes_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* format_opt = nullptr;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON config file; flags override it")
            ->check(CLI::ExistingFile);
        seed_opt = app->add_option("--seed", seed, "random seed");
        sizes_opt = app->add_option("--sizes", sizes, "strictly increasing sizes, e.g. 64,128,256")
                        ->delimiter(',');
        out_opt = app->add_option("--out", out, "output path (default stdout)");
        format_opt = app->add_option("--format", format, "json or csv")
                         ->check(CLI::IsMember({"json", "csv"}));
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (seed_opt->count())
            c.seed = seed;
        if (sizes_opt->count())
            c.sizes = sizes;
        if (out_opt->count())
            c.output = out;
        if (format_opt->count())
            c.format = format;
        return c;
    }
};

struct BudgetFlag {
    std::string key;
    int value = 0;
    CLI::Option* opt = nullptr;
};

void apply_budgets(ExperimentConfig& c, const std::vector<BudgetFlag>& flags) {
    for (const auto& f : flags)
        if (f.opt->count())
            c.budgets[f.key] = f.value;
}

void emit(const ExperimentConfig& cfg, const std::string& text) {
    if (cfg.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out)
        throw ParameterOutOfRange("cannot write " + cfg.output);
    out << text;
}

void emit(const ExperimentConfig& cfg, const json& j) { emit(cfg, j.dump(2) + "\n"); }

std::vector<double> as_doubles(const std::vector<Eigen::Index>& v) {
    return {v.begin(), v.end()};
}

int run_norm(const ExperimentConfig& cfg, const std::string& op, double p, bool z2) {
    const OpSpec spec = parse_op_spec(op, cfg.seed);
    json per_size = json::array();
    std::vector<double> values;
    bool warn = false;
    for (auto n : cfg.sizes) {
        json row;
        row["n"] = n;
        if (z2) {
            Z2SearchOptions zo;
            zo.samples = cfg.budget("samples");
            zo.ascent_steps = cfg.budget("ascent_steps");
            zo.seed = derive_seed(cfg.seed, std::uint64_t(n));
            const auto est = z2_opnorm_est(spec.block(n), zo);
            row["value"] = number(est.value);
            row["witness_quasinorm"] = number(z2_quasinorm(est.witness));
            values.push_back(est.value);
        } else {
            if (!spec.is_matrix())
                throw SpecError("'" + op + "' is a block operator; use --z2");
            OpNormOptions no;
            no.tol = cfg.tolerance("opnorm");
            no.max_iter = cfg.budget("max_iter");
            no.seed = derive_seed(cfg.seed, std::uint64_t(n));
            const auto est = opnorm_p(spec.matrix(n), PExponent(p), no);
            row["value"] = number(est.value);
            row["converged"] = est.converged;
            if (est.sigma_max)
                row["sigma_max"] = number(*est.sigma_max);
            warn = warn || !est.converged;
            values.push_back(est.value);
        }
        per_size.push_back(row);
    }
    json res;
    res["mode"] = z2 ? "z2" : "lp";
    if (!z2)
        res["p"] = number(p);
    res["per_size"] = per_size;
    res["estimate_kind"] = "lower bound with witness";
    if (cfg.sizes.size() >= 4)
        res["trend"] = to_json(growth_trend(as_doubles(cfg.sizes), values, cfg.trend_options()));
    json extra;
    extra["mode"] = z2 ? "z2" : "lp";
    if (!z2)
        extra["p"] = number(p);
    emit(cfg, make_report("norm", op, cfg, extra, res));
    return warn ? exit_warning : exit_ok;
}

int run_check(const ExperimentConfig& cfg, const std::string& op) {
    const OpSpec spec = parse_op_spec(op, cfg.seed);
    if (cfg.sizes.size() < 4)
        throw ParameterOutOfRange("check needs at least 4 sizes");
    ConditionOptions co;
    co.budget = cfg.budget("probes");
    co.fstar_budget = cfg.budget("fstar_steps");
    co.seed = cfg.seed;
    co.trend = cfg.trend_options();
    const auto rep = check_all({op, spec.block}, cfg.sizes, co);
    emit(cfg, make_report("check", op, cfg, json::object(), to_json(rep)));
    return exit_ok;
}

std::vector<Complex> parse_grid(const std::string& text) {
    std::vector<Complex> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto colon = tok.find(':');
        try {
            std::size_t pos = 0;
            const double re = std::stod(tok.substr(0, colon), &pos);
            double im = 0.0;
            if (colon != std::string::npos)
                im = std::stod(tok.substr(colon + 1));
            out.emplace_back(re, im);
        } catch (const std::exception&) {
            throw SpecError("bad grid point '" + tok + "' (expected RE or RE:IM)");
        }
    }
    if (out.empty())
        throw SpecError("empty grid");
    return out;
}

int run_spectrum(ExperimentConfig cfg, const std::string& op, double p, bool eigs, bool disk,
                 const std::string& grid, Eigen::Index n, bool sizes_given) {
    const OpSpec spec = parse_op_spec(op, cfg.seed);
    if (!spec.is_matrix())
        throw SpecError("spectrum needs a plain matrix operator, got '" + op + "'");
    const int modes = int(eigs) + int(disk) + int(!grid.empty());
    if (modes != 1)
        throw SpecError("choose exactly one of --eigs, --disk-check, --grid");
    if (cfg.format == "csv" && grid.empty())
        throw SpecError("csv output is only available for --grid");
    json extra;
    extra["p"] = number(p);
    if (eigs) {
        extra["mode"] = "eigs";
        extra["n"] = n;
        emit(cfg, make_report("spectrum", op, cfg, extra, to_json(eigenvalues(spec.matrix(n)))));
        return exit_ok;
    }
    if (disk) {
        if (op != "cesaro")
            throw SpecError("--disk-check applies to the cesaro operator");
        if (!sizes_given)
            cfg.sizes = {128, 256, 512, 1024};
        extra["mode"] = "disk-check";
        const PExponent pe(p);
        ResolventOptions ro;
        ro.norm.seed = cfg.seed;
        ro.norm.max_iter = cfg.budget("max_iter");
        const auto rep = cesaro_disk_check(pe, cfg.sizes, default_disk_points(pe, 0.5),
                                           default_disk_points(pe, 1.5), ro, cfg.trend_options());
        emit(cfg, make_report("spectrum", op, cfg, extra, to_json(rep)));
        return rep.pass ? exit_ok : exit_warning;
    }
    extra["mode"] = "grid";
    extra["n"] = n;
    ResolventOptions ro;
    ro.norm.seed = cfg.seed;
    ro.norm.max_iter = cfg.budget("max_iter");
    const auto g = resolvent_grid(spec.matrix(n), PExponent(p), parse_grid(grid), ro);
    if (cfg.format == "csv") {
        std::ostringstream os;
        write_csv(os, g);
        emit(cfg, os.str());
    } else {
        emit(cfg, make_report("spectrum", op, cfg, extra, to_json(g)));
    }
    return exit_ok;
}

/// Measures max |Q(T_U z) / Q(z) - 1| over seeded block systems and random z supported
/// on the block coordinates, and fixes tol_iso = max(1e-12, 100 x observed).
int run_calibrate_tu(const ExperimentConfig& cfg, int systems, int samples, Eigen::Index n,
                     Eigen::Index len) {
    double worst = 0.0;
    json per = json::array();
    for (int s = 0; s < systems; ++s) {
        Rng rng(derive_seed(cfg.seed, std::uint64_t(1000 + s)));
        const double sys_worst = tu_isometry_deviation(n, len, samples, rng);
        per.push_back(number(sys_worst));
        worst = std::max(worst, sys_worst);
    }
    json res;
    res["n"] = n;
    res["block_length"] = len;
    res["systems"] = systems;
    res["samples_per_system"] = samples;
    res["max_deviation_per_system"] = per;
    res["max_deviation"] = number(worst);
    res["rule"] = "tol_iso = max(1e-12, 100 * max_deviation)";
    res["tol_iso"] = number(std::max(1e-12, 100.0 * worst));
    json extra;
    extra["systems"] = systems;
    extra["samples"] = samples;
    extra["n"] = n;
    extra["block_length"] = len;
    emit(cfg, make_report("calibrate-tu", "TU:normalized-blocks:" + std::to_string(len), cfg,
                          extra, res));
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments on the Kalton-Peck space Z_2"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kpz2::library_version));

    std::string op;
    double p = 2.0;
    bool z2 = false;

    auto* norm = app.add_subcommand("norm", "operator norm estimates across sizes");
    CommonFlags norm_common;
    norm_common.attach(norm);
    norm->add_option("--op", op, "operator spec")->required();
    auto* p_opt = norm->add_option("--p", p, "exponent p >= 1 (inf allowed)");
    auto* z2_opt = norm->add_flag("--z2", z2, "estimate the Z_2 quasinorm ratio");
    p_opt->excludes(z2_opt);
    std::vector<BudgetFlag> norm_budgets{{"samples"}, {"ascent_steps"}, {"max_iter"}};
    norm_budgets[0].opt = norm->add_option("--samples", norm_budgets[0].value, "random Z_2 candidates");
    norm_budgets[1].opt = norm->add_option("--ascent-steps", norm_budgets[1].value, "ascent trials");
    norm_budgets[2].opt = norm->add_option("--max-iter", norm_budgets[2].value, "power-method iterations");

    auto* check = app.add_subcommand("check", "boundedness conditions and verdict");
    CommonFlags check_common;
    check_common.attach(check);
    check->add_option("--op", op, "operator spec")->required();
    std::vector<BudgetFlag> check_budgets{{"probes"}, {"fstar_steps"}};
    check_budgets[0].opt = check->add_option("--probes", check_budgets[0].value, "random probes per size");
    check_budgets[1].opt = check->add_option("--fstar-steps", check_budgets[1].value, "descent steps for l_f* estimates");

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and resolvent norms");
    CommonFlags spec_common;
    spec_common.attach(spectrum);
    spectrum->add_option("--op", op, "plain matrix operator spec")->required();
    spectrum->add_option("--p", p, "exponent p");
    bool eigs = false, disk = false;
    std::string grid;
    Eigen::Index n = 64;
    spectrum->add_flag("--eigs", eigs, "all eigenvalues of the n x n section");
    spectrum->add_flag("--disk-check", disk, "Cesaro spectral disk test via resolvent growth");
    spectrum->add_option("--grid", grid, "resolvent grid RE[:IM],RE[:IM],...");
    spectrum->add_option("--n", n, "section size")->check(CLI::PositiveNumber);

    auto* calib = app.add_subcommand("calibrate-tu", "T_U isometry tolerance calibration");
    CommonFlags calib_common;
    calib_common.attach(calib);
    int systems = 3, samples = 200;
    Eigen::Index calib_n = 256, block_len = 4;
    calib->add_option("--systems", systems, "block systems")->check(CLI::PositiveNumber);
    calib->add_option("--samples", samples, "random z per system")->check(CLI::PositiveNumber);
    calib->add_option("--n", calib_n, "dimension")->check(CLI::PositiveNumber);
    calib->add_option("--block-length", block_len, "block length")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (norm->parsed()) {
            ExperimentConfig cfg = norm_common.resolve();
            apply_budgets(cfg, norm_budgets);
            cfg.validate();
            if (!z2 && !p_opt->count())
                throw SpecError("norm needs --p P or --z2");
            return run_norm(cfg, op, p, z2);
        }
        if (check->parsed()) {
            ExperimentConfig cfg = check_common.resolve();
            apply_budgets(cfg, check_budgets);
            cfg.validate();
            return run_check(cfg, op);
        }
        if (spectrum->parsed()) {
            ExperimentConfig cfg = spec_common.resolve();
            cfg.validate();
            return run_spectrum(cfg, op, p, eigs, disk, grid, n,
                                spec_common.sizes_opt->count() > 0 || !spec_common.config_path.empty());
        }
        if (calib->parsed()) {
            ExperimentConfig cfg = calib_common.resolve();
            cfg.validate();
            return run_calibrate_tu(cfg, systems, samples, calib_n, block_len);
        }
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ParameterOutOfRange& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const InvalidSequence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const PoleIndex& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}
