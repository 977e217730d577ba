// Acceptance run: one PASS/FAIL line per criterion AC1..AC15. Tolerances and sample
// counts are pinned below. Arguments restrict the run to the named criteria.

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "kpz2/conditions.hpp"
#include "kpz2/opspec.hpp"
#include "kpz2/report.hpp"
#include "kpz2/spectra.hpp"

using namespace kpz2;

namespace {

constexpr std::uint64_t kSeed = 20240601;

// AC1, AC2
constexpr int kPairs = 10000;
constexpr double kDualitySlack = 1e-9;
constexpr double kCempSpread = 0.25;
// AC3
constexpr int kInverseSamples = 100;
constexpr int kInverseRequired = 95;
constexpr double kInverseResidual = 1e-6;
// AC4
constexpr int kInvolutionInstances = 1000;
constexpr Eigen::Index kInvolutionDim = 64;
constexpr double kFormTol = 1e-9;
constexpr double kProductTol = 1e-12;
// AC5
constexpr double kIsotropyTol = 1e-12;
// AC6, AC13
const std::vector<Eigen::Index> kWideSizes{64, 128, 256, 512, 1024, 2048, 4096};
constexpr double kWitnessSlack = 1e-9;
// AC7
const std::vector<Eigen::Index> kCesaroSizes{64, 128, 256, 512, 1024, 2048, 4096};
constexpr double kSvdTol = 1e-6;
// AC8
const std::vector<Eigen::Index> kHausdorffSizes{16, 32, 64, 128, 256};
constexpr double kFormulaSlack = 1e-6;
// AC9
constexpr double kCoefficientTol = 1e-9;
// AC11
const std::vector<Eigen::Index> kDiskSizes{128, 256, 512, 1024};
// AC12
const std::vector<Eigen::Index> kConditionSizes{64, 128, 256, 512, 1024};
// AC14
constexpr int kTuSystems = 3;
constexpr int kTuSamples = 200;

const std::vector<double> kExponents{4.0 / 3.0, 2.0, 4.0};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> as_doubles(const std::vector<Eigen::Index>& v) {
    return {v.begin(), v.end()};
}

/// Gaussian vector with random scale; on a third of the draws restricted to a random
/// number of leading coordinates of a random permutation.
SeqVec draw_vector(Rng& rng, Eigen::Index n) {
    SeqVec v = rng.gaussian(n) * std::pow(10.0, rng.uniform(-2.0, 2.0));
    if (rng.below(3) == 0) {
        const auto keep = Eigen::Index(1 + rng.below(std::uint64_t(n)));
        const auto perm = rng.permutation(n);
        for (Eigen::Index i = keep; i < n; ++i)
            v(perm[std::size_t(i)]) = 0.0;
    }
    return v;
}

Outcome ac1() {
    long violations = 0;
    double worst = 0.0;
    for (Eigen::Index n : {64, 256, 1024}) {
        Rng rng(derive_seed(kSeed, 100 + std::uint64_t(n)));
        for (int i = 0; i < kPairs; ++i) {
            const SeqVec x = draw_vector(rng, n), y = draw_vector(rng, n);
            const double lhs = std::abs(kp_map(x).dot(y) - x.dot(kp_map(y)));
            const double rhs = 2.0 * x.norm() * y.norm();
            worst = std::max(worst, lhs / rhs);
            if (lhs > rhs + kDualitySlack)
                ++violations;
        }
    }
    return {violations == 0, "violations=" + std::to_string(violations) +
                                 " max_ratio=" + fmt(worst)};
}

Outcome ac2() {
    std::vector<double> c;
    std::string detail;
    for (Eigen::Index n : {64, 256, 1024}) {
        Rng rng(derive_seed(kSeed, 200 + std::uint64_t(n)));
        double cmax = 0.0;
        for (int i = 0; i < kPairs; ++i) {
            const SeqVec x = draw_vector(rng, n), y = draw_vector(rng, n);
            const double d = (kp_map(x + y) - kp_map(x) - kp_map(y)).norm();
            cmax = std::max(cmax, d / (x.norm() + y.norm()));
        }
        c.push_back(cmax);
        detail += "C_emp(" + std::to_string(n) + ")=" + fmt(cmax) + " ";
    }
    const double lo = *std::min_element(c.begin(), c.end());
    const double hi = *std::max_element(c.begin(), c.end());
    const double spread = (hi - lo) / lo;
    return {spread < kCempSpread, detail + "variation=" + fmt(spread)};
}

Outcome ac3() {
    bool pass = true;
    std::string detail;
    for (Eigen::Index n : {64, 256}) {
        Rng rng(derive_seed(kSeed, 300 + std::uint64_t(n)));
        int ok = 0, failures = 0;
        double worst = 0.0;
        for (int i = 0; i < kInverseSamples; ++i) {
            const SeqVec w = kp_map(rng.unit_gaussian(n));
            const auto res = try_kp_inverse(w, 1e-9, 200);
            if (!res.converged)
                ++failures;
            const double r = (kp_map(res.x) - w).norm();
            worst = std::max(worst, r);
            if (res.converged && r <= kInverseResidual)
                ++ok;
        }
        pass = pass && ok >= kInverseRequired;
        detail += "n=" + std::to_string(n) + ": ok=" + std::to_string(ok) +
                  " solver_failures=" + std::to_string(failures) + " worst=" + fmt(worst) + " ";
    }
    return {pass, detail};
}

Outcome ac4() {
    const Eigen::Index n = kInvolutionDim;
    Rng rng(derive_seed(kSeed, 400));
    const double s = 1.0 / std::sqrt(double(n));
    auto block = [&]() {
        return BlockOperator(s * rng.gaussian_matrix(n, n), s * rng.gaussian_matrix(n, n),
                             s * rng.gaussian_matrix(n, n), s * rng.gaussian_matrix(n, n));
    };
    double form = 0.0, prod = 0.0;
    bool exact = true;
    for (int i = 0; i < kInvolutionInstances; ++i) {
        const BlockOperator t = block(), u = block();
        const Z2Vec y(rng.unit_gaussian(n), rng.unit_gaussian(n));
        const Z2Vec z(rng.unit_gaussian(n), rng.unit_gaussian(n));
        form = std::max(form, std::abs(omega_form(t.involution_plus().apply(y), z) -
                                       omega_form(y, t.apply(z))));
        exact = exact && involution_plus(involution_plus(t)) == t;
        prod = std::max(prod, involution_plus(compose(u, t))
                                  .max_abs_diff(compose(involution_plus(t), involution_plus(u))));
    }
    const bool ip_ok = involution_plus(ip(n)) == -1.0 * ip(n) && compose(ip(n), ip(n)) == BlockOperator::zero(n);
    return {form <= kFormTol && prod <= kProductTol && exact && ip_ok,
            "form_err=" + fmt(form) + " product_err=" + fmt(prod) +
                " double_plus_exact=" + (exact ? "yes" : "no") + " ip=" + (ip_ok ? "ok" : "bad")};
}

Outcome ac5() {
    const Eigen::Index n = 64;
    Rng rng(derive_seed(kSeed, 500));
    std::vector<Z2Vec> i_basis, j_basis, diag, ip_range;
    for (Eigen::Index k = 0; k < n; ++k) {
        i_basis.push_back(inclusion_i(unit_vector(n, k)));
        j_basis.push_back(inclusion_j(unit_vector(n, k)));
        diag.push_back(Z2Vec(unit_vector(n, k), unit_vector(n, k)));
    }
    for (int k = 0; k < 32; ++k) {
        const SeqVec x = rng.gaussian(n);
        diag.push_back(Z2Vec(x, x));
        ip_range.push_back(ip(n).apply(Z2Vec(rng.gaussian(n), rng.gaussian(n))));
    }
    std::string detail;
    bool pass = true;
    for (const auto& [name, b] : std::vector<std::pair<std::string, std::vector<Z2Vec>*>>{
             {"i", &i_basis}, {"j", &j_basis}, {"diagonal", &diag}, {"range_ip", &ip_range}}) {
        const auto r = is_isotropic(*b, kIsotropyTol);
        pass = pass && r.isotropic;
        detail += name + "=" + fmt(r.max_abs_form) + " ";
    }
    // control: i and j together are not isotropic
    std::vector<Z2Vec> mixed{i_basis[0], j_basis[0]};
    const bool control = !is_isotropic(mixed, kIsotropyTol).isotropic;
    return {pass && control, detail + "control=" + (control ? "ok" : "bad")};
}

Outcome ac6() {
    struct Family {
        std::array<double, 4> abdg;
        std::function<bool(GrowthClass)> expected;
        std::string expected_name;
        std::function<double(double)> witness; // ratio on lift_Lp(spread_n), L = log n
    };
    const std::vector<Family> fams{
        {{1, 0, 0, 1}, [](GrowthClass g) { return g == GrowthClass::bounded; }, "bounded",
         [](double) { return 1.0; }},
        {{1.5, -0.7, 0, 1.5}, [](GrowthClass g) { return g == GrowthClass::bounded; }, "bounded",
         [](double) { return 0.7 + 1.5; }},
        {{1, 0, 1, 1}, [](GrowthClass g) { return g == GrowthClass::log_sq_growth; }, "log_sq_growth",
         [](double l) { return l * l + l - 1.0; }},
        {{2, 0, 0, 1}, [](GrowthClass g) { return is_growth(g); }, "growth",
         [](double l) { return l + 1.0; }},
    };
    bool pass = true;
    std::string detail;
    for (const auto& f : fams) {
        std::vector<double> vals;
        bool above = true;
        for (Eigen::Index n : kWideSizes) {
            const BlockOperator t = scalar_matrix(f.abdg[0], f.abdg[1], f.abdg[2], f.abdg[3], n);
            Z2SearchOptions opt;
            opt.seed = derive_seed(kSeed, std::uint64_t(n));
            const double v = z2_opnorm_est(t, opt).value;
            const double w = f.witness(std::log(double(n)));
            above = above && v >= w * (1.0 - kWitnessSlack);
            vals.push_back(v);
        }
        const auto tr = growth_trend(as_doubles(kWideSizes), vals);
        const bool ok = f.expected(tr.fit) && above;
        pass = pass && ok;
        std::ostringstream os;
        os << "(" << f.abdg[0] << "," << f.abdg[1] << "," << f.abdg[2] << "," << f.abdg[3]
           << ")=" << to_string(tr.fit) << (ok ? "" : "[expected " + f.expected_name + "]")
           << (above ? "" : "[below witness]") << " ";
        detail += os.str();
    }
    return {pass, detail};
}

Outcome ac7() {
    OpNormOptions opt;
    opt.svd_check_max_n = 0; // keep the estimate independent of the SVD oracle
    std::vector<double> v2;
    double svd_err = 0.0;
    for (Eigen::Index n : kCesaroSizes) {
        const Matrix c = cesaro(n);
        v2.push_back(opnorm_p(c, PExponent(2), opt).value);
        if (n == 256) {
            const double sigma = Eigen::JacobiSVD<Matrix>(c).singularValues()(0);
            svd_err = std::abs(v2.back() - sigma);
        }
    }
    bool increasing = true, below = true;
    for (std::size_t i = 0; i < v2.size(); ++i) {
        below = below && v2[i] < 2.0;
        if (i > 0)
            increasing = increasing && v2[i] > v2[i - 1];
    }
    bool others = true;
    std::string od;
    for (double p : {4.0 / 3.0, 4.0}) {
        const double ps = PExponent(p).conjugate().value();
        double top = 0.0;
        for (Eigen::Index n : kCesaroSizes) {
            const double v = opnorm_p(cesaro(n), PExponent(p), opt).value;
            top = std::max(top, v);
            others = others && v < ps;
        }
        od += " max_p" + fmt(p) + "=" + fmt(top) + "<" + fmt(ps);
    }
    return {increasing && below && svd_err <= kSvdTol && others,
            "p2: " + fmt(v2.front()) + ".." + fmt(v2.back()) + " increasing=" +
                (increasing ? "yes" : "no") + " svd_err(256)=" + fmt(svd_err) + od};
}

Outcome ac8() {
    const std::vector<MomentSequence> fams{moment_holder(1.0), moment_euler(0.5),
                                           moment_gamma(2.0, 1.0), moment_gen_cesaro(1.0, 1.0)};
    bool pass = true;
    std::string detail;
    for (const auto& m : fams) {
        for (double p : kExponents) {
            const double bound = m.norm_formula(PExponent(p));
            double prev = 0.0, top = 0.0;
            bool ok = true;
            for (Eigen::Index n : kHausdorffSizes) {
                const double v = opnorm_p(hausdorff_matrix({m, n}), PExponent(p)).value;
                ok = ok && v <= bound + kFormulaSlack && v >= prev;
                prev = v;
                top = std::max(top, v);
            }
            pass = pass && ok;
            if (!ok)
                detail += m.name + " p=" + fmt(p) + " max=" + fmt(top) + " bound=" + fmt(bound) + "; ";
        }
    }
    return {pass, detail.empty() ? "4 families x 3 exponents within closed forms, nondecreasing"
                                 : detail};
}

Outcome ac9() {
    double worst = 0.0;
    for (const auto& m : {moment_euler(0.5), moment_euler(0.3), moment_holder(1.0)}) {
        for (Eigen::Index n = 1; n <= 12; ++n) {
            HausdorffSpec table{m, n};
            table.use_closed_form = false;
            const Matrix a = hausdorff_matrix(table);
            const Matrix b = hausdorff_matrix({m, n});
            worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        }
    }
    bool raised = false;
    try {
        hausdorff_matrix({moment_holder(2.0), 64, PrecisionMode::double_precision});
    } catch (const PrecisionLoss&) {
        raised = true;
    }
    bool extended_ok = true;
    try {
        const Matrix a = hausdorff_matrix({moment_holder(2.0), 64, PrecisionMode::extended});
        // row sums equal mu_0 = 1 for every Hausdorff matrix
        extended_ok = (a.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12;
    } catch (const PrecisionLoss&) {
        extended_ok = false;
    }
    return {worst <= kCoefficientTol && raised && extended_ok,
            "coefficient_err=" + fmt(worst) + " double_raises=" + (raised ? "yes" : "no") +
                " extended_ok=" + (extended_ok ? "yes" : "no")};
}

Outcome ac10() {
    // Positivity from the exact inertia: lambda_min(H(400, 1)) is near 1e-600, below the
    // double range, so solver values only need to clear the Weyl band -n * eps * lambda_max.
    bool inside = true, nondecreasing = true;
    std::vector<double> top;
    for (Eigen::Index n : {10, 100, 400}) {
        const auto r = eigenvalues(hilbert_matrix(n, 1.0));
        const auto in = hilbert_inertia(n, 1.0);
        inside = inside && r.symmetric && in.positive == n && in.negative == 0;
        double mx = 0.0;
        for (const auto& z : r.values)
            mx = std::max(mx, z.real());
        const double band = double(n) * std::numeric_limits<double>::epsilon() * mx;
        for (const auto& z : r.values)
            inside = inside && z.imag() == 0.0 && z.real() > -band && z.real() < std::numbers::pi;
        if (!top.empty())
            nondecreasing = nondecreasing && mx >= top.back();
        top.push_back(mx);
    }
    return {inside && nondecreasing && top.back() > top.front(),
            "lambda_max=" + fmt(top[0]) + "," + fmt(top[1]) + "," + fmt(top[2])};
}

Outcome ac11() {
    bool pass = true;
    std::string detail;
    for (double p : kExponents) {
        const PExponent pe(p);
        const auto rep = cesaro_disk_check(pe, kDiskSizes, default_disk_points(pe, 0.5),
                                           default_disk_points(pe, 1.5));
        pass = pass && rep.pass;
        detail += "p=" + fmt(p) + ":";
        for (const auto& pt : rep.points)
            detail += std::string(pt.inside ? "in" : "out") + "=" +
                      (pt.singular ? "singular" : to_string(pt.trend.fit)) + (pt.pass ? "" : "!") + ",";
        detail += " ";
    }
    return {pass, detail};
}

Outcome ac12() {
    const std::vector<std::string> sound{"tau-perm", "TU:normalized-blocks:4", "scalar:1.5,-0.7,0,1.5",
                                         "scalar:1,2,0,1", "rank1", "rank1:alpha0"};
    const std::vector<std::string> complete{"scalar:0,0,1,0",  "scalar:1,0,1,1",
                                            "scalar:2,0,0,1",  "scalar:1,0,0,2",
                                            "scalar:0.5,0,0,-0.5", "scalar:1,0,-0.3,1"};
    ConditionOptions opt;
    opt.seed = kSeed;
    int agree = 0, total = 0;
    std::string miss;
    auto run = [&](const std::string& spec, Verdict want) {
        const OpSpec s = parse_op_spec(spec, kSeed);
        const auto rep = check_mandatory({spec, s.block}, kConditionSizes, opt);
        ++total;
        if (rep.verdict == want)
            ++agree;
        else
            miss += spec + "=" + to_string(rep.verdict) + " ";
    };
    for (const auto& s : sound)
        run(s, Verdict::consistent_with_bounded);
    for (const auto& s : complete)
        run(s, Verdict::inconsistent);
    return {agree == total,
            "agreement=" + std::to_string(agree) + "/" + std::to_string(total) + (miss.empty() ? "" : " " + miss)};
}

Outcome ac13() {
    auto trend = [](const std::string& spec) {
        const OpSpec s = parse_op_spec(spec, kSeed);
        std::vector<double> vals;
        for (Eigen::Index n : kWideSizes) {
            Z2SearchOptions opt;
            opt.seed = derive_seed(kSeed, std::uint64_t(n));
            vals.push_back(z2_opnorm_est(s.block(n), opt).value);
        }
        return growth_trend(as_doubles(kWideSizes), vals);
    };
    const auto lg = trend("diag:loggap:0.5");
    const auto cg = trend("diag:gap:0.5");
    return {lg.fit == GrowthClass::bounded && cg.fit == GrowthClass::log_growth,
            std::string("loggap=") + to_string(lg.fit) + " [" + fmt(lg.values.front()) + ".." +
                fmt(lg.values.back()) + "] gap=" + to_string(cg.fit) + " [" +
                fmt(cg.values.front()) + ".." + fmt(cg.values.back()) + "]"};
}

Outcome ac14() {
    const std::string path = std::string(KPZ2_SOURCE_DIR) + "/calibration/tu_isometry.json";
    std::ifstream in(path);
    if (!in)
        return {false, "missing " + path};
    const json cal = json::parse(in);
    const auto& r = cal.at("results");
    const double tol = r.at("tol_iso").get<double>();
    const auto n = r.at("n").get<Eigen::Index>();
    const auto len = r.at("block_length").get<Eigen::Index>();
    double worst = 0.0;
    // held-out systems: a different seed stream from the calibration run
    for (int s = 0; s < kTuSystems; ++s) {
        Rng rng(derive_seed(kSeed, 2000 + std::uint64_t(s)));
        worst = std::max(worst, tu_isometry_deviation(n, len, kTuSamples, rng));
    }
    return {worst <= tol, "max_dev=" + fmt(worst) + " tol_iso=" + fmt(tol)};
}

std::string capture(const std::string& cmd, int& code) {
    std::string out;
    FILE* f = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!f) {
        code = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), f)) > 0)
        out.append(buf.data(), got);
    const int status = pclose(f);
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

Outcome ac15() {
    const char* cli = std::getenv("KPZ2_CLI");
    if (!cli)
        return {false, "KPZ2_CLI not set"};
    const std::vector<std::string> runs{
        "norm --op perm --p 3 --sizes 16,32,64,128 --seed 11",
        "norm --op scalar:2,0,0,1 --z2 --sizes 16,32,64,128 --seed 11",
        "check --op TU:normalized-blocks:4 --sizes 16,32,64,128 --seed 11",
        "spectrum --op cesaro --p 4 --n 64 --grid 0.5:0.5,2:1",
        "calibrate-tu --systems 2 --samples 20 --n 64 --seed 11"};
    int identical = 0;
    for (const auto& args : runs) {
        int c1 = 0, c2 = 0;
        const std::string a = capture(std::string(cli) + " " + args, c1);
        const std::string b = capture(std::string(cli) + " " + args, c2);
        if (c1 == 0 && c2 == 0 && !a.empty() && a == b)
            ++identical;
    }
    return {identical == int(runs.size()),
            "byte_identical=" + std::to_string(identical) + "/" + std::to_string(runs.size())};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
        {"AC1", ac1},   {"AC2", ac2},   {"AC3", ac3},   {"AC4", ac4},   {"AC5", ac5},
        {"AC6", ac6},   {"AC7", ac7},   {"AC8", ac8},   {"AC9", ac9},   {"AC10", ac10},
        {"AC11", ac11}, {"AC12", ac12}, {"AC13", ac13}, {"AC14", ac14}, {"AC15", ac15}};
    std::set<std::string> only(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& [name, fn] : all) {
        if (!only.empty() && !only.count(name))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-4s %s  %s (%.1fs)\n", name.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
