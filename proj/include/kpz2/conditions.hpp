#pragma once

// Boundedness conditions for block operators (alpha beta; delta gamma) on Z_2,
// evaluated on finite sections across sizes and summarized as growth trends.
//
// Conditions involving the nonlinear KP are sup-ratios over a probe set, not matrix
// norms. Conditions involving KP^{-1} use the parametric family w = KP v with the
// section KP^{-1} w := v; only c4 calls the numerical inverse.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "kpz2/normest.hpp"

namespace kpz2 {

struct OperatorFamily {
    std::string label;
    std::function<BlockOperator(Eigen::Index)> builder;
};

enum class Verdict { consistent_with_bounded, inconsistent, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::consistent_with_bounded:
        return "consistent_with_bounded";
    case Verdict::inconsistent:
        return "inconsistent";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "inconclusive";
}

struct ConditionOptions {
    int budget = 8;        ///< random unit probes per size
    int fstar_budget = 60; ///< descent steps for l_f* upper estimates
    std::uint64_t seed = 0x5eed;
    TrendOptions trend;
};

struct ConditionReport {
    std::string label;
    std::vector<double> sizes;
    std::map<std::string, NormTrend> trends;
    Verdict verdict = Verdict::inconclusive;
};

/// Keys of the conditions that decide the verdict.
inline const std::vector<std::string>& mandatory_conditions() {
    static const std::vector<std::string> keys{"d", "g1", "g2", "d_gKinv", "g_dK", "star"};
    return keys;
}

inline const std::vector<std::string>& additional_conditions() {
    static const std::vector<std::string> keys{"a", "c0", "c1", "c2", "c3", "c4"};
    return keys;
}

/// Diagnostics outside the verdict: ||gamma||_2, ||delta w||_2 / ||w||_f* and the lifting
/// residual ||(alpha v, delta v)||_Z2 / ||v||_2.
inline const std::vector<std::string>& extra_conditions() {
    static const std::vector<std::string> keys{"g_l2", "d_fstar", "lift_residual"};
    return keys;
}

/// Probe vectors of dimension n: e_1, e_n, spread_k for k = 2^j < n and k = n, then
/// `budget` seeded random unit vectors. The random part is a prefix of one fixed
/// sequence, so a larger budget only adds probes.
inline std::vector<SeqVec> probe_set(Eigen::Index n, int budget, std::uint64_t seed) {
    std::vector<SeqVec> probes{unit_vector(n, 0)};
    if (n > 1)
        probes.push_back(unit_vector(n, n - 1));
    for (Eigen::Index k = 2; k < n; k *= 2)
        probes.push_back(spread(n, k));
    if (n > 1)
        probes.push_back(spread(n));
    Rng rng(derive_seed(seed, std::uint64_t(n)));
    for (int i = 0; i < budget; ++i)
        probes.push_back(rng.unit_gaussian(n));
    return probes;
}

namespace detail {

/// Per-size sup-ratios for the requested keys.
inline std::map<std::string, double> condition_values(const BlockOperator& t,
                                                      const std::set<std::string>& keys,
                                                      const ConditionOptions& opt) {
    const Eigen::Index n = t.dim();
    const Matrix& al = t.alpha();
    const Matrix& be = t.beta();
    const Matrix& de = t.delta();
    const Matrix& ga = t.gamma();
    std::map<std::string, double> sup;
    for (const auto& k : keys)
        sup[k] = 0.0;
    auto want = [&](const char* k) { return keys.count(k) > 0; };
    auto bump = [&](const char* k, double v) {
        if (want(k) && std::isfinite(v) && v > sup[k])
            sup[k] = v;
    };
    auto fstar = [&](const SeqVec& w, const std::optional<SeqVec>& hint = std::nullopt) {
        return lf_star_quasinorm_ub(w, opt.fstar_budget, hint);
    };

    OpNormOptions nopt;
    nopt.seed = opt.seed;
    nopt.svd_check_max_n = 0;
    if (want("d"))
        sup["d"] = opnorm_p(de, PExponent(2.0), nopt).value;
    if (want("g_l2"))
        sup["g_l2"] = opnorm_p(ga, PExponent(2.0), nopt).value;

    bool c4_any = false;
    for (const SeqVec& v : probe_set(n, opt.budget, opt.seed)) {
        const double vn = v.norm();
        const SeqVec kv = kp_map(v);
        const double lf = kv.norm() + vn;
        const SeqVec gv = ga * v;
        const SeqVec bv = be * v;
        const SeqVec dv = de * v;
        const SeqVec av = al * v;

        bump("g1", gv.norm() / lf);
        bump("g2", (bv - kp_map(gv)).norm() / lf);
        bump("g_dK", (gv + de * kv).norm() / vn);
        bump("c0", (av - kp_map(dv)).norm() / vn);
        bump("lift_residual", ((av - kp_map(dv)).norm() + dv.norm()) / vn);
        if (want("a"))
            bump("a", fstar(av) / vn);
        const SeqVec akv = al * kv;
        if (want("c1"))
            bump("c1", fstar(akv + bv) / vn);
        if (want("c3"))
            bump("c3", (akv + bv - kp_map(de * kv + gv)).norm() / vn);
        if (want("c4")) {
            const auto inv = try_kp_inverse(bv, 1e-9 * std::max(1.0, bv.norm()), 200);
            if (inv.converged) {
                c4_any = true;
                bump("c4", lf_quasinorm(gv - inv.x) / lf);
            }
        }

        // parametric family w = KP v, KP^{-1} w := v; needs ||KP v|| >= log 2 ||v||
        if (kv.norm() < std::numbers::ln2 * vn)
            continue;
        const bool param = want("d_gKinv") || want("star") || want("c2") || want("d_fstar");
        if (!param)
            continue;
        const double fw = fstar(kv, v);
        if (!(fw > 0.0))
            continue;
        const SeqVec dw = de * kv;
        bump("d_gKinv", (dw + gv).norm() / fw);
        bump("star", (al * kv + bv - kp_map(dw + gv)).norm() / fw);
        bump("d_fstar", dw.norm() / fw);
        if (want("c2"))
            bump("c2", fstar(al * kv + bv) / fw);
    }
    if (want("c4") && !c4_any)
        sup["c4"] = std::numeric_limits<double>::quiet_NaN();
    return sup;
}

inline ConditionReport evaluate(const OperatorFamily& f, const std::vector<Eigen::Index>& sizes,
                                const std::set<std::string>& keys, const ConditionOptions& opt) {
    ConditionReport rep;
    rep.label = f.label;
    for (auto n : sizes)
        rep.sizes.push_back(double(n));
    std::map<std::string, std::vector<double>> series;
    for (const auto& k : keys)
        series[k] = {};
    for (auto n : sizes) {
        std::map<std::string, double> vals;
        try {
            vals = condition_values(f.builder(n), keys, opt);
        } catch (const Error&) {
            // a size the family or a solver cannot handle becomes a gap
        }
        for (const auto& k : keys) {
            auto it = vals.find(k);
            series[k].push_back(it == vals.end() ? std::numeric_limits<double>::quiet_NaN()
                                                 : it->second);
        }
    }
    for (const auto& [k, vals] : series)
        rep.trends[k] = growth_trend(rep.sizes, vals, opt.trend);
    return rep;
}

inline std::set<std::string> key_set(std::initializer_list<const std::vector<std::string>*> groups) {
    std::set<std::string> out;
    for (const auto* g : groups)
        out.insert(g->begin(), g->end());
    return out;
}

} // namespace detail

/// Aggregates the mandatory trends: a growth class in any of them is inconsistent with
/// boundedness, all bounded is consistent, anything else is inconclusive.
inline Verdict boundedness_verdict(const ConditionReport& rep) {
    bool all_bounded = true;
    for (const auto& k : mandatory_conditions()) {
        auto it = rep.trends.find(k);
        if (it == rep.trends.end())
            throw InvalidSequence("condition report lacks mandatory condition " + k);
        if (is_growth(it->second.fit))
            return Verdict::inconsistent;
        if (it->second.fit != GrowthClass::bounded)
            all_bounded = false;
    }
    return all_bounded ? Verdict::consistent_with_bounded : Verdict::inconclusive;
}

/// d, g1, g2, d_gKinv and g_dK.
inline ConditionReport check_necessary(const OperatorFamily& f,
                                       const std::vector<Eigen::Index>& sizes,
                                       const ConditionOptions& opt = {}) {
    return detail::evaluate(f, sizes, {"d", "g1", "g2", "d_gKinv", "g_dK"}, opt);
}

inline NormTrend check_star(const OperatorFamily& f, const std::vector<Eigen::Index>& sizes,
                            const ConditionOptions& opt = {}) {
    return detail::evaluate(f, sizes, {"star"}, opt).trends.at("star");
}

/// a, c0, c1, c2, c3 and c4.
inline ConditionReport check_additional(const OperatorFamily& f,
                                        const std::vector<Eigen::Index>& sizes,
                                        const ConditionOptions& opt = {}) {
    const auto& keys = additional_conditions();
    return detail::evaluate(f, sizes, {keys.begin(), keys.end()}, opt);
}

/// Every condition, the diagnostics, and the verdict in one pass over the sizes.
inline ConditionReport check_all(const OperatorFamily& f, const std::vector<Eigen::Index>& sizes,
                                 const ConditionOptions& opt = {}) {
    auto rep = detail::evaluate(
        f, sizes,
        detail::key_set({&mandatory_conditions(), &additional_conditions(), &extra_conditions()}),
        opt);
    rep.verdict = boundedness_verdict(rep);
    return rep;
}

/// Mandatory conditions only, with the verdict.
inline ConditionReport check_mandatory(const OperatorFamily& f,
                                       const std::vector<Eigen::Index>& sizes,
                                       const ConditionOptions& opt = {}) {
    auto rep = detail::evaluate(f, sizes, detail::key_set({&mandatory_conditions()}), opt);
    rep.verdict = boundedness_verdict(rep);
    return rep;
}

} // namespace kpz2
