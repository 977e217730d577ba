#pragma once

// Operator norm estimates on truncated l_p (Boyd's power method) and on truncated Z_2
// (structured search plus coordinate ascent), and growth classification of norm
// estimates across truncation sizes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/SVD>

#include "kpz2/blockop.hpp"
#include "kpz2/random.hpp"

namespace kpz2 {

template <class Scalar>
struct NormEstimate {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    double value = 0.0;  ///< ||A w||_p / ||w||_p for the witness w
    Vector witness;
    bool converged = false;
    int iterations = 0;  ///< summed over starts
    std::optional<double> sigma_max; ///< dense SVD value, p = 2 and n <= svd_check_max_n
};

struct OpNormOptions {
    double tol = 1e-10;
    int max_iter = 1000;
    std::uint64_t seed = 0x5eed;
    Eigen::Index svd_check_max_n = 512;
};

namespace detail {

template <class Scalar>
Scalar unit_phase(Scalar v) {
    if constexpr (std::is_same_v<Scalar, double>) {
        return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    } else {
        const double a = std::abs(v);
        return a == 0.0 ? Scalar(0.0) : v / a;
    }
}

template <class Vec>
double abs_lp_norm(const Vec& v, PExponent p) {
    return lp_norm(SeqVec(v.cwiseAbs()), p);
}

/// Norming functional of y in l_p*: ||d||_p* = 1 and Re <d, y> = ||y||_p. For p = inf
/// the first maximal coordinate is used; zero coordinates get 0 for p = 1.
template <class Vec>
Vec dual_vector(const Vec& y, PExponent p) {
    using Scalar = typename Vec::Scalar;
    const Eigen::Index n = y.size();
    Vec d = Vec::Zero(n);
    const double yn = abs_lp_norm(y, p);
    if (yn == 0.0)
        return d;
    if (p.is_infinite()) {
        Eigen::Index best = 0;
        double m = -1.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(y(i)) > m) {
                m = std::abs(y(i));
                best = i;
            }
        d(best) = unit_phase<Scalar>(y(best));
        return d;
    }
    const double q = p.value();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = std::abs(y(i));
        if (a == 0.0)
            continue;
        d(i) = unit_phase<Scalar>(y(i)) * (q == 1.0 ? 1.0 : std::pow(a / yn, q - 1.0));
    }
    return d;
}

template <class Vec>
double real_dot(const Vec& a, const Vec& b) {
    return std::real(a.dot(b)); // Eigen's dot conjugates the first argument
}

} // namespace detail

/// Lower estimate of ||A||_{p->p} by the nonlinear power method
/// x <- dual_{p*}(A^H dual_p(A x)), run from several starts (ones, random signs, an
/// approximate top singular vector, the column of largest p-norm, the norming vector of
/// the row of largest p*-norm, e_1). The value is the best ratio ||A x||_p / ||x||_p
/// seen on any iterate, so it is always attained by the returned witness. For p = 2 and
/// n <= svd_check_max_n the dense SVD value and its right singular vector are included.
template <class Derived>
NormEstimate<typename Derived::Scalar> opnorm_p(const Eigen::MatrixBase<Derived>& a_in,
                                                 PExponent p, const OpNormOptions& opt = {}) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Mat a = a_in;
    const Eigen::Index n = a.cols();
    if (n < 1 || a.rows() != n)
        throw DimensionMismatch(std::size_t(a.rows()), std::size_t(n));
    if (!a.allFinite())
        throw InvalidSequence("matrix entries must be finite");
    const PExponent q = p.conjugate();
    const Mat ah = a.adjoint();

    NormEstimate<Scalar> est;
    est.witness = Vec::Zero(n);
    est.witness(0) = Scalar(1.0);
    auto record = [&](const Vec& x, double ratio) {
        if (ratio > est.value) {
            est.value = ratio;
            est.witness = x;
        }
    };

    std::vector<Vec> starts;
    starts.push_back(Vec::Ones(n));
    {
        Rng rng(opt.seed);
        starts.push_back(rng.signs(n).template cast<Scalar>());
    }
    {
        Vec v = Vec::Ones(n);
        for (int it = 0; it < 20; ++it) {
            v = ah * (a * v);
            const double nv = v.norm();
            if (nv == 0.0)
                break;
            v /= nv;
        }
        if (v.norm() > 0.0)
            starts.push_back(v);
    }
    {
        Eigen::Index best_col = 0, best_row = 0;
        double bc = -1.0, br = -1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double c = detail::abs_lp_norm(Vec(a.col(j)), p);
            if (c > bc) {
                bc = c;
                best_col = j;
            }
            const double r = detail::abs_lp_norm(Vec(ah.col(j)), q);
            if (r > br) {
                br = r;
                best_row = j;
            }
        }
        Vec e = Vec::Zero(n);
        e(best_col) = Scalar(1.0);
        starts.push_back(e);
        // x maximizing |<row, x>| over the unit ball of l_p
        Vec row = ah.col(best_row);
        if (detail::abs_lp_norm(row, q) > 0.0)
            starts.push_back(detail::dual_vector(row, q));
    }
    {
        Vec e = Vec::Zero(n);
        e(0) = Scalar(1.0);
        starts.push_back(e);
    }

    bool best_converged = false;
    for (const Vec& x0 : starts) {
        const double n0 = detail::abs_lp_norm(x0, p);
        if (n0 == 0.0)
            continue;
        Vec x = x0 / n0;
        double prev = -1.0;
        bool conv = false;
        double run_best = 0.0;
        for (int it = 0; it < opt.max_iter; ++it) {
            ++est.iterations;
            const Vec y = a * x;
            const double val = detail::abs_lp_norm(y, p);
            record(x, val);
            run_best = std::max(run_best, val);
            if (val == 0.0) {
                conv = true;
                break;
            }
            const Vec z = ah * detail::dual_vector(y, p);
            const double zq = detail::abs_lp_norm(z, q);
            // stationary point of ||A x||_p on the unit sphere
            if (zq <= detail::real_dot(z, x) + opt.tol * zq) {
                conv = true;
                break;
            }
            if (prev >= 0.0 && std::abs(val - prev) <= opt.tol * val && it > 2) {
                conv = true;
                break;
            }
            prev = val;
            x = detail::dual_vector(z, q);
            const double xn = detail::abs_lp_norm(x, p);
            if (xn == 0.0)
                break;
            x /= xn;
        }
        if (run_best >= est.value)
            best_converged = conv;
    }
    est.converged = best_converged;

    if (!p.is_infinite() && p.value() == 2.0 && n <= opt.svd_check_max_n) {
        Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinV);
        est.sigma_max = svd.singularValues()(0);
        const Vec v = svd.matrixV().col(0);
        record(v, (a * v).norm() / v.norm());
    }
    return est;
}

// ---------------------------------------------------------------------------------------

struct Z2NormEstimate {
    double value = 0.0; ///< ||T z||_Z2 / ||z||_Z2 for the witness z
    Z2Vec witness;
};

struct Z2SearchOptions {
    int samples = 32;       ///< random Gaussian candidates
    int ascent_steps = 200; ///< coordinate-ascent trials per refined candidate
    int refine = 3;         ///< number of best candidates refined by ascent
    std::uint64_t seed = 0x5eed;
};

namespace detail {

inline double z2_ratio(const BlockOperator& t, const Z2Vec& z) {
    const double den = z2_quasinorm(z);
    if (den == 0.0)
        return 0.0;
    return z2_quasinorm(t.apply(z)) / den;
}

/// Candidate families independent of T: i(y), j(y), lift_Lp(y) and (y, y) for
/// y in {e_1, e_n, spread_k (k = 2^j and n)}.
inline std::vector<Z2Vec> structured_candidates(Eigen::Index n) {
    std::vector<SeqVec> ys{unit_vector(n, 0)};
    if (n > 1)
        ys.push_back(unit_vector(n, n - 1));
    for (Eigen::Index k = 2; k < n; k *= 2)
        ys.push_back(spread(n, k));
    if (n > 1)
        ys.push_back(spread(n));
    std::vector<Z2Vec> out;
    for (const auto& y : ys) {
        out.push_back(inclusion_i(y));
        out.push_back(inclusion_j(y));
        out.push_back(lift_Lp(y));
        out.push_back(Z2Vec(y, y));
    }
    return out;
}

/// Randomized coordinate ascent on z -> Q(T z) / Q(z). Updates of T z reuse the
/// affected column, so each trial costs O(n).
inline Z2NormEstimate coordinate_ascent(const BlockOperator& t, Z2Vec z, int steps, Rng& rng) {
    const Eigen::Index n = z.dim();
    Z2Vec tz = t.apply(z);
    auto ratio_of = [](const Z2Vec& in, const Z2Vec& out) {
        const double den = z2_quasinorm(in);
        return den == 0.0 ? 0.0 : z2_quasinorm(out) / den;
    };
    Z2NormEstimate best{ratio_of(z, tz), z};
    double scale = std::max(z.omega.cwiseAbs().maxCoeff(), z.x.cwiseAbs().maxCoeff());
    if (scale == 0.0)
        return best;
    double step = 0.5;
    for (int s = 0; s < steps; ++s) {
        const auto c = static_cast<Eigen::Index>(rng.below(std::uint64_t(2 * n)));
        const bool in_x = c >= n;
        const Eigen::Index k = in_x ? c - n : c;
        const double h = rng.sign() * step * scale;
        Z2Vec trial = z;
        Z2Vec ttrial = tz;
        if (in_x) {
            trial.x(k) += h;
            ttrial.omega += h * t.beta().col(k);
            ttrial.x += h * t.gamma().col(k);
        } else {
            trial.omega(k) += h;
            ttrial.omega += h * t.alpha().col(k);
            ttrial.x += h * t.delta().col(k);
        }
        const double r = ratio_of(trial, ttrial);
        if (r > best.value) {
            best = {r, trial};
            z = std::move(trial);
            tz = std::move(ttrial);
            step = std::min(1.0, step * 1.5);
        } else {
            step = std::max(1e-6, step * 0.9);
        }
    }
    return best;
}

} // namespace detail

/// Lower estimate of the Z_2 quasinorm ratio sup ||T z|| / ||z|| over structured
/// candidates, seeded random Gaussian z and lifts of Gaussian vectors; the best
/// `refine` candidates are then improved by coordinate ascent.
inline Z2NormEstimate z2_opnorm_est(const BlockOperator& t, const Z2SearchOptions& opt = {}) {
    const Eigen::Index n = t.dim();
    Rng rng(opt.seed);
    std::vector<Z2NormEstimate> pool;
    for (auto& z : detail::structured_candidates(n))
        pool.push_back({detail::z2_ratio(t, z), std::move(z)});
    for (int s = 0; s < opt.samples; ++s) {
        Z2Vec z(rng.gaussian(n), rng.gaussian(n));
        pool.push_back({detail::z2_ratio(t, z), std::move(z)});
        Z2Vec l = lift_Lp(rng.gaussian(n));
        pool.push_back({detail::z2_ratio(t, l), std::move(l)});
    }
    // stable order keeps the result independent of sort implementation details
    std::stable_sort(pool.begin(), pool.end(),
                     [](const auto& a, const auto& b) { return a.value > b.value; });
    Z2NormEstimate best = pool.front();
    const int refine = std::min<int>(opt.refine, int(pool.size()));
    for (int r = 0; r < refine && opt.ascent_steps > 0; ++r) {
        Rng local(derive_seed(opt.seed, std::uint64_t(r) + 1));
        auto refined = detail::coordinate_ascent(t, pool[std::size_t(r)].witness, opt.ascent_steps, local);
        if (refined.value > best.value)
            best = std::move(refined);
    }
    return best;
}

// ---------------------------------------------------------------------------------------

enum class GrowthClass { bounded, log_growth, log_sq_growth, power_growth, inconclusive };

inline const char* to_string(GrowthClass g) {
    switch (g) {
    case GrowthClass::bounded:
        return "bounded";
    case GrowthClass::log_growth:
        return "log_growth";
    case GrowthClass::log_sq_growth:
        return "log_sq_growth";
    case GrowthClass::power_growth:
        return "power_growth";
    case GrowthClass::inconclusive:
        return "inconclusive";
    }
    return "inconclusive";
}

inline bool is_growth(GrowthClass g) {
    return g == GrowthClass::log_growth || g == GrowthClass::log_sq_growth ||
           g == GrowthClass::power_growth;
}

struct ModelFit {
    GrowthClass model;
    double a = 0.0;        ///< intercept (log c for the power model)
    double b = 0.0;        ///< slope (exponent s for the power model)
    double residual = std::numeric_limits<double>::infinity(); ///< RMS(v - fit) / mean |v|
    double growth_per_octave = 0.0;
    bool valid = false;
};

struct TrendOptions {
    /// A growth model is only considered if its fit grows by at least this fraction of
    /// its value at the smallest size per doubling of n.
    double min_growth_per_octave = 0.07;
    /// The best growth model must beat the runner-up by this residual factor.
    double margin = 0.7;
    /// Values below this are treated as zero.
    double zero_tol = 1e-12;
};

struct NormTrend {
    std::vector<double> sizes;
    std::vector<double> values; ///< NaN marks a gap
    GrowthClass fit = GrowthClass::inconclusive;
    /// Some growth model passed the growth threshold, even if the margin rule could not
    /// pick between growth laws.
    bool growing = false;
    std::vector<ModelFit> models;
    std::string note;
};

namespace detail {

inline ModelFit fit_linear(GrowthClass model, const std::vector<double>& t,
                           const std::vector<double>& v, const std::vector<double>& feature) {
    ModelFit f;
    f.model = model;
    const std::size_t m = t.size();
    double mf = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mf += feature[i];
        mv += v[i];
    }
    mf /= double(m);
    mv /= double(m);
    double sff = 0.0, sfv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sff += (feature[i] - mf) * (feature[i] - mf);
        sfv += (feature[i] - mf) * (v[i] - mv);
    }
    f.b = sff > 0.0 ? sfv / sff : 0.0;
    f.a = mv - f.b * mf;
    f.valid = true;
    return f;
}

} // namespace detail

/// Least-squares fits of c, a + b log n, a + b log^2 n (linear space) and c n^s (log-log),
/// followed by classification: growth models whose fit increases by less than
/// min_growth_per_octave are discarded; with none left the trend is bounded, otherwise
/// the smallest residual wins if it is at most `margin` times the runner-up.
inline NormTrend growth_trend(const std::vector<double>& sizes, const std::vector<double>& values,
                              const TrendOptions& opt = {}) {
    if (sizes.size() != values.size())
        throw DimensionMismatch(sizes.size(), values.size());
    if (sizes.size() < 4)
        throw InvalidSequence("growth trend needs at least 4 sizes");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!(sizes[i] >= 1.0))
            throw InvalidSequence("sizes must be >= 1");
        if (i > 0 && !(sizes[i] > sizes[i - 1]))
            throw InvalidSequence("sizes must be strictly increasing");
        if (values[i] < 0.0)
            throw InvalidSequence("norm values must be nonnegative");
    }
    NormTrend tr;
    tr.sizes = sizes;
    tr.values = values;

    std::vector<double> n, v;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        if (std::isfinite(values[i])) {
            n.push_back(sizes[i]);
            v.push_back(values[i]);
        }
    if (n.size() < 4 || std::log2(n.back() / n.front()) < 2.0) {
        tr.note = "fewer than 4 usable sizes or span below 2 octaves";
        return tr;
    }
    const double vmax = *std::max_element(v.begin(), v.end());
    if (vmax <= opt.zero_tol) {
        tr.fit = GrowthClass::bounded;
        tr.note = "all values vanish";
        return tr;
    }
    double mean_abs = 0.0;
    for (double x : v)
        mean_abs += std::abs(x);
    mean_abs /= double(v.size());

    const std::size_t m = n.size();
    std::vector<double> ones(m, 1.0), ln(m), ln2(m);
    for (std::size_t i = 0; i < m; ++i) {
        ln[i] = std::log(n[i]);
        ln2[i] = ln[i] * ln[i];
    }
    const double octaves = std::log2(n.back() / n.front());

    auto finish = [&](ModelFit& f, auto eval) {
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = v[i] - eval(i);
            ss += r * r;
        }
        f.residual = std::sqrt(ss / double(m)) / mean_abs;
        const double lo = eval(0), hi = eval(m - 1);
        f.growth_per_octave = (hi - lo) / std::max(std::abs(lo), 1e-300) / octaves;
    };

    ModelFit cst = detail::fit_linear(GrowthClass::bounded, n, v, ones);
    finish(cst, [&](std::size_t) { return cst.a; });
    ModelFit lg = detail::fit_linear(GrowthClass::log_growth, n, v, ln);
    finish(lg, [&](std::size_t i) { return lg.a + lg.b * ln[i]; });
    ModelFit lg2 = detail::fit_linear(GrowthClass::log_sq_growth, n, v, ln2);
    finish(lg2, [&](std::size_t i) { return lg2.a + lg2.b * ln2[i]; });
    ModelFit pw;
    pw.model = GrowthClass::power_growth;
    if (std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; })) {
        std::vector<double> lv(m);
        for (std::size_t i = 0; i < m; ++i)
            lv[i] = std::log(v[i]);
        pw = detail::fit_linear(GrowthClass::power_growth, n, lv, ln);
        finish(pw, [&](std::size_t i) { return std::exp(pw.a + pw.b * ln[i]); });
    }
    tr.models = {cst, lg, lg2, pw};

    std::vector<const ModelFit*> cand;
    for (const ModelFit* f : {&lg, &lg2, &pw})
        if (f->valid && f->growth_per_octave >= opt.min_growth_per_octave)
            cand.push_back(f);
    if (cand.empty()) {
        tr.fit = GrowthClass::bounded;
        return tr;
    }
    tr.growing = true;
    std::stable_sort(cand.begin(), cand.end(),
                     [](const ModelFit* a, const ModelFit* b) { return a->residual < b->residual; });
    if (cand.size() == 1 || cand[0]->residual <= opt.margin * cand[1]->residual) {
        tr.fit = cand[0]->model;
    } else {
        tr.fit = GrowthClass::inconclusive;
        tr.note = std::string("growth models ") + to_string(cand[0]->model) + " and " +
                  to_string(cand[1]->model) + " fit equally well";
    }
    return tr;
}

} // namespace kpz2
