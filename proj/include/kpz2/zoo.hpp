#pragma once

// Classical operators: Cesaro, Hilbert matrices, Hausdorff matrices from moment
// sequences, shifts, signed permutations and diagonal operators on Z_2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

#include "kpz2/blockop.hpp"
#include "kpz2/random.hpp"

namespace kpz2 {

using ExtFloat = boost::multiprecision::mpfr_float;

/// Lower-triangular Cesaro matrix, row i (0-indexed) averaging x_0..x_i.
inline Matrix cesaro(Eigen::Index n) {
    if (n < 1)
        throw ParameterOutOfRange("dimension must be >= 1");
    Matrix c = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        c.row(i).head(i + 1).setConstant(1.0 / static_cast<double>(i + 1));
    return c;
}

/// Entries 1 / (i + j + lambda), i, j = 0..n-1.
inline Matrix hilbert_matrix(Eigen::Index n, double lambda) {
    if (n < 1)
        throw ParameterOutOfRange("dimension must be >= 1");
    if (!std::isfinite(lambda))
        throw ParameterOutOfRange("Hilbert parameter must be finite");
    if (lambda <= 0.0 && lambda == std::floor(lambda) && -lambda <= 2.0 * double(n - 1))
        throw PoleIndex(static_cast<std::size_t>(-lambda));
    Matrix h(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            h(i, j) = 1.0 / (static_cast<double>(i + j) + lambda);
    return h;
}

struct MomentSequence {
    std::string name;
    std::function<double(std::size_t)> mu;
    /// Same rule evaluated at the current ExtFloat precision; without it the double
    /// values are taken as exact data in extended mode.
    std::function<ExtFloat(std::size_t)> mu_ext;
    /// a_nk for 0 <= k <= n, when known in closed form.
    std::function<double(std::size_t, std::size_t)> closed_form;
    /// Norm of the infinite Hausdorff operator on l_p; throws ParameterOutOfRange
    /// outside its range of validity.
    std::function<double(PExponent)> norm_formula;
};

enum class PrecisionMode { double_precision, extended };

struct HausdorffSpec {
    MomentSequence moment;
    Eigen::Index n = 1;
    PrecisionMode precision = PrecisionMode::double_precision;
    /// Largest acceptable loss of significant digits in double mode.
    double max_digits_lost = 8.0;
    /// Skip the closed form even when one is present.
    bool use_closed_form = true;
};

namespace detail {

inline double log_choose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline std::vector<double> moments(const MomentSequence& m, Eigen::Index n) {
    std::vector<double> mu(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < mu.size(); ++k) {
        mu[k] = m.mu(k);
        if (!std::isfinite(mu[k]))
            throw InvalidSequence("moment " + std::to_string(k) + " of " + m.name +
                                  " is not finite");
    }
    return mu;
}

/// Runs the forward-difference recursion D_j,k = D_{j-1},k - D_{j-1},k+1 one order at a
/// time and hands each a_{k+j},k = C(k+j, k) D_j,k to `emit`.
template <class T, class Emit>
void difference_sweep(std::vector<T> d, Emit&& emit) {
    const std::size_t n = d.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (j > 0)
            for (std::size_t k = 0; k + j < n; ++k)
                d[k] = d[k] - d[k + 1];
        for (std::size_t k = 0; k + j < n; ++k)
            emit(k + j, k, d[k]);
    }
}

/// log10 of max_k C(n,k) S_{n-k},k per row n, where S is the difference table of |mu|
/// with sums in place of differences: the magnitude the cancellation has to remove.
inline std::vector<double> cancellation_scale(const std::vector<double>& mu) {
    const std::size_t n = mu.size();
    std::vector<double> row(n, -std::numeric_limits<double>::infinity());
    // t_j,k = S_j,k / 2^j stays bounded by max |mu|
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k)
        t[k] = std::abs(mu[k]);
    for (std::size_t j = 0; j < n; ++j) {
        if (j > 0)
            for (std::size_t k = 0; k + j < n; ++k)
                t[k] = 0.5 * (t[k] + t[k + 1]);
        for (std::size_t k = 0; k + j < n; ++k) {
            if (t[k] == 0.0)
                continue;
            const double l = (log_choose(double(k + j), double(k)) + double(j) * std::log(2.0) +
                              std::log(t[k])) /
                             std::log(10.0);
            row[k + j] = std::max(row[k + j], l);
        }
    }
    return row;
}

inline double digits_lost(const std::vector<double>& scale, const Matrix& a) {
    double lost = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double s = scale[static_cast<std::size_t>(i)];
        if (!std::isfinite(s))
            continue;
        if (!a.row(i).allFinite())
            return std::numeric_limits<double>::infinity();
        const double m = a.row(i).cwiseAbs().maxCoeff();
        if (m == 0.0)
            return std::numeric_limits<double>::infinity();
        lost = std::max(lost, s - std::log10(m));
    }
    return lost;
}

inline Matrix difference_table_double(const std::vector<double>& mu) {
    const auto n = static_cast<Eigen::Index>(mu.size());
    Matrix a = Matrix::Zero(n, n);
    difference_sweep(mu, [&](std::size_t r, std::size_t k, double d) {
        a(Eigen::Index(r), Eigen::Index(k)) =
            std::exp(log_choose(double(r), double(k))) * d;
    });
    return a;
}

/// Restores the global ExtFloat precision on scope exit.
class ExtPrecisionGuard {
  public:
    explicit ExtPrecisionGuard(unsigned digits) : saved_(ExtFloat::default_precision()) {
        ExtFloat::default_precision(digits);
    }
    ~ExtPrecisionGuard() { ExtFloat::default_precision(saved_); }
    ExtPrecisionGuard(const ExtPrecisionGuard&) = delete;
    ExtPrecisionGuard& operator=(const ExtPrecisionGuard&) = delete;

  private:
    unsigned saved_;
};

inline Matrix difference_table_extended(const MomentSequence& m, const std::vector<double>& mu,
                                        unsigned digits) {
    ExtPrecisionGuard guard(digits);
    const std::size_t n = mu.size();
    std::vector<ExtFloat> d(n);
    for (std::size_t k = 0; k < n; ++k)
        d[k] = m.mu_ext ? m.mu_ext(k) : ExtFloat(mu[k]);
    // binomials along each diagonal j: C(k+j, k) = C(k-1+j, k-1) (k+j) / k
    Matrix a = Matrix::Zero(Eigen::Index(n), Eigen::Index(n));
    std::vector<ExtFloat> binom(n);
    difference_sweep(std::move(d), [&](std::size_t r, std::size_t k, const ExtFloat& dv) {
        const std::size_t j = r - k;
        if (k == 0)
            binom[j] = 1;
        else
            binom[j] = binom[j] * ExtFloat(r) / ExtFloat(k);
        a(Eigen::Index(r), Eigen::Index(k)) = ExtFloat(binom[j] * dv).convert_to<double>();
    });
    return a;
}

inline void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ParameterOutOfRange(std::string(what) + " must be positive and finite");
}

inline double inv_p(PExponent p) {
    if (p.value() <= 1.0)
        throw ParameterOutOfRange("norm formula requires p > 1");
    return p.is_infinite() ? 0.0 : 1.0 / p.value();
}

/// a_nk = C(n,k) G(a+al) G(k+a) G(n-k+al) / (G(a) G(al) G(n+a+al)).
inline double gen_cesaro_coeff(double a, double al, std::size_t n, std::size_t k) {
    const double nn = double(n), kk = double(k);
    return std::exp(log_choose(nn, kk) + std::lgamma(a + al) + std::lgamma(kk + a) +
                    std::lgamma(nn - kk + al) - std::lgamma(a) - std::lgamma(al) -
                    std::lgamma(nn + a + al));
}

} // namespace detail

/// Digits of precision the double-precision difference table loses for size n: the
/// largest row-wise log10 ratio between the binomially weighted absolute table and
/// the computed coefficients.
inline double difference_table_digits_lost(const MomentSequence& m, Eigen::Index n) {
    const auto mu = detail::moments(m, n);
    return detail::digits_lost(detail::cancellation_scale(mu), detail::difference_table_double(mu));
}

/// Plain double-precision difference table, with no closed form and no loss check.
inline Matrix hausdorff_difference_table(const MomentSequence& m, Eigen::Index n) {
    if (n < 1)
        throw ParameterOutOfRange("dimension must be >= 1");
    return detail::difference_table_double(detail::moments(m, n));
}

/// Lower-triangular a_nk = C(n,k) Delta^{n-k} mu_k (0-indexed). Closed forms are used
/// when present. Otherwise the difference table is evaluated in double precision
/// (PrecisionLoss when more than max_digits_lost digits cancel) or with MPFR, whose
/// working precision is raised until it exceeds the observed loss by 20 digits.
inline Matrix hausdorff_matrix(const HausdorffSpec& spec) {
    const Eigen::Index n = spec.n;
    if (n < 1)
        throw ParameterOutOfRange("dimension must be >= 1");
    const MomentSequence& m = spec.moment;
    if (m.closed_form && spec.use_closed_form) {
        Matrix a = Matrix::Zero(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index k = 0; k <= r; ++k)
                a(r, k) = m.closed_form(std::size_t(r), std::size_t(k));
        return a;
    }
    const auto mu = detail::moments(m, n);
    const auto scale = detail::cancellation_scale(mu);
    if (spec.precision == PrecisionMode::double_precision) {
        Matrix a = detail::difference_table_double(mu);
        const double lost = detail::digits_lost(scale, a);
        if (lost > spec.max_digits_lost)
            throw PrecisionLoss(std::size_t(n), lost);
        return a;
    }
    unsigned digits = 50;
    for (;;) {
        Matrix a = detail::difference_table_extended(m, mu, digits);
        const double lost = detail::digits_lost(scale, a);
        if (std::isfinite(lost) && lost + 20.0 <= double(digits))
            return a;
        if (digits > 20000)
            throw PrecisionLoss(std::size_t(n), lost);
        digits = std::max(2 * digits, unsigned(std::ceil(std::isfinite(lost) ? lost : 0.0)) + 40);
    }
}

/// Generalized Cesaro: mu_k = G(a+al) G(k+a) / (G(a) G(k+a+al)).
inline MomentSequence moment_gen_cesaro(double a, double alpha) {
    detail::require_positive(a, "a");
    detail::require_positive(alpha, "alpha");
    MomentSequence m;
    m.name = "gen-cesaro(a=" + std::to_string(a) + ",alpha=" + std::to_string(alpha) + ")";
    m.mu = [a, alpha](std::size_t k) {
        const double kk = double(k);
        return std::exp(std::lgamma(a + alpha) + std::lgamma(kk + a) - std::lgamma(a) -
                        std::lgamma(kk + a + alpha));
    };
    m.mu_ext = [a, alpha](std::size_t k) {
        const ExtFloat ea(a), eal(alpha), kk(k);
        return ExtFloat(exp(lgamma(ea + eal) + lgamma(kk + ea) - lgamma(ea) - lgamma(kk + ea + eal)));
    };
    m.closed_form = [a, alpha](std::size_t n, std::size_t k) {
        return detail::gen_cesaro_coeff(a, alpha, n, k);
    };
    // implemented as printed: G(a+al) G(a-1/p) / G(a+al-1/p), valid for a > 1/p
    m.norm_formula = [a, alpha](PExponent p) {
        const double ip = detail::inv_p(p);
        if (!(a > ip))
            throw ParameterOutOfRange("generalized Cesaro norm formula needs a > 1/p");
        return std::exp(std::lgamma(a + alpha) + std::lgamma(a - ip) - std::lgamma(a + alpha - ip));
    };
    return m;
}

/// Hoelder: mu_k = (k+1)^{-alpha}. For alpha = 1 this is the Cesaro moment sequence and
/// carries its closed form a_nk = 1/(n+1).
inline MomentSequence moment_holder(double alpha) {
    detail::require_positive(alpha, "alpha");
    MomentSequence m;
    m.name = "holder(alpha=" + std::to_string(alpha) + ")";
    m.mu = [alpha](std::size_t k) { return std::pow(double(k + 1), -alpha); };
    m.mu_ext = [alpha](std::size_t k) {
        return ExtFloat(pow(ExtFloat(k + 1), -ExtFloat(alpha)));
    };
    if (alpha == 1.0)
        m.closed_form = [](std::size_t n, std::size_t) { return 1.0 / double(n + 1); };
    m.norm_formula = [alpha](PExponent p) {
        const double ip = detail::inv_p(p);
        return std::pow(1.0 / (1.0 - ip), alpha);
    };
    return m;
}

/// Euler: mu_k = a^k, 0 < a < 1, with a_nk = C(n,k) a^k (1-a)^{n-k}.
inline MomentSequence moment_euler(double a) {
    if (!(a > 0.0 && a < 1.0))
        throw ParameterOutOfRange("Euler parameter must satisfy 0 < a < 1");
    MomentSequence m;
    m.name = "euler(a=" + std::to_string(a) + ")";
    m.mu = [a](std::size_t k) { return std::pow(a, double(k)); };
    m.mu_ext = [a](std::size_t k) { return ExtFloat(pow(ExtFloat(a), ExtFloat(k))); };
    m.closed_form = [a](std::size_t n, std::size_t k) {
        return std::exp(detail::log_choose(double(n), double(k)) + double(k) * std::log(a) +
                        double(n - k) * std::log1p(-a));
    };
    // (1 + r)^{1/p} with r = (1 - a)/a
    m.norm_formula = [a](PExponent p) { return std::pow(1.0 / a, detail::inv_p(p)); };
    return m;
}

/// Gamma: mu_k = (a/(k+a))^alpha. For alpha = 1 this coincides with the generalized
/// Cesaro sequence of the same a and alpha = 1, whose closed form it carries.
inline MomentSequence moment_gamma(double a, double alpha) {
    detail::require_positive(a, "a");
    detail::require_positive(alpha, "alpha");
    MomentSequence m;
    m.name = "gamma(a=" + std::to_string(a) + ",alpha=" + std::to_string(alpha) + ")";
    m.mu = [a, alpha](std::size_t k) { return std::pow(a / (double(k) + a), alpha); };
    m.mu_ext = [a, alpha](std::size_t k) {
        const ExtFloat ea(a);
        return ExtFloat(pow(ea / (ExtFloat(k) + ea), ExtFloat(alpha)));
    };
    if (alpha == 1.0)
        m.closed_form = [a](std::size_t n, std::size_t k) {
            return detail::gen_cesaro_coeff(a, 1.0, n, k);
        };
    m.norm_formula = [a, alpha](PExponent p) {
        const double ip = detail::inv_p(p);
        if (!(a > ip))
            throw ParameterOutOfRange("Gamma norm formula needs a > 1/p");
        return std::pow(a / (a - ip), alpha);
    };
    return m;
}

inline MomentSequence moment_constant(double c = 1.0) {
    MomentSequence m;
    m.name = "constant";
    m.mu = [c](std::size_t) { return c; };
    return m;
}

enum class ShiftDirection { right, left };

/// Right shift e_k -> e_{k+1} (last basis vector dropped); the left shift is its
/// transpose.
inline Matrix shift(Eigen::Index n, ShiftDirection dir) {
    if (n < 1)
        throw ParameterOutOfRange("dimension must be >= 1");
    Matrix s = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (dir == ShiftDirection::right)
            s(k + 1, k) = 1.0;
        else
            s(k, k + 1) = 1.0;
    }
    return s;
}

/// (alpha x)_i = signs_i x_{perm_i}.
inline Matrix signed_permutation(const std::vector<Eigen::Index>& perm, const SeqVec& signs) {
    const auto n = static_cast<Eigen::Index>(perm.size());
    if (n < 1)
        throw ParameterOutOfRange("permutation must be nonempty");
    require_same_dim(signs.size(), n);
    std::vector<bool> seen(perm.size(), false);
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = perm[std::size_t(i)];
        if (j < 0 || j >= n || seen[std::size_t(j)])
            throw ParameterOutOfRange("perm is not a bijection of {0, ..., n-1}");
        seen[std::size_t(j)] = true;
        if (signs(i) != 1.0 && signs(i) != -1.0)
            throw ParameterOutOfRange("signs must be +1 or -1");
        a(i, j) = signs(i);
    }
    return a;
}

inline Matrix random_signed_permutation(Eigen::Index n, Rng& rng) {
    const auto perm = rng.permutation(n);
    return signed_permutation(perm, rng.signs(n));
}

/// D_sigma = (D_a 0; 0 D_b) with a = sigma_0, sigma_2, ... and b = sigma_1, sigma_3, ...
inline BlockOperator diagonal_z2(const SeqVec& sigma) {
    if (sigma.size() == 0 || sigma.size() % 2 != 0)
        throw InvalidSequence("diagonal symbol must have even positive length");
    require_valid(sigma);
    const Eigen::Index n = sigma.size() / 2;
    SeqVec a(n), b(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        a(k) = sigma(2 * k);
        b(k) = sigma(2 * k + 1);
    }
    const Matrix z = Matrix::Zero(n, n);
    return {a.asDiagonal().toDenseMatrix(), z, z, b.asDiagonal().toDenseMatrix()};
}

/// Disjoint unit-norm blocks of length `len` on a random arrangement of the first
/// floor(n/len)*len coordinates, with Gaussian entries.
inline std::vector<SeqVec> random_normalized_blocks(Eigen::Index n, Eigen::Index len, Rng& rng) {
    if (len < 1 || len > n)
        throw ParameterOutOfRange("block length must satisfy 1 <= len <= n");
    const auto perm = rng.permutation(n);
    const Eigen::Index m = n / len;
    std::vector<SeqVec> blocks;
    blocks.reserve(std::size_t(m));
    for (Eigen::Index b = 0; b < m; ++b) {
        SeqVec u = SeqVec::Zero(n);
        for (Eigen::Index i = 0; i < len; ++i) {
            double v = 0.0;
            while (v == 0.0)
                v = rng.normal();
            u(perm[std::size_t(b * len + i)]) = v;
        }
        blocks.push_back(u / u.norm());
    }
    return blocks;
}

/// max |Q(T_U z) / Q(z) - 1| for one block system drawn from `rng` and `samples`
/// random z supported on the block coordinates: Gaussian pairs on even draws, lifts plus
/// a small first-coordinate perturbation on odd draws.
inline double tu_isometry_deviation(Eigen::Index n, Eigen::Index len, int samples, Rng& rng) {
    const auto blocks = random_normalized_blocks(n, len, rng);
    const BlockOperator t = block_operator_TU(blocks);
    const auto m = static_cast<Eigen::Index>(blocks.size());
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Z2Vec z = Z2Vec::zero(n);
        z.omega.head(m) = rng.gaussian(m);
        z.x.head(m) = rng.gaussian(m);
        if (i % 2 == 1)
            z = lift_Lp(z.x) + inclusion_i(0.1 * z.omega);
        worst = std::max(worst, std::abs(z2_quasinorm(t.apply(z)) / z2_quasinorm(z) - 1.0));
    }
    return worst;
}

} // namespace kpz2
