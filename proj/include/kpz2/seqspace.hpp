#pragma once

// Finite truncations of l_2, l_p, l_f and l_f*: norms, the Kalton-Peck map KP and a
// numerical section KP^{-1}.

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "kpz2/errors.hpp"
#include "kpz2/types.hpp"

namespace kpz2 {

inline double lp_norm(const SeqVec& v, PExponent p) {
    require_valid(v);
    const double scale = v.cwiseAbs().maxCoeff();
    if (p.is_infinite() || scale == 0.0)
        return scale;
    const double q = p.value();
    if (q == 2.0)
        return v.stableNorm();
    if (q == 1.0)
        return v.cwiseAbs().sum();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        acc += std::pow(std::abs(v(i)) / scale, q);
    return scale * std::pow(acc, 1.0 / q);
}

/// (KP x)_k = 2 x_k log(|x_k| / ||x||_2). Zero coordinates map to zero, KP(0) = 0.
inline SeqVec kp_map(const SeqVec& x) {
    require_valid(x);
    SeqVec out = SeqVec::Zero(x.size());
    const double t = x.norm();
    if (t == 0.0)
        return out;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double xk = x(k);
        if (xk != 0.0)
            out(k) = 2.0 * xk * std::log(std::abs(xk) / t);
    }
    return out;
}

/// ||KP x||_2 + ||x||_2, the quasinorm of l_f = Dom KP.
inline double lf_quasinorm(const SeqVec& x) { return kp_map(x).norm() + x.norm(); }

namespace detail {

constexpr double inv_e = 1.0 / std::numbers::e;

/// Solves s log s = -a on the small branch s in (0, 1/e], for a in (0, 1/e].
inline double small_branch_magnitude(double a) {
    if (a >= inv_e)
        return inv_e;
    return std::exp(boost::math::lambert_wm1(-a));
}

/// Solves s log s = -a on the large branch s in [1/e, 1), for a in (0, 1/e].
inline double large_branch_magnitude(double a) {
    if (a >= inv_e)
        return inv_e;
    return std::exp(boost::math::lambert_w0(-a));
}

} // namespace detail

/// Solves 2 t u log|u| = w for u on the branch |u| <= 1/e, i.e. the coordinate x = t u
/// of a solution of (KP x)_k = w when ||x||_2 = t. Returns nullopt when
/// |w| / (2t) > 1/e (no solution on this branch).
inline std::optional<double> kp_coordinate_branch(double w, double t) {
    if (w == 0.0)
        return 0.0;
    const double a = std::abs(w) / (2.0 * t);
    if (a > detail::inv_e * (1.0 + 1e-15))
        return std::nullopt;
    const double s = detail::small_branch_magnitude(std::min(a, detail::inv_e));
    return w > 0.0 ? -s : s;
}

struct KpInverseOutcome {
    SeqVec x;
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
    /// Coordinates placed on the large branch |u| > 1/e.
    std::vector<Eigen::Index> large_coordinates;
};

namespace detail {

/// Root of g(log t) = log ||u(t)||_2 over log t >= log_t_min, where g is evaluated by
/// the caller's profile. Scans upward for the first sign change, then solves on it.
template <class G>
std::optional<std::pair<double, int>> norm_match(G&& g, double log_t_min, double log_start,
                                                 int max_iter) {
    double lo = log_t_min, glo = g(lo);
    if (glo == 0.0)
        return std::pair{lo, 0};
    std::vector<double> sweep;
    for (int k = -6; k <= 2; ++k)
        sweep.push_back(log_start + k * std::numbers::ln2);
    for (double s = log_start + 3 * std::numbers::ln2; s < log_t_min + 200.0; s += std::numbers::ln2)
        sweep.push_back(s);
    for (double s : sweep) {
        if (s <= lo)
            continue;
        const double gs = g(s);
        if ((gs > 0.0) != (glo > 0.0)) {
            boost::uintmax_t its = static_cast<boost::uintmax_t>(max_iter);
            const auto r = boost::math::tools::toms748_solve(
                g, lo, s, glo, gs, boost::math::tools::eps_tolerance<double>(52), its);
            return std::pair{0.5 * (r.first + r.second), static_cast<int>(its)};
        }
        lo = s;
        glo = gs;
    }
    return std::nullopt;
}

} // namespace detail

/// Numerical section of KP. For a trial norm t, each coordinate equation
/// 2 x_k log(|x_k| / t) = w_k is solved on the branch |x_k| <= t/e, and the norm is
/// then matched by root-finding on log ||u(t)||_2 = 0 in log t (monotone decreasing on
/// that branch). When no such solution exists, some coordinates of x exceed t/e (at
/// most 7, since (8/e^2) > 1). The fallback puts on the large branch first each single
/// coordinate among the `large_branch_trials` largest |w_k|, then the j largest together
/// for j = 2..7. Never throws NoConvergence; see kp_inverse.
inline KpInverseOutcome try_kp_inverse(const SeqVec& omega, double tol, int max_iter,
                                       int large_branch_trials = 16) {
    require_valid(omega);
    const Eigen::Index n = omega.size();
    KpInverseOutcome out;
    out.x = SeqVec::Zero(n);
    const double wmax = omega.cwiseAbs().maxCoeff();
    if (wmax == 0.0) {
        out.converged = true;
        return out;
    }

    SeqVec u(n);
    std::vector<char> large(static_cast<std::size_t>(n), 0);
    auto profile = [&](double t) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const double a = std::min(std::abs(omega(k)) / (2.0 * t), detail::inv_e);
            const double s = a == 0.0 ? 0.0
                             : large[std::size_t(k)] ? detail::large_branch_magnitude(a)
                                                     : detail::small_branch_magnitude(a);
            u(k) = omega(k) > 0.0 ? -s : s;
        }
    };

    const double log_t_min = std::log(std::numbers::e * wmax / 2.0);
    const double log_start = std::log(omega.norm() / 2.0);
    KpInverseOutcome best = out;
    best.residual = std::numeric_limits<double>::infinity();

    auto attempt = [&](const std::vector<Eigen::Index>& set) {
        std::fill(large.begin(), large.end(), 0);
        for (Eigen::Index k : set)
            large[std::size_t(k)] = 1;
        auto g = [&](double log_t) {
            profile(std::exp(log_t));
            return std::log(u.norm());
        };
        const auto root = detail::norm_match(g, log_t_min, log_start, max_iter);
        const double t = std::exp(root ? root->first : log_t_min);
        profile(t);
        KpInverseOutcome r;
        r.x = t * u;
        r.residual = (kp_map(r.x) - omega).norm();
        r.converged = root.has_value() && r.residual <= tol;
        r.iterations = root ? root->second : 0;
        r.large_coordinates = set;
        if (r.converged || r.residual < best.residual)
            best = std::move(r);
        return best.converged;
    };

    if (attempt({}))
        return best;
    std::vector<Eigen::Index> order;
    for (Eigen::Index k = 0; k < n; ++k)
        if (omega(k) != 0.0)
            order.push_back(k);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(omega(a)) > std::abs(omega(b));
    });
    for (std::size_t i = 0; i < order.size() && int(i) < large_branch_trials; ++i)
        if (attempt({order[i]}))
            return best;
    for (std::size_t j = 2; j <= std::min<std::size_t>(7, order.size()); ++j)
        if (attempt({order.begin(), order.begin() + std::ptrdiff_t(j)}))
            return best;
    return best;
}

/// KP^{-1}: returns x with ||KP x - w||_2 <= tol, or throws NoConvergence.
inline SeqVec kp_inverse(const SeqVec& omega, double tol = 1e-9, int max_iter = 200) {
    auto res = try_kp_inverse(omega, tol, max_iter);
    if (!res.converged)
        throw NoConvergence("KP inverse did not meet tolerance", res.residual);
    return std::move(res.x);
}

struct FStarEstimate {
    double value;
    SeqVec argmin; ///< the x attaining `value` in ||w - KP x||_2 + ||x||_2
};

namespace detail {

inline double fstar_objective(const SeqVec& omega, const SeqVec& x) {
    return (omega - kp_map(x)).norm() + x.norm();
}

/// Gradient of ||w - KP x|| + ||x|| at x != 0, with the derivative of KP at zero
/// coordinates replaced by 0.
inline SeqVec fstar_gradient(const SeqVec& omega, const SeqVec& x) {
    const double t = x.norm();
    SeqVec r = omega - kp_map(x);
    const double rn = r.norm();
    SeqVec grad = x / t;
    if (rn == 0.0)
        return grad;
    // J = diag(2 log(|x_k|/t) + 2) - 2 x x^T / t^2 is symmetric
    SeqVec jr(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k)
        jr(k) = x(k) != 0.0 ? (2.0 * std::log(std::abs(x(k)) / t) + 2.0) * r(k) : 0.0;
    jr -= (2.0 * x.dot(r) / (t * t)) * x;
    grad -= jr / rn;
    return grad;
}

/// Backtracking gradient descent; returns the best point visited.
inline FStarEstimate fstar_descent(const SeqVec& omega, SeqVec x, int steps) {
    FStarEstimate best{fstar_objective(omega, x), x};
    double step = 0.5 * std::max(x.norm(), 1e-300);
    for (int it = 0; it < steps; ++it) {
        if (x.norm() == 0.0)
            break;
        const SeqVec grad = fstar_gradient(omega, x);
        const double gn = grad.norm();
        if (!(gn > 0.0) || !std::isfinite(gn))
            break;
        const double f0 = fstar_objective(omega, x);
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            SeqVec trial = x - (step / gn) * grad;
            const double ft = fstar_objective(omega, trial);
            if (ft < f0 - 1e-4 * step * gn) {
                x = std::move(trial);
                accepted = true;
                if (ft < best.value)
                    best = {ft, x};
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break;
    }
    return best;
}

} // namespace detail

/// Upper bound on the l_f* quasinorm inf_x ||w - KP x||_2 + ||x||_2.
///
/// Candidates: x = 0, the numerical section KP^{-1} w (when it converges), an optional
/// caller-supplied hint (e.g. a known preimage), and `budget` steps of local descent
/// from each. The descent path for a given start does not depend on `budget`, so the
/// result is nonincreasing in `budget`.
inline FStarEstimate lf_star_estimate(const SeqVec& omega, int budget,
                                      const std::optional<SeqVec>& hint = std::nullopt) {
    require_valid(omega);
    const Eigen::Index n = omega.size();
    FStarEstimate best{omega.norm(), SeqVec::Zero(n)};
    if (best.value == 0.0)
        return best;
    auto consider = [&](const FStarEstimate& c) {
        if (c.value < best.value)
            best = c;
    };

    // Leaving x = 0: KP of the profile -sign(w)|w| points along w.
    {
        SeqVec dir = -omega;
        dir /= dir.norm();
        const SeqVec kdir = kp_map(dir);
        FStarEstimate ray{best.value, SeqVec::Zero(n)};
        for (int j = -8; j <= 4; ++j) {
            const double s = omega.norm() * std::ldexp(1.0, j);
            const double f = (omega - s * kdir).norm() + s;
            if (f < ray.value)
                ray = {f, s * dir};
        }
        consider(ray);
        if (ray.argmin.norm() > 0.0)
            consider(detail::fstar_descent(omega, ray.argmin, budget));
    }

    auto inv = try_kp_inverse(omega, 1e-9 * std::max(1.0, omega.norm()), 200);
    if (inv.converged) {
        consider({detail::fstar_objective(omega, inv.x), inv.x});
        consider(detail::fstar_descent(omega, inv.x, budget));
    }
    if (hint) {
        require_same_dim(hint->size(), n);
        consider({detail::fstar_objective(omega, *hint), *hint});
        if (hint->norm() > 0.0)
            consider(detail::fstar_descent(omega, *hint, budget));
    }
    return best;
}

inline double lf_star_quasinorm_ub(const SeqVec& omega, int budget,
                                   const std::optional<SeqVec>& hint = std::nullopt) {
    return lf_star_estimate(omega, budget, hint).value;
}

} // namespace kpz2
