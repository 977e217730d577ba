#pragma once

// Finite-section eigenvalues and resolvent norms ||(lambda I - A)^{-1}||_p, and the
// resolvent-growth test of the Cesaro spectral disk |lambda - p*/2| <= p*/2.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "kpz2/normest.hpp"
#include "kpz2/zoo.hpp"

namespace kpz2 {

struct EigenResult {
    std::vector<Complex> values;
    bool symmetric = false; ///< solved by the self-adjoint solver
};

/// All eigenvalues of A. Exactly symmetric input (A == A^T bit for bit) goes to the
/// self-adjoint solver and yields real values in ascending order; other input goes to
/// the Hessenberg/Schur solver.
inline EigenResult eigenvalues(const Matrix& a, Eigen::Index cap = 2048) {
    if (a.rows() != a.cols())
        throw DimensionMismatch(std::size_t(a.rows()), std::size_t(a.cols()));
    if (a.rows() < 1)
        throw ParameterOutOfRange("dimension must be >= 1");
    if (a.rows() > cap)
        throw ParameterOutOfRange("eigenvalue computation capped at n = " + std::to_string(cap));
    if (!a.allFinite())
        throw InvalidSequence("matrix entries must be finite");
    EigenResult out;
    out.symmetric = (a.array() == a.transpose().array()).all();
    if (out.symmetric) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw NoConvergence("symmetric eigensolver failed", 0.0);
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.values.emplace_back(es.eigenvalues()(i), 0.0);
    } else {
        Eigen::EigenSolver<Matrix> es(a, false);
        if (es.info() != Eigen::Success)
            throw NoConvergence("nonsymmetric eigensolver failed", 0.0);
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.values.push_back(es.eigenvalues()(i));
    }
    return out;
}

struct Pivot {
    double log_abs = 0.0;
    int sign = 1;
};

/// LDL^T pivots of hilbert_matrix(n, lambda) from the Cauchy closed form
/// D_k = 1/(2k + lambda) * prod_{j<k} (k - j)^2 / ((k + j + lambda)^2), kept in log form so
/// that pivots far below the double range stay representable.
inline std::vector<Pivot> hilbert_pivots(Eigen::Index n, double lambda) {
    if (!std::isfinite(lambda))
        throw ParameterOutOfRange("Hilbert parameter must be finite");
    if (n < 1)
        throw ParameterOutOfRange("dimension must be >= 1");
    if (lambda <= 0.0 && lambda == std::floor(lambda) && -lambda <= 2.0 * double(n - 1))
        throw PoleIndex(static_cast<std::size_t>(-lambda));
    std::vector<Pivot> d;
    for (Eigen::Index k = 0; k < n; ++k) {
        Pivot pk;
        const double diag = double(2 * k) + lambda;
        pk.log_abs = -std::log(std::abs(diag));
        pk.sign = diag > 0 ? 1 : -1;
        for (Eigen::Index j = 0; j < k; ++j)
            pk.log_abs += 2.0 * (std::log(double(k - j)) - std::log(std::abs(double(k + j) + lambda)));
        d.push_back(pk);
    }
    return d;
}

struct Inertia {
    Eigen::Index positive = 0;
    Eigen::Index negative = 0;
};

/// Eigenvalue sign counts of hilbert_matrix(n, lambda) by Sylvester's law of inertia
/// applied to the closed-form pivots. Exact where the solver only resolves eigenvalues
/// down to about eps * lambda_max.
inline Inertia hilbert_inertia(Eigen::Index n, double lambda) {
    Inertia in;
    for (const auto& pk : hilbert_pivots(n, lambda))
        (pk.sign > 0 ? in.positive : in.negative) += 1;
    return in;
}

struct ResolventOptions {
    OpNormOptions norm;
    /// lambda I - A counts as singular when its reciprocal condition estimate (or
    /// sigma_min / sigma_max for p = 2) falls below this factor times n * eps.
    double singular_factor = 1.0;
};

/// ||(lambda I - A)^{-1}||_p. p = 2 uses 1 / sigma_min; other p run the p-norm power
/// method on the explicit inverse, in real arithmetic when lambda is real. Throws
/// SingularShift when lambda I - A is numerically singular.
inline double resolvent_norm(const Matrix& a, Complex lambda, PExponent p,
                             const ResolventOptions& opt = {}) {
    const Eigen::Index n = a.rows();
    if (n != a.cols())
        throw DimensionMismatch(std::size_t(n), std::size_t(a.cols()));
    const double thresh = opt.singular_factor * double(n) * std::numeric_limits<double>::epsilon();
    auto singular = [&]() {
        return SingularShift("lambda = (" + std::to_string(lambda.real()) + ", " +
                             std::to_string(lambda.imag()) + ") is numerically an eigenvalue");
    };
    const bool real = lambda.imag() == 0.0;
    if (!p.is_infinite() && p.value() == 2.0) {
        Eigen::VectorXd s;
        if (real) {
            const Matrix m = lambda.real() * Matrix::Identity(n, n) - a;
            s = Eigen::BDCSVD<Matrix>(m).singularValues();
        } else {
            const ComplexMatrix m =
                lambda * ComplexMatrix::Identity(n, n) - a.cast<Complex>();
            s = Eigen::BDCSVD<ComplexMatrix>(m).singularValues();
        }
        const double smin = s(n - 1), smax = s(0);
        if (!(smin > thresh * smax))
            throw singular();
        return 1.0 / smin;
    }
    if (real) {
        const Matrix m = lambda.real() * Matrix::Identity(n, n) - a;
        Eigen::PartialPivLU<Matrix> lu(m);
        if (!(lu.rcond() > thresh))
            throw singular();
        return opnorm_p(Matrix(lu.inverse()), p, opt.norm).value;
    }
    const ComplexMatrix m = lambda * ComplexMatrix::Identity(n, n) - a.cast<Complex>();
    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    if (!(lu.rcond() > thresh))
        throw singular();
    return opnorm_p(ComplexMatrix(lu.inverse()), p, opt.norm).value;
}

struct SpectralGrid {
    std::vector<Complex> grid;
    std::vector<double> values; ///< +infinity marks a numerically singular shift
    PExponent p{2.0};
    Eigen::Index n = 0;
};

inline SpectralGrid resolvent_grid(const Matrix& a, PExponent p, const std::vector<Complex>& grid,
                                   const ResolventOptions& opt = {}) {
    if (grid.empty())
        throw InvalidSequence("resolvent grid must be nonempty");
    SpectralGrid out;
    out.grid = grid;
    out.p = p;
    out.n = a.rows();
    for (const Complex& z : grid) {
        try {
            out.values.push_back(resolvent_norm(a, z, p, opt));
        } catch (const SingularShift&) {
            out.values.push_back(std::numeric_limits<double>::infinity());
        }
    }
    return out;
}

/// One row per grid point: re,im,value (value "inf" when singular).
inline void write_csv(std::ostream& os, const SpectralGrid& g) {
    os << "lambda_re,lambda_im,value\n";
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < g.grid.size(); ++i) {
        os << g.grid[i].real() << ',' << g.grid[i].imag() << ',';
        if (std::isinf(g.values[i]))
            os << "inf";
        else
            os << g.values[i];
        os << '\n';
    }
    os.precision(old);
}

/// lambda = c + ratio * c * e^{i theta} with c = p*/2.
inline Complex disk_point(PExponent p, double ratio, double theta) {
    const double c = p.conjugate().value() / 2.0;
    return c + ratio * c * std::polar(1.0, theta);
}

/// Default sample points at the given radius ratio: angles pi/2 and 3 pi/4, which keep
/// clear of the real eigenvalues 1/k of every section.
inline std::vector<Complex> default_disk_points(PExponent p, double ratio) {
    return {disk_point(p, ratio, std::numbers::pi / 2.0),
            disk_point(p, ratio, 3.0 * std::numbers::pi / 4.0)};
}

struct DiskPointResult {
    Complex lambda;
    bool inside = false;  ///< |lambda - c| < c
    NormTrend trend;
    bool singular = false; ///< some section has lambda as an eigenvalue
    bool pass = false;
};

struct DiskCheckReport {
    PExponent p{2.0};
    double center = 0.0;
    double radius = 0.0;
    std::vector<DiskPointResult> points;
    bool pass = false;
};

/// Classifies resolvent-norm trends of Cesaro sections: interior points must grow (a
/// growth class, or growth whose law the margin rule leaves open, or a singular section
/// where the resolvent norm is infinite), exterior points must be bounded.
inline DiskCheckReport cesaro_disk_check(PExponent p, const std::vector<Eigen::Index>& sizes,
                                         const std::vector<Complex>& inside_pts,
                                         const std::vector<Complex>& outside_pts,
                                         const ResolventOptions& opt = {},
                                         const TrendOptions& trend_opt = {}) {
    if (p.is_infinite() || p.value() <= 1.0)
        throw ParameterOutOfRange("disk check requires 1 < p < inf");
    DiskCheckReport rep;
    rep.p = p;
    rep.center = p.conjugate().value() / 2.0;
    rep.radius = rep.center;
    std::vector<Complex> pts = inside_pts;
    pts.insert(pts.end(), outside_pts.begin(), outside_pts.end());
    std::vector<std::vector<double>> vals(pts.size());
    std::vector<double> dsizes;
    for (auto n : sizes) {
        dsizes.push_back(double(n));
        const Matrix c = cesaro(n);
        const auto g = resolvent_grid(c, p, pts, opt);
        for (std::size_t i = 0; i < pts.size(); ++i)
            vals[i].push_back(g.values[i]);
    }
    rep.pass = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        DiskPointResult r;
        r.lambda = pts[i];
        r.inside = std::abs(pts[i] - rep.center) < rep.radius;
        std::vector<double> finite = vals[i];
        for (double& v : finite)
            if (std::isinf(v)) {
                r.singular = true;
                v = std::numeric_limits<double>::quiet_NaN();
            }
        r.trend = growth_trend(dsizes, finite, trend_opt);
        r.trend.values = vals[i];
        if (r.inside)
            r.pass = r.singular || r.trend.growing;
        else
            r.pass = !r.singular && r.trend.fit == GrowthClass::bounded;
        rep.pass = rep.pass && r.pass;
        rep.points.push_back(std::move(r));
    }
    return rep;
}

} // namespace kpz2
