#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "kpz2/seqspace.hpp"
#include "property.hpp"

using namespace kpz2;

namespace {

SeqVec vec(std::initializer_list<double> v) {
    SeqVec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

} // namespace

TEST(PExponent, RejectsBelowOneAndNaN) {
    EXPECT_THROW(PExponent(0.5), ParameterOutOfRange);
    EXPECT_THROW(PExponent(std::nan("")), ParameterOutOfRange);
    EXPECT_NO_THROW(PExponent(1.0));
    EXPECT_TRUE(PExponent::infinity().is_infinite());
}

TEST(PExponent, Conjugate) {
    EXPECT_DOUBLE_EQ(PExponent(2.0).conjugate().value(), 2.0);
    EXPECT_DOUBLE_EQ(PExponent(4.0).conjugate().value(), 4.0 / 3.0);
    EXPECT_TRUE(PExponent(1.0).conjugate().is_infinite());
    EXPECT_DOUBLE_EQ(PExponent::infinity().conjugate().value(), 1.0);
}

TEST(LpNorm, Examples) {
    EXPECT_DOUBLE_EQ(lp_norm(vec({1, 0, 0}), PExponent(2)), 1.0);
    EXPECT_DOUBLE_EQ(lp_norm(vec({3, 4}), PExponent(2)), 5.0);
    EXPECT_DOUBLE_EQ(lp_norm(vec({1, 1, 1, 1}), PExponent(1)), 4.0);
    EXPECT_DOUBLE_EQ(lp_norm(vec({1, -7, 2}), PExponent::infinity()), 7.0);
    EXPECT_DOUBLE_EQ(lp_norm(vec({0, 0}), PExponent(3)), 0.0);
}

TEST(LpNorm, MatchesDirectSumAndSurvivesExtremeScales) {
    const SeqVec v = vec({1, -2, 3, 0.5});
    for (double p : {1.5, 3.0, 7.0}) {
        double s = 0;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            s += std::pow(std::abs(v(i)), p);
        EXPECT_NEAR(lp_norm(v, PExponent(p)), std::pow(s, 1 / p), 1e-13);
        // the scaled sum neither overflows nor underflows
        EXPECT_NEAR(lp_norm(1e300 * v, PExponent(p)) / 1e300, std::pow(s, 1 / p), 1e-12);
        EXPECT_NEAR(lp_norm(1e-300 * v, PExponent(p)) / 1e-300, std::pow(s, 1 / p), 1e-12);
    }
}

TEST(LpNorm, RejectsInvalidSequences) {
    EXPECT_THROW(lp_norm(SeqVec(0), PExponent(2)), InvalidSequence);
    EXPECT_THROW(lp_norm(vec({1, std::nan("")}), PExponent(2)), InvalidSequence);
    EXPECT_THROW(lp_norm(vec({1, INFINITY}), PExponent(2)), InvalidSequence);
}

TEST(KpMap, BasisVectorMapsToZero) {
    EXPECT_EQ(kp_map(vec({1, 0, 0, 0})), SeqVec::Zero(4));
}

TEST(KpMap, SpreadFour) {
    const SeqVec s = spread(4);
    const SeqVec k = kp_map(s);
    for (Eigen::Index i = 0; i < 4; ++i)
        EXPECT_NEAR(k(i), -std::log(2.0), 1e-15);
    EXPECT_NEAR((kp_map(2.0 * s) - 2.0 * k).norm(), 0.0, 1e-14);
}

TEST(KpMap, ZeroCoordinatesAndZeroVector) {
    EXPECT_EQ(kp_map(SeqVec::Zero(5)), SeqVec::Zero(5));
    const SeqVec k = kp_map(vec({0.6, 0, 0.8}));
    EXPECT_EQ(k(1), 0.0);
    EXPECT_NEAR(k(0), 2 * 0.6 * std::log(0.6), 1e-15);
}

TEST(KpMap, SpreadNormIsLogN) {
    for (Eigen::Index n : {2, 16, 1000})
        EXPECT_NEAR(kp_map(spread(n)).norm(), std::log(double(n)), 1e-12);
}

TEST(KpMapProperty, Homogeneity) {
    Rng rng(101);
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Index n = prop::dim(rng, 1, 64);
        const SeqVec x = prop::vector(rng, n);
        const double lambda = prop::scalar(rng);
        const double err = (kp_map(lambda * x) - lambda * kp_map(x)).norm();
        ASSERT_LE(err, 1e-10 * (1 + std::abs(lambda)) * x.norm()) << prop::case_label(i, 101);
    }
}

TEST(KpMapProperty, SelfDualityDefect) {
    Rng rng(102);
    for (int i = 0; i < 2000; ++i) {
        const Eigen::Index n = prop::dim(rng, 1, 128);
        const SeqVec x = prop::vector(rng, n), y = prop::vector(rng, n);
        const double lhs = std::abs(kp_map(x).dot(y) - x.dot(kp_map(y)));
        ASSERT_LE(lhs, 2 * x.norm() * y.norm() + 1e-9) << prop::case_label(i, 102);
    }
}

TEST(KpMapProperty, QuasilinearityConstantIsFinite) {
    Rng rng(103);
    double c = 0;
    for (int i = 0; i < 500; ++i) {
        const SeqVec x = rng.gaussian(64), z = rng.gaussian(64);
        const double d = (kp_map(x + z) - kp_map(x) - kp_map(z)).norm();
        c = std::max(c, d / (x.norm() + z.norm()));
    }
    RecordProperty("C_emp_dim64", std::to_string(c));
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_GT(c, 0.0);
    // the additivity defect of x log|x| is at most 2 log 2 per unit norm
    EXPECT_LE(c, 2.0 * std::log(2.0) * 2.0);
}

TEST(Branches, SolveScalarEquation) {
    // s log s = -a has one root in (0, 1/e] and one in [1/e, 1)
    for (double a : {1e-300, 1e-100, 1e-20, 1e-8, 1e-3, 0.05, 0.2, 0.3, 0.36, 0.3678}) {
        const double s = detail::small_branch_magnitude(a);
        const double l = detail::large_branch_magnitude(a);
        EXPECT_LE(s, 1 / std::numbers::e) << a;
        EXPECT_GE(l, 1 / std::numbers::e) << a;
        EXPECT_LE(l, 1.0) << a;
        EXPECT_NEAR(s * std::log(s), -a, 1e-13 * a) << a;
        if (a >= 1e-8) // below this 1 - a is not resolved in double
            EXPECT_NEAR(l * std::log(l), -a, 1e-8 * a) << a;
    }
    EXPECT_DOUBLE_EQ(detail::small_branch_magnitude(1.0 / std::numbers::e), 1.0 / std::numbers::e);
}

TEST(CoordinateBranch, SolvesSignedEquation) {
    for (double w : {-2.0, -0.1, 0.3, 1.5}) {
        const double t = 3.0;
        const auto u = kp_coordinate_branch(w, t);
        ASSERT_TRUE(u.has_value());
        EXPECT_LE(std::abs(*u), 1 / std::numbers::e + 1e-15);
        EXPECT_NEAR(2 * t * *u * std::log(std::abs(*u)), w, 1e-12);
    }
    EXPECT_EQ(kp_coordinate_branch(0.0, 1.0), 0.0);
    EXPECT_FALSE(kp_coordinate_branch(1.0, 1.0).has_value()); // |w| / 2t > 1/e
}

TEST(KpInverse, ZeroMapsToZero) { EXPECT_EQ(kp_inverse(SeqVec::Zero(6)), SeqVec::Zero(6)); }

TEST(KpInverse, RoundTripSpreadEight) {
    const SeqVec s = spread(8);
    const SeqVec x = kp_inverse(kp_map(s), 1e-12);
    EXPECT_LE((kp_map(x) - kp_map(s)).norm(), 1e-12);
    EXPECT_NEAR((x - s).norm(), 0.0, 1e-9);
}

TEST(KpInverse, RoundTripRandomUnitVectors) {
    Rng rng(104);
    for (int i = 0; i < 100; ++i) {
        const SeqVec v = rng.unit_gaussian(64);
        const SeqVec w = kp_map(v);
        const auto res = try_kp_inverse(w, 1e-9, 200);
        ASSERT_TRUE(res.converged) << i << " residual " << res.residual;
        EXPECT_LE((kp_map(res.x) - w).norm(), 1e-9);
    }
}

TEST(KpInverse, SpreadsNeedSeveralLargeCoordinates) {
    for (Eigen::Index k : {2, 3, 4, 7}) {
        const SeqVec v = spread(10, k);
        const auto res = try_kp_inverse(kp_map(v), 1e-12, 200);
        ASSERT_TRUE(res.converged) << k;
        EXPECT_FALSE(res.large_coordinates.empty()) << k;
        EXPECT_LE((kp_map(res.x) - kp_map(v)).norm(), 1e-12) << k;
    }
}

TEST(KpInverse, UnreachableTargetThrows) {
    // a single nonzero coordinate is never in the range of KP
    try {
        kp_inverse(SeqVec::Unit(5, 2));
        FAIL() << "expected NoConvergence";
    } catch (const NoConvergence& e) {
        EXPECT_GT(e.residual(), 0.1);
    }
}

TEST(KpInverseProperty, ResidualBoundWheneverConverged) {
    Rng rng(105);
    int converged = 0;
    for (int i = 0; i < 300; ++i) {
        const Eigen::Index n = prop::dim(rng, 2, 200);
        const SeqVec w = prop::vector(rng, n);
        const double tol = 1e-9 * std::max(1.0, w.norm());
        const auto res = try_kp_inverse(w, tol, 200);
        if (res.converged) {
            ++converged;
            ASSERT_LE((kp_map(res.x) - w).norm(), tol) << prop::case_label(i, 105);
        }
    }
    RecordProperty("converged_of_300", converged);
}

TEST(LfQuasinorm, Examples) {
    EXPECT_DOUBLE_EQ(lf_quasinorm(SeqVec::Unit(3, 0)), 1.0);
    EXPECT_DOUBLE_EQ(lf_quasinorm(SeqVec::Zero(3)), 0.0);
    for (Eigen::Index n : {4, 100})
        EXPECT_NEAR(lf_quasinorm(spread(n)), 1 + std::log(double(n)), 1e-12);
}

TEST(LfQuasinormProperty, DominatesL2) {
    Rng rng(106);
    for (int i = 0; i < 500; ++i) {
        const SeqVec x = prop::vector(rng, prop::dim(rng, 1, 50));
        ASSERT_GE(lf_quasinorm(x), x.norm());
    }
}

TEST(LfStar, Examples) {
    EXPECT_EQ(lf_star_quasinorm_ub(SeqVec::Zero(4), 10), 0.0);
    // KP is not injective, so the preimage found by KP^{-1} may be longer than v; with v
    // as a hint the bound ||v|| is attained
    const SeqVec v = 1e-3 * spread(32, 5);
    EXPECT_LE(lf_star_quasinorm_ub(kp_map(v), 20, v), v.norm() * (1 + 1e-12));
    EXPECT_LE(lf_star_quasinorm_ub(kp_map(spread(32, 16)), 20), 1.0 + 1e-12);
}

TEST(LfStar, FirstBasisVectorAgainstLineSearch) {
    // on the line x = s e_1: objective ||e_1 - KP(s e_1)|| + |s| = 1 + |s|
    const SeqVec w = SeqVec::Unit(16, 0);
    double brute = INFINITY;
    for (int i = -1000; i <= 1000; ++i) {
        const double s = i / 1000.0;
        brute = std::min(brute, (w - kp_map(s * w)).norm() + std::abs(s));
    }
    const double ub = lf_star_quasinorm_ub(w, 50);
    EXPECT_LE(ub, 1.0);
    EXPECT_LE(ub, brute + 1e-12);
}

TEST(LfStarProperty, BoundedByL2AndMonotoneInBudget) {
    Rng rng(107);
    for (int i = 0; i < 40; ++i) {
        const Eigen::Index n = prop::dim(rng, 2, 64);
        const SeqVec w = rng.below(2) ? prop::vector(rng, n) : kp_map(rng.gaussian(n));
        double prev = INFINITY;
        for (int budget : {0, 5, 20, 80}) {
            const double v = lf_star_quasinorm_ub(w, budget);
            ASSERT_LE(v, w.norm()) << prop::case_label(i, 107);
            ASSERT_LE(v, prev) << prop::case_label(i, 107);
            prev = v;
        }
    }
}
