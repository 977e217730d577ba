#pragma once

// Truncated Z_2: pairs (w, x), the quasinorm ||w - KP x|| + ||x||, the duality pairing,
// the alternating form and the maps of the two exact sequences.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "kpz2/seqspace.hpp"

namespace kpz2 {

struct Z2Vec {
    SeqVec omega;
    SeqVec x;

    Z2Vec() = default;
    Z2Vec(SeqVec w, SeqVec v) : omega(std::move(w)), x(std::move(v)) {
        require_same_dim(omega.size(), x.size());
    }

    static Z2Vec zero(Eigen::Index n) { return {SeqVec::Zero(n), SeqVec::Zero(n)}; }

    Eigen::Index dim() const noexcept { return x.size(); }

    Z2Vec& operator+=(const Z2Vec& o) {
        require_same_dim(dim(), o.dim());
        omega += o.omega;
        x += o.x;
        return *this;
    }
    friend Z2Vec operator+(Z2Vec a, const Z2Vec& b) { return a += b; }
    friend Z2Vec operator-(const Z2Vec& a, const Z2Vec& b) {
        require_same_dim(a.dim(), b.dim());
        return {a.omega - b.omega, a.x - b.x};
    }
    friend Z2Vec operator*(double s, const Z2Vec& z) { return {s * z.omega, s * z.x}; }
};

/// Functional on Z_2: phi pairs with x, psi pairs with omega.
struct Z2Functional {
    SeqVec phi;
    SeqVec psi;

    Z2Functional() = default;
    Z2Functional(SeqVec f, SeqVec s) : phi(std::move(f)), psi(std::move(s)) {
        require_same_dim(phi.size(), psi.size());
    }

    Eigen::Index dim() const noexcept { return phi.size(); }
};

inline void require_valid(const Z2Vec& z) {
    require_same_dim(z.omega.size(), z.x.size());
    require_valid(z.omega);
    require_valid(z.x);
}

inline double z2_quasinorm(const Z2Vec& z) {
    require_valid(z);
    return (z.omega - kp_map(z.x)).norm() + z.x.norm();
}

/// ||x - KP^{-1} w||_f + ||w||_f*, with ||w||_f* replaced by its upper estimate.
/// Throws NoConvergence when KP^{-1} w cannot be computed.
inline double z2_quasinorm_jq(const Z2Vec& z, int budget) {
    require_valid(z);
    const SeqVec section = kp_inverse(z.omega);
    return lf_quasinorm(z.x - section) + lf_star_quasinorm_ub(z.omega, budget, section);
}

inline double pairing(const Z2Functional& f, const Z2Vec& z) {
    require_same_dim(f.dim(), z.dim());
    return f.phi.dot(z.x) + z.omega.dot(f.psi);
}

/// Omega(z1, z2) = <w1, x2> - <w2, x1>.
inline double omega_form(const Z2Vec& z1, const Z2Vec& z2) {
    require_same_dim(z1.dim(), z2.dim());
    return z1.omega.dot(z2.x) - z2.omega.dot(z1.x);
}

/// The functional w -> Omega(z, w).
inline Z2Functional d_map(const Z2Vec& z) { return {z.omega, -z.x}; }

inline Z2Vec inclusion_i(const SeqVec& y) { return {y, SeqVec::Zero(y.size())}; }
inline SeqVec quotient_p(const Z2Vec& z) { return z.x; }
inline Z2Vec inclusion_j(const SeqVec& x) { return {SeqVec::Zero(x.size()), x}; }
inline SeqVec quotient_q(const Z2Vec& z) { return z.omega; }

/// Bounded lifting for p: y -> (KP y, y).
inline Z2Vec lift_Lp(const SeqVec& y) { return {kp_map(y), y}; }

/// Homogeneous lifting for q: w -> (w, KP^{-1} w). Throws NoConvergence.
inline Z2Vec lift_Lq(const SeqVec& omega, double tol = 1e-9) {
    return {omega, kp_inverse(omega, tol)};
}

struct IsotropyResult {
    bool isotropic;
    double max_abs_form;
    std::size_t first;
    std::size_t second;
};

/// Tests Omega(b_i, b_j) = 0 over all pairs, reporting the pair with largest |Omega|.
inline IsotropyResult is_isotropic(const std::vector<Z2Vec>& basis, double tol) {
    if (basis.empty())
        throw InvalidSequence("isotropy test needs a nonempty basis");
    IsotropyResult res{true, 0.0, 0, 0};
    for (std::size_t i = 0; i < basis.size(); ++i) {
        require_same_dim(basis[i].dim(), basis[0].dim());
        for (std::size_t j = i + 1; j < basis.size(); ++j) {
            const double v = std::abs(omega_form(basis[i], basis[j]));
            if (v > res.max_abs_form)
                res = {true, v, i, j};
        }
    }
    res.isotropic = res.max_abs_form <= tol;
    return res;
}

} // namespace kpz2
