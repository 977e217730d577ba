#pragma once

// 2x2 block operators (alpha beta; delta gamma) on truncated Z_2, acting as
// (w, x) -> (alpha w + beta x, delta w + gamma x).

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "kpz2/z2core.hpp"

namespace kpz2 {

class BlockOperator {
  public:
    BlockOperator(Matrix alpha, Matrix beta, Matrix delta, Matrix gamma)
        : alpha_(std::move(alpha)), beta_(std::move(beta)), delta_(std::move(delta)),
          gamma_(std::move(gamma)) {
        const Eigen::Index n = alpha_.rows();
        if (n < 1)
            throw ParameterOutOfRange("block operator dimension must be >= 1");
        for (const Matrix* m : {&alpha_, &beta_, &delta_, &gamma_}) {
            require_same_dim(m->rows(), n);
            require_same_dim(m->cols(), n);
        }
    }

    static BlockOperator zero(Eigen::Index n) {
        return {Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
    }

    static BlockOperator identity(Eigen::Index n) {
        return {Matrix::Identity(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n),
                Matrix::Identity(n, n)};
    }

    Eigen::Index dim() const noexcept { return alpha_.rows(); }
    const Matrix& alpha() const noexcept { return alpha_; }
    const Matrix& beta() const noexcept { return beta_; }
    const Matrix& delta() const noexcept { return delta_; }
    const Matrix& gamma() const noexcept { return gamma_; }

    Z2Vec apply(const Z2Vec& z) const {
        require_same_dim(z.dim(), dim());
        return {alpha_ * z.omega + beta_ * z.x, delta_ * z.omega + gamma_ * z.x};
    }

    /// Block product (*this) * rhs, i.e. apply rhs first.
    BlockOperator compose(const BlockOperator& rhs) const {
        require_same_dim(dim(), rhs.dim());
        return {alpha_ * rhs.alpha_ + beta_ * rhs.delta_, alpha_ * rhs.beta_ + beta_ * rhs.gamma_,
                delta_ * rhs.alpha_ + gamma_ * rhs.delta_, delta_ * rhs.beta_ + gamma_ * rhs.gamma_};
    }

    /// Adjoint for the alternating form: T+ = (gamma^T  -beta^T; -delta^T  alpha^T).
    BlockOperator involution_plus() const {
        return {gamma_.transpose(), -beta_.transpose(), -delta_.transpose(), alpha_.transpose()};
    }

    BlockOperator& operator+=(const BlockOperator& o) {
        require_same_dim(dim(), o.dim());
        alpha_ += o.alpha_;
        beta_ += o.beta_;
        delta_ += o.delta_;
        gamma_ += o.gamma_;
        return *this;
    }
    friend BlockOperator operator+(BlockOperator a, const BlockOperator& b) { return a += b; }
    friend BlockOperator operator*(double s, const BlockOperator& t) {
        return {s * t.alpha_, s * t.beta_, s * t.delta_, s * t.gamma_};
    }

    /// Largest absolute entry difference over all four blocks.
    double max_abs_diff(const BlockOperator& o) const {
        require_same_dim(dim(), o.dim());
        return std::max({(alpha_ - o.alpha_).cwiseAbs().maxCoeff(),
                         (beta_ - o.beta_).cwiseAbs().maxCoeff(),
                         (delta_ - o.delta_).cwiseAbs().maxCoeff(),
                         (gamma_ - o.gamma_).cwiseAbs().maxCoeff()});
    }

    friend bool operator==(const BlockOperator& a, const BlockOperator& b) {
        return a.dim() == b.dim() && a.alpha_ == b.alpha_ && a.beta_ == b.beta_ &&
               a.delta_ == b.delta_ && a.gamma_ == b.gamma_;
    }

  private:
    Matrix alpha_, beta_, delta_, gamma_;
};

inline Z2Vec apply(const BlockOperator& t, const Z2Vec& z) { return t.apply(z); }
inline BlockOperator compose(const BlockOperator& s, const BlockOperator& t) {
    return s.compose(t);
}
inline BlockOperator involution_plus(const BlockOperator& t) { return t.involution_plus(); }

/// f (x) v : z -> <f, z> v.
inline BlockOperator rank_one(const Z2Functional& f, const Z2Vec& v) {
    require_same_dim(f.dim(), v.dim());
    return {v.omega * f.psi.transpose(), v.omega * f.phi.transpose(), v.x * f.psi.transpose(),
            v.x * f.phi.transpose()};
}

inline BlockOperator nuclear_sum(const std::vector<std::pair<Z2Functional, Z2Vec>>& terms) {
    if (terms.empty())
        throw InvalidSequence("nuclear sum needs at least one term");
    BlockOperator out = BlockOperator::zero(terms.front().second.dim());
    for (const auto& [f, v] : terms)
        out += rank_one(f, v);
    return out;
}

/// Coordinates in the basis (e_1, 0), (0, e_1), (e_2, 0), ...: w_{2k} = omega_k,
/// w_{2k+1} = x_k (0-indexed).
inline SeqVec interleave(const Z2Vec& z) {
    const Eigen::Index n = z.dim();
    SeqVec w(2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        w(2 * k) = z.omega(k);
        w(2 * k + 1) = z.x(k);
    }
    return w;
}

inline Z2Vec deinterleave(const SeqVec& w) {
    if (w.size() == 0 || w.size() % 2 != 0)
        throw InvalidSequence("interleaved sequence must have even positive length");
    const Eigen::Index n = w.size() / 2;
    Z2Vec z = Z2Vec::zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        z.omega(k) = w(2 * k);
        z.x(k) = w(2 * k + 1);
    }
    return z;
}

/// Block-norm tests use the largest absolute entry of delta (resp. beta).
inline bool is_upper_triangular(const BlockOperator& t, double tol = 0.0) {
    return t.delta().cwiseAbs().maxCoeff() <= tol;
}

inline bool is_lower_triangular(const BlockOperator& t, double tol = 0.0) {
    return t.beta().cwiseAbs().maxCoeff() <= tol;
}

/// T = (alpha beta; 0 gamma) + (0 0; delta 0).
inline std::pair<BlockOperator, BlockOperator> split_upper(const BlockOperator& t) {
    const Eigen::Index n = t.dim();
    const Matrix z = Matrix::Zero(n, n);
    return {BlockOperator(t.alpha(), t.beta(), z, t.gamma()), BlockOperator(z, z, t.delta(), z)};
}

/// T = (alpha 0; delta gamma) + (0 beta; 0 0).
inline std::pair<BlockOperator, BlockOperator> split_lower(const BlockOperator& t) {
    const Eigen::Index n = t.dim();
    const Matrix z = Matrix::Zero(n, n);
    return {BlockOperator(t.alpha(), z, t.delta(), t.gamma()), BlockOperator(z, t.beta(), z, z)};
}

/// tau_alpha = (alpha 0; 0 alpha).
inline BlockOperator tau(const Matrix& alpha) {
    const Matrix z = Matrix::Zero(alpha.rows(), alpha.cols());
    return {alpha, z, z, alpha};
}

/// ip = (0 I; 0 0): (w, x) -> (x, 0).
inline BlockOperator ip(Eigen::Index n) {
    const Matrix z = Matrix::Zero(n, n);
    return {z, Matrix::Identity(n, n), z, z};
}

inline BlockOperator scalar_matrix(double a, double b, double d, double g, Eigen::Index n) {
    if (n < 1)
        throw ParameterOutOfRange("dimension must be >= 1");
    const Matrix id = Matrix::Identity(n, n);
    return {a * id, b * id, d * id, g * id};
}

/// (alpha beta; 0 alpha).
inline BlockOperator calderon_upper(const Matrix& alpha, const Matrix& beta) {
    return {alpha, beta, Matrix::Zero(alpha.rows(), alpha.cols()), alpha};
}

/// Kalton's block operator T_U = (u KPu; 0 u) with u e_k = u_k and KPu e_k = KP(u_k).
/// Columns past the number of blocks are zero.
inline BlockOperator block_operator_TU(const std::vector<SeqVec>& blocks) {
    if (blocks.empty())
        throw InvalidSequence("T_U needs at least one block");
    const Eigen::Index n = blocks.front().size();
    if (static_cast<Eigen::Index>(blocks.size()) > n)
        throw ParameterOutOfRange("T_U needs at most n blocks");
    std::vector<std::ptrdiff_t> owner(static_cast<std::size_t>(n), -1);
    Matrix u = Matrix::Zero(n, n);
    Matrix kpu = Matrix::Zero(n, n);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const SeqVec& blk = blocks[b];
        require_same_dim(blk.size(), n);
        require_valid(blk);
        if (blk.cwiseAbs().maxCoeff() == 0.0)
            throw ParameterOutOfRange("T_U blocks must be nonzero");
        for (Eigen::Index k = 0; k < n; ++k) {
            if (blk(k) == 0.0)
                continue;
            auto& o = owner[static_cast<std::size_t>(k)];
            if (o >= 0)
                throw DisjointnessViolated(static_cast<std::size_t>(o), b,
                                           static_cast<std::size_t>(k));
            o = static_cast<std::ptrdiff_t>(b);
        }
        const auto col = static_cast<Eigen::Index>(b);
        u.col(col) = blk;
        kpu.col(col) = kp_map(blk);
    }
    return {u, kpu, Matrix::Zero(n, n), u};
}

} // namespace kpz2
