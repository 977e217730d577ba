#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

#include "kpz2/errors.hpp"

namespace kpz2 {

/// Finite truncation of a real sequence. Length is the truncation dimension.
using SeqVec = Eigen::VectorXd;
/// Dense n x n real linear map.
using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Exponent of the sequence space l_p, p in [1, inf].
class PExponent {
  public:
    explicit PExponent(double p) : p_(p) {
        if (!(p >= 1.0)) // rejects NaN as well
            throw ParameterOutOfRange("p-exponent must satisfy p >= 1");
    }

    static PExponent infinity() { return PExponent(std::numeric_limits<double>::infinity()); }

    double value() const noexcept { return p_; }
    bool is_infinite() const noexcept { return std::isinf(p_); }

    /// Hoelder conjugate p* = p / (p - 1).
    PExponent conjugate() const {
        if (p_ == 1.0)
            return infinity();
        if (is_infinite())
            return PExponent(1.0);
        return PExponent(p_ / (p_ - 1.0));
    }

    friend bool operator==(const PExponent&, const PExponent&) = default;

  private:
    double p_;
};

inline void require_valid(const SeqVec& v) {
    if (v.size() == 0)
        throw InvalidSequence("sequence must have dimension >= 1");
    if (!v.allFinite())
        throw InvalidSequence("sequence entries must be finite");
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b) {
    if (a != b)
        throw DimensionMismatch(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
}

/// e_k of dimension n (0-indexed).
inline SeqVec unit_vector(Eigen::Index n, Eigen::Index k) {
    SeqVec e = SeqVec::Zero(n);
    e(k) = 1.0;
    return e;
}

/// Unit-norm vector spread evenly over the first k coordinates of dimension n.
inline SeqVec spread(Eigen::Index n, Eigen::Index k) {
    if (k < 1 || k > n)
        throw ParameterOutOfRange("spread support must satisfy 1 <= k <= n");
    SeqVec s = SeqVec::Zero(n);
    s.head(k).setConstant(1.0 / std::sqrt(static_cast<double>(k)));
    return s;
}

inline SeqVec spread(Eigen::Index n) { return spread(n, n); }

} // namespace kpz2
