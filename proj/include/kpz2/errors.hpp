#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kpz2 {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
  public:
    DimensionMismatch(std::size_t lhs, std::size_t rhs)
        : Error("dimension mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}
};

class InvalidSequence : public Error {
  public:
    using Error::Error;
};

class ParameterOutOfRange : public Error {
  public:
    using Error::Error;
};

/// An iterative solver stopped without meeting its tolerance.
class NoConvergence : public Error {
  public:
    NoConvergence(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

class DisjointnessViolated : public Error {
  public:
    DisjointnessViolated(std::size_t first, std::size_t second, std::size_t coordinate)
        : Error("blocks " + std::to_string(first) + " and " + std::to_string(second) +
                " share coordinate " + std::to_string(coordinate)) {}
};

class PoleIndex : public Error {
  public:
    explicit PoleIndex(std::size_t index_sum)
        : Error("Hilbert matrix entry has a pole at index sum " + std::to_string(index_sum)) {}
};

/// The forward-difference table of a moment sequence cancelled too many digits.
class PrecisionLoss : public Error {
  public:
    PrecisionLoss(std::size_t n, double digits_lost)
        : Error("difference table of size " + std::to_string(n) + " loses " +
                std::to_string(digits_lost) + " significant digits"),
          n_(n), digits_lost_(digits_lost) {}

    std::size_t size() const noexcept { return n_; }
    double digits_lost() const noexcept { return digits_lost_; }

  private:
    std::size_t n_;
    double digits_lost_;
};

class SingularShift : public Error {
  public:
    using Error::Error;
};

} // namespace kpz2
