#pragma once

// Operator-spec mini-language: name[:param,param,...].
//
//   identity                      cesaro                  hilbert:LAMBDA
//   hausdorff:holder:ALPHA        hausdorff:euler:A       hausdorff:gamma:A,ALPHA
//   hausdorff:gen-cesaro:A,ALPHA  shift:right|left        perm (random signed permutation)
//   diag:ones | diag:gap:C | diag:loggap:C                tau-perm
//   tau:INNER                     scalar:A,B,D,G          rank1 | rank1:alpha0
//   TU:normalized-blocks:L        ip                      calderon:INNER+INNER
//
// INNER is any plain-matrix spec. Plain-matrix specs used where a block operator is
// needed are lifted to tau(A). Randomized operators draw from a stream derived from the
// experiment seed and the size.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kpz2/zoo.hpp"

namespace kpz2 {

class SpecError : public Error {
  public:
    using Error::Error;
};

struct OpSpec {
    std::string text;
    /// Set for plain n x n matrices.
    std::function<Matrix(Eigen::Index)> matrix;
    std::function<BlockOperator(Eigen::Index)> block;

    bool is_matrix() const { return static_cast<bool>(matrix); }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

inline double parse_number(const std::string& s, const std::string& spec) {
    if (s.empty())
        throw SpecError("missing number in operator spec '" + spec + "'");
    std::size_t pos = 0;
    double v = 0.0;
    try {
        // a/b fractions are accepted, e.g. 4/3
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            const double num = std::stod(s.substr(0, slash), &pos);
            if (pos != slash)
                throw SpecError("");
            std::size_t pos2 = 0;
            const std::string den_s = s.substr(slash + 1);
            const double den = std::stod(den_s, &pos2);
            if (pos2 != den_s.size())
                throw SpecError("");
            v = num / den;
            pos = s.size();
        } else {
            v = std::stod(s, &pos);
        }
    } catch (const std::exception&) {
        throw SpecError("bad number '" + s + "' in operator spec '" + spec + "'");
    }
    if (pos != s.size() || !std::isfinite(v))
        throw SpecError("bad number '" + s + "' in operator spec '" + spec + "'");
    return v;
}

inline std::vector<double> parse_numbers(const std::string& s, std::size_t count,
                                         const std::string& spec) {
    const auto parts = split(s, ',');
    if (parts.size() != count)
        throw SpecError("operator spec '" + spec + "' expects " + std::to_string(count) +
                        " parameter(s)");
    std::vector<double> out;
    for (const auto& p : parts)
        out.push_back(parse_number(p, spec));
    return out;
}

inline std::uint64_t op_seed(std::uint64_t seed, Eigen::Index n, std::uint64_t salt) {
    return derive_seed(derive_seed(seed, salt), std::uint64_t(n));
}

inline MomentSequence parse_moment(const std::string& family, const std::string& params,
                                   const std::string& spec) {
    if (family == "holder")
        return moment_holder(parse_numbers(params, 1, spec)[0]);
    if (family == "euler")
        return moment_euler(parse_numbers(params, 1, spec)[0]);
    if (family == "gamma") {
        const auto v = parse_numbers(params, 2, spec);
        return moment_gamma(v[0], v[1]);
    }
    if (family == "gen-cesaro") {
        const auto v = parse_numbers(params, 2, spec);
        return moment_gen_cesaro(v[0], v[1]);
    }
    throw SpecError("unknown Hausdorff family '" + family + "' in '" + spec + "'");
}

/// The l_f vector z_k = 1 / (sqrt(k) log^2(k+1)) (1-indexed), which lies in no l_p, p < 2.
inline SeqVec alpha0_vector(Eigen::Index n) {
    SeqVec z(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double kk = double(k + 1);
        const double l = std::log(kk + 1.0);
        z(k) = 1.0 / (std::sqrt(kk) * l * l);
    }
    return z;
}

} // namespace detail

/// Diagonal symbol of length 2n with odd entries 1 and even entries 1 - gap_k.
inline SeqVec diagonal_gap_symbol(Eigen::Index n, const std::function<double(Eigen::Index)>& gap) {
    SeqVec s(2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        s(2 * k) = 1.0;
        s(2 * k + 1) = 1.0 - gap(k);
    }
    return s;
}

/// The rank-one operator z -> Omega(lift_Lp(y), z) v with y = (e_1 + e_2)/sqrt 2 and
/// v = (e_1, e_2): both factors have fixed finite support.
inline BlockOperator rank_one_example(Eigen::Index n) {
    if (n < 2)
        throw ParameterOutOfRange("rank-one example needs n >= 2");
    SeqVec y = SeqVec::Zero(n);
    y(0) = y(1) = 1.0 / std::sqrt(2.0);
    return rank_one(d_map(lift_Lp(y)), Z2Vec(unit_vector(n, 0), unit_vector(n, 1)));
}

/// tau_{alpha_0} = (0, e_1) (x) (z, 0) + (e_1, 0) (x) (0, z), alpha_0 x = x_1 z.
inline BlockOperator tau_alpha0(Eigen::Index n) {
    const SeqVec z = detail::alpha0_vector(n);
    const SeqVec e1 = unit_vector(n, 0);
    const SeqVec zero = SeqVec::Zero(n);
    return nuclear_sum({{Z2Functional(zero, e1), Z2Vec(z, zero)},
                        {Z2Functional(e1, zero), Z2Vec(zero, z)}});
}

inline OpSpec parse_op_spec(const std::string& text, std::uint64_t seed);

namespace detail {

inline OpSpec matrix_spec(std::string text, std::function<Matrix(Eigen::Index)> m) {
    OpSpec s;
    s.text = std::move(text);
    s.matrix = m;
    s.block = [m](Eigen::Index n) { return tau(m(n)); };
    return s;
}

inline OpSpec block_spec(std::string text, std::function<BlockOperator(Eigen::Index)> b) {
    OpSpec s;
    s.text = std::move(text);
    s.block = std::move(b);
    return s;
}

inline OpSpec require_matrix(const std::string& inner, std::uint64_t seed,
                             const std::string& outer) {
    OpSpec s = parse_op_spec(inner, seed);
    if (!s.is_matrix())
        throw SpecError("'" + inner + "' inside '" + outer + "' must be a plain matrix");
    return s;
}

} // namespace detail

inline OpSpec parse_op_spec(const std::string& text, std::uint64_t seed) {
    using namespace detail;
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    const bool has_rest = colon != std::string::npos;
    auto no_params = [&]() {
        if (has_rest)
            throw SpecError("operator '" + name + "' takes no parameters");
    };

    if (name == "identity") {
        no_params();
        return matrix_spec(text, [](Eigen::Index n) { return Matrix(Matrix::Identity(n, n)); });
    }
    if (name == "cesaro") {
        no_params();
        return matrix_spec(text, [](Eigen::Index n) { return cesaro(n); });
    }
    if (name == "hilbert") {
        const double lambda = parse_numbers(rest, 1, text)[0];
        return matrix_spec(text, [lambda](Eigen::Index n) { return hilbert_matrix(n, lambda); });
    }
    if (name == "hausdorff") {
        const auto c2 = rest.find(':');
        if (c2 == std::string::npos)
            throw SpecError("expected hausdorff:FAMILY:PARAMS, got '" + text + "'");
        const MomentSequence m = parse_moment(rest.substr(0, c2), rest.substr(c2 + 1), text);
        return matrix_spec(text, [m](Eigen::Index n) {
            return hausdorff_matrix({m, n, PrecisionMode::extended});
        });
    }
    if (name == "shift") {
        ShiftDirection dir;
        if (rest == "right")
            dir = ShiftDirection::right;
        else if (rest == "left")
            dir = ShiftDirection::left;
        else
            throw SpecError("shift direction must be right or left, got '" + rest + "'");
        return matrix_spec(text, [dir](Eigen::Index n) { return shift(n, dir); });
    }
    if (name == "perm") {
        no_params();
        return matrix_spec(text, [seed](Eigen::Index n) {
            Rng rng(op_seed(seed, n, 1));
            return random_signed_permutation(n, rng);
        });
    }
    if (name == "tau-perm") {
        no_params();
        return block_spec(text, [seed](Eigen::Index n) {
            Rng rng(op_seed(seed, n, 1));
            return tau(random_signed_permutation(n, rng));
        });
    }
    if (name == "diag") {
        const auto c2 = rest.find(':');
        const std::string pat = rest.substr(0, c2);
        if (pat == "ones" && c2 == std::string::npos)
            return block_spec(text, [](Eigen::Index n) {
                return diagonal_z2(SeqVec::Ones(2 * n));
            });
        if ((pat == "gap" || pat == "loggap") && c2 != std::string::npos) {
            const double c = parse_numbers(rest.substr(c2 + 1), 1, text)[0];
            const bool lg = pat == "loggap";
            return block_spec(text, [c, lg](Eigen::Index n) {
                return diagonal_z2(diagonal_gap_symbol(n, [c, lg](Eigen::Index k) {
                    return lg ? c / std::log(double(k) + 2.0) : c;
                }));
            });
        }
        throw SpecError("diag pattern must be ones, gap:C or loggap:C, got '" + rest + "'");
    }
    if (name == "tau") {
        const OpSpec inner = require_matrix(rest, seed, text);
        auto m = inner.matrix;
        return block_spec(text, [m](Eigen::Index n) { return tau(m(n)); });
    }
    if (name == "scalar") {
        const auto v = parse_numbers(rest, 4, text);
        return block_spec(text, [v](Eigen::Index n) {
            return scalar_matrix(v[0], v[1], v[2], v[3], n);
        });
    }
    if (name == "rank1") {
        if (!has_rest)
            return block_spec(text, [](Eigen::Index n) { return rank_one_example(n); });
        if (rest == "alpha0")
            return block_spec(text, [](Eigen::Index n) { return tau_alpha0(n); });
        throw SpecError("rank1 takes no parameter or 'alpha0', got '" + rest + "'");
    }
    if (name == "TU") {
        const std::string prefix = "normalized-blocks:";
        if (rest.rfind(prefix, 0) != 0)
            throw SpecError("expected TU:normalized-blocks:L, got '" + text + "'");
        const double l = parse_numbers(rest.substr(prefix.size()), 1, text)[0];
        if (!(l >= 1.0) || l != std::floor(l))
            throw SpecError("block length must be a positive integer in '" + text + "'");
        const auto len = static_cast<Eigen::Index>(l);
        return block_spec(text, [len, seed](Eigen::Index n) {
            Rng rng(op_seed(seed, n, 2));
            return block_operator_TU(random_normalized_blocks(n, len, rng));
        });
    }
    if (name == "ip") {
        no_params();
        return block_spec(text, [](Eigen::Index n) { return ip(n); });
    }
    if (name == "calderon") {
        const auto plus = rest.find('+');
        if (plus == std::string::npos)
            throw SpecError("expected calderon:A+B, got '" + text + "'");
        auto a = require_matrix(rest.substr(0, plus), seed, text).matrix;
        auto b = require_matrix(rest.substr(plus + 1), seed, text).matrix;
        return block_spec(text, [a, b](Eigen::Index n) { return calderon_upper(a(n), b(n)); });
    }
    throw SpecError("unknown operator '" + name + "'");
}

} // namespace kpz2
