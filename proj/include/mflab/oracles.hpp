#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mflab/groups.hpp"
#include "mflab/matrix.hpp"
#include "mflab/ncpoly.hpp"
#include "mflab/sparse.hpp"

namespace mflab {

namespace detail {

/// Laurent coefficients of a one-letter polynomial whose words are pure powers
/// of X1 or X1'. Mixed words are rejected.
inline std::map<long, Complex> laurent_coefficients(const NCPoly& p) {
    if (p.num_vars() != 1)
        throw std::invalid_argument("circle_norm: polynomial must use exactly one letter");
    std::map<long, Complex> c;
    for (const auto& t : p.terms()) {
        bool any_plain = false, any_star = false;
        for (const auto& l : t.word) (l.starred ? any_star : any_plain) = true;
        if (any_plain && any_star)
            throw std::invalid_argument("circle_norm: non-Laurent input (mixed-letter word)");
        const long k = any_star ? -static_cast<long>(t.word.size())
                                : static_cast<long>(t.word.size());
        c[k] += t.coeff;
    }
    return c;
}

} // namespace detail

/// sup_{|z|=1} |p(z)| for a Laurent polynomial in one unitary letter, by dense
/// sampling (2^16 points) with one Newton refinement per local maximum of
/// |p|^2. The grid max plus the derivative bound brackets the sup.
inline double circle_norm(const NCPoly& p) {
    const auto coeff = detail::laurent_coefficients(p);
    if (coeff.empty()) return 0.0;
    const int n = 1 << 16;
    auto value = [&](double theta) {
        Complex z{0.0, 0.0};
        for (const auto& [k, c] : coeff) z += c * std::polar(1.0, k * theta);
        return z;
    };
    auto sq_and_derivs = [&](double theta) {
        Complex f{0.0, 0.0}, fp{0.0, 0.0}, fpp{0.0, 0.0};
        for (const auto& [k, c] : coeff) {
            const Complex e = c * std::polar(1.0, k * theta);
            f += e;
            fp += Complex(0.0, static_cast<double>(k)) * e;
            fpp += Complex(-static_cast<double>(k) * static_cast<double>(k), 0.0) * e;
        }
        const double phi = std::norm(f);
        const double dphi = 2.0 * std::real(std::conj(f) * fp);
        const double d2phi = 2.0 * (std::norm(fp) + std::real(std::conj(f) * fpp));
        return std::array<double, 3>{phi, dphi, d2phi};
    };

    std::vector<double> grid(n);
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        grid[static_cast<std::size_t>(i)] = std::abs(value(2.0 * M_PI * i / n));
        best = std::max(best, grid[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < n; ++i) {
        const double prev = grid[static_cast<std::size_t>((i + n - 1) % n)];
        const double next = grid[static_cast<std::size_t>((i + 1) % n)];
        const double here = grid[static_cast<std::size_t>(i)];
        if (here >= prev && here >= next) {
            double theta = 2.0 * M_PI * i / n;
            for (int step = 0; step < 3; ++step) {
                const auto d = sq_and_derivs(theta);
                if (d[2] >= 0.0 || d[1] == 0.0) break;
                theta -= d[1] / d[2];
            }
            best = std::max(best, std::abs(value(theta)));
        }
    }
    return best;
}

/// sup over the m-torus of the abelianized polynomial, by grid search
/// (256 per axis, m <= 3) plus coordinatewise refinement. Distinct words with
/// one abelianization merge, matching evaluation on commuting models.
inline double torus_norm(const NCPoly& p, int m) {
    if (m < 1 || m > 3) throw std::invalid_argument("torus_norm: arity must be 1, 2 or 3");
    if (p.num_vars() > m)
        throw std::invalid_argument("torus_norm: polynomial uses more letters than the arity");
    std::map<std::vector<long>, Complex> terms;
    for (const auto& t : p.terms()) {
        std::vector<long> exps(static_cast<std::size_t>(m), 0);
        for (const auto& l : t.word) exps[static_cast<std::size_t>(l.index - 1)] += l.starred ? -1 : 1;
        terms[exps] += t.coeff;
    }
    auto value = [&](const std::array<double, 3>& theta) {
        Complex z{0.0, 0.0};
        for (const auto& [e, c] : terms) {
            double phase = 0.0;
            for (int j = 0; j < m; ++j) phase += static_cast<double>(e[static_cast<std::size_t>(j)]) * theta[static_cast<std::size_t>(j)];
            z += c * std::polar(1.0, phase);
        }
        return std::abs(z);
    };

    const int g = 256;
    const double step = 2.0 * M_PI / g;
    std::array<double, 3> arg{0.0, 0.0, 0.0}, best_arg{0.0, 0.0, 0.0};
    double best = 0.0;
    const int g1 = g, g2 = m >= 2 ? g : 1, g3 = m >= 3 ? g : 1;
    for (int i = 0; i < g1; ++i)
        for (int j = 0; j < g2; ++j)
            for (int k = 0; k < g3; ++k) {
                arg = {i * step, j * step, k * step};
                const double v = value(arg);
                if (v > best) {
                    best = v;
                    best_arg = arg;
                }
            }
    // coordinatewise golden-section polish around the best grid point
    for (int sweep = 0; sweep < 4; ++sweep)
        for (int axis = 0; axis < m; ++axis) {
            double lo = best_arg[static_cast<std::size_t>(axis)] - step;
            double hi = best_arg[static_cast<std::size_t>(axis)] + step;
            const double gr = 0.6180339887498949;
            double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
            auto at = [&](double th) {
                auto probe = best_arg;
                probe[static_cast<std::size_t>(axis)] = th;
                return value(probe);
            };
            double fa = at(a), fb = at(b);
            for (int it = 0; it < 40; ++it) {
                if (fa < fb) {
                    lo = a;
                    a = b;
                    fa = fb;
                    b = lo + gr * (hi - lo);
                    fb = at(b);
                } else {
                    hi = b;
                    b = a;
                    fb = fa;
                    a = hi - gr * (hi - lo);
                    fa = at(a);
                }
            }
            const double mid = (lo + hi) / 2.0;
            if (at(mid) > best) {
                best = at(mid);
                best_arg[static_cast<std::size_t>(axis)] = mid;
            }
        }
    return best;
}

// ---------------------------------------------------------------------------
// Cayley-ball compression of the left regular representation of F_n.
// ---------------------------------------------------------------------------

namespace detail {

/// Reduced words of length <= radius in F_n, breadth-first, with an index map.
/// Words are byte strings of signed generators (+g, -g as char).
struct Ball {
    std::vector<std::string> words;
    std::unordered_map<std::string, std::uint32_t> index;
};

inline std::size_t ball_size_estimate(int n, int radius) {
    if (n == 1) return 2 * static_cast<std::size_t>(radius) + 1;
    // 1 + 2n ((2n-1)^r - 1) / (2n - 2)
    long double total = 1.0L, shell = 2.0L * n;
    for (int r = 1; r <= radius; ++r) {
        total += shell;
        if (total > 1e18L) return static_cast<std::size_t>(-1);
        shell *= (2.0L * n - 1.0L);
    }
    return static_cast<std::size_t>(total);
}

inline Ball enumerate_ball(int n, int radius, std::size_t vertex_cap) {
    if (ball_size_estimate(n, radius) > vertex_cap)
        throw std::invalid_argument("ball: vertex count exceeds the configured cap");
    Ball ball;
    ball.words.push_back("");
    ball.index.emplace("", 0);
    std::size_t frontier_begin = 0;
    for (int r = 0; r < radius; ++r) {
        const std::size_t frontier_end = ball.words.size();
        for (std::size_t w = frontier_begin; w < frontier_end; ++w) {
            for (int g = 1; g <= n; ++g) {
                for (int s : {+1, -1}) {
                    const char letter = static_cast<char>(s * g);
                    const std::string& base = ball.words[w];
                    if (!base.empty() && base.back() == static_cast<char>(-letter)) continue;
                    std::string next = base;
                    next.push_back(letter);
                    if (ball.index.emplace(next, static_cast<std::uint32_t>(ball.words.size())).second)
                        ball.words.push_back(std::move(next));
                }
            }
        }
        frontier_begin = frontier_end;
    }
    return ball;
}

/// Left concatenation with seam reduction; both inputs reduced.
inline std::string left_mul(const std::string& w, const std::string& g) {
    std::string out = w;
    std::size_t skip = 0;
    while (!out.empty() && skip < g.size() && out.back() == static_cast<char>(-g[skip])) {
        out.pop_back();
        ++skip;
    }
    out.append(g, skip, std::string::npos);
    return out;
}

inline SparseMatrix ball_operator(const NCPoly& p, const Ball& ball, int radius) {
    std::vector<std::size_t> ti, tj;
    std::vector<Complex> tv;
    for (const auto& term : p.terms()) {
        std::string w;
        for (const auto& l : term.word) w.push_back(static_cast<char>(l.starred ? -l.index : l.index));
        // reduce the term word itself (e.g. X1*X1' collapses)
        std::string rw;
        for (char c : w) {
            if (!rw.empty() && rw.back() == static_cast<char>(-c))
                rw.pop_back();
            else
                rw.push_back(c);
        }
        for (std::size_t j = 0; j < ball.words.size(); ++j) {
            const std::string target = left_mul(rw, ball.words[j]);
            if (static_cast<int>(target.size()) > radius) continue;
            const auto it = ball.index.find(target);
            if (it == ball.index.end()) continue;
            ti.push_back(it->second);
            tj.push_back(j);
            tv.push_back(term.coeff);
        }
    }
    return SparseMatrix(ball.words.size(), ball.words.size(), ti, tj, tv);
}

} // namespace detail

struct BallBoundRow {
    int radius = 0;
    std::size_t ball_size = 0;
    double lower = 0.0;         ///< certified lower bound for the reduced norm
    double bracket_upper = 0.0; ///< power-iteration bracket end for the ball operator
};

/// Certified lower bounds for the reduced free-group norm of p, from the
/// compression of the left regular representation to balls of radius
/// from_radius..radius. Warm-started across radii, so the reported values are
/// nondecreasing.
inline std::vector<BallBoundRow> ball_lower_bound_sweep(const NCPoly& p, int from_radius,
                                                        int radius,
                                                        std::size_t vertex_cap = 2000000) {
    if (radius < 1 || from_radius < 1 || from_radius > radius)
        throw std::invalid_argument("ball: radius range invalid");
    if (static_cast<int>(p.degree()) > from_radius)
        throw std::invalid_argument("ball: radius must be at least the polynomial degree");
    const int n = p.num_vars();
    if (n < 1) throw std::invalid_argument("ball: polynomial has no letters");
    std::vector<BallBoundRow> rows;
    std::vector<Complex> warm;
    for (int r = from_radius; r <= radius; ++r) {
        const auto ball = detail::enumerate_ball(n, r, vertex_cap);
        const SparseMatrix op = detail::ball_operator(p, ball, r);
        const auto bracket = sparse_largest_singular_value(op, 1e-7, 200000, &warm);
        rows.push_back({r, ball.words.size(), bracket.lower, bracket.upper});
    }
    return rows;
}

inline double ball_lower_bound(const NCPoly& p, int radius, std::size_t vertex_cap = 2000000) {
    const int start = std::max(static_cast<int>(p.degree()), 1);
    return ball_lower_bound_sweep(p, start, radius, vertex_cap).back().lower;
}

// ---------------------------------------------------------------------------
// Norm oracle handles.
// ---------------------------------------------------------------------------

/// A reference norm per polynomial: exact values (circle, torus, matrix model,
/// user constants) or certified lower bounds (Cayley-ball compressions).
struct NormOracle {
    enum class Kind { Circle, Torus, ExactMatrix, BallLowerBound, UserConstant };

    Kind kind = Kind::Circle;
    int torus_arity = 0;
    MatTuple target;                ///< ExactMatrix
    int ball_radius = 0;            ///< BallLowerBound
    std::vector<double> constants;  ///< UserConstant, aligned with the polynomial list

    static NormOracle circle() { return {Kind::Circle, 0, {}, 0, {}}; }
    static NormOracle torus(int m) { return {Kind::Torus, m, {}, 0, {}}; }
    static NormOracle exact_matrix(MatTuple t) { return {Kind::ExactMatrix, 0, std::move(t), 0, {}}; }
    static NormOracle ball(int radius) { return {Kind::BallLowerBound, 0, {}, radius, {}}; }
    static NormOracle user_constant(std::vector<double> v) {
        return {Kind::UserConstant, 0, {}, 0, std::move(v)};
    }

    bool is_lower_bound() const { return kind == Kind::BallLowerBound; }

    double value(const NCPoly& p, std::size_t poly_index) const {
        switch (kind) {
            case Kind::Circle: return circle_norm(p);
            case Kind::Torus: return torus_norm(p, torus_arity);
            case Kind::ExactMatrix: return op_norm(evaluate(p, target));
            case Kind::BallLowerBound: return ball_lower_bound(p, ball_radius);
            case Kind::UserConstant:
                if (poly_index >= constants.size())
                    throw std::invalid_argument("NormOracle: no constant for this polynomial");
                return constants[poly_index];
        }
        throw std::logic_error("NormOracle: bad kind");
    }
};

} // namespace mflab
