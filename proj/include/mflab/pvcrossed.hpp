#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflab/groups.hpp"
#include "mflab/matrix.hpp"
#include "mflab/ncpoly.hpp"
#include "mflab/oracles.hpp"

namespace mflab {

// ---------------------------------------------------------------------------
// Truncated bilateral shift and the almost-reducing frame projections.
// ---------------------------------------------------------------------------

/// Bilateral shift truncated to basis indices -L..L: T e_n = e_{n+1}, e_L -> 0.
/// A partial isometry with T*T = I - E_L.
struct ShiftTruncation {
    Eigen::Index half_width = 0;

    Eigen::Index dim() const { return 2 * half_width + 1; }
    Eigen::Index index_of(long long n) const {
        if (n < -half_width || n > half_width)
            throw std::out_of_range("ShiftTruncation: basis index outside the window");
        return static_cast<Eigen::Index>(n + half_width);
    }
    CMatrix matrix() const {
        CMatrix t = CMatrix::Zero(dim(), dim());
        for (Eigen::Index i = 0; i + 1 < dim(); ++i) t(i + 1, i) = 1.0;
        return t;
    }
};

/// The frame vectors f_k = cos(k pi / 2n) e_k + sin(k pi / 2n) e_{k-n} for
/// k = 0..n-1, their rank-one sum q, and the measured commutator norm of the
/// shift against q on a window that excludes the artificial outer boundary.
struct PVFrame {
    int nj = 0;
    ShiftTruncation ambient;
    CMatrix vectors;    ///< dim x nj, orthonormal columns
    CMatrix projection; ///< q = sum of rank-one projections onto the columns
    double commutator_norm = 0.0;
    Eigen::Index window = 0; ///< commutator measured on indices |i| <= window
};

/// Build the frame on a 2L+1 truncation (default L = 4 n_j) and measure
/// |T q - q T| compressed to indices [-w, w] (default w = 2 n_j), away from
/// the truncation boundary.
inline PVFrame pv_frame(int nj, Eigen::Index half_width = -1, Eigen::Index window = -1) {
    if (nj < 1) throw std::invalid_argument("pv_frame: n_j must be >= 1");
    const Eigen::Index L = half_width < 0 ? 4 * static_cast<Eigen::Index>(nj) : half_width;
    if (L < nj) throw std::invalid_argument("pv_frame: ambient half width must be >= n_j");
    PVFrame frame;
    frame.nj = nj;
    frame.ambient = ShiftTruncation{L};
    const Eigen::Index d = frame.ambient.dim();
    frame.vectors = CMatrix::Zero(d, nj);
    for (int k = 0; k < nj; ++k) {
        const double angle = k * M_PI / (2.0 * nj);
        frame.vectors(frame.ambient.index_of(k), k) += std::cos(angle);
        frame.vectors(frame.ambient.index_of(k - nj), k) += std::sin(angle);
    }
    frame.projection = frame.vectors * frame.vectors.adjoint();
    const CMatrix t = frame.ambient.matrix();
    const CMatrix comm = t * frame.projection - frame.projection * t;
    frame.window = window < 0 ? std::min<Eigen::Index>(2 * nj, L) : std::min<Eigen::Index>(window, L);
    const Eigen::Index lo = frame.ambient.index_of(-frame.window);
    const Eigen::Index len = 2 * frame.window + 1;
    frame.commutator_norm = op_norm(comm.block(lo, lo, len, len));
    return frame;
}

/// Compression of the truncated shift to the frame range, in the frame basis.
inline CMatrix frame_compressed_shift(const PVFrame& frame) {
    return frame.vectors.adjoint() * frame.ambient.matrix() * frame.vectors;
}

// ---------------------------------------------------------------------------
// Built-in actions of the integers on a matrix tuple.
// ---------------------------------------------------------------------------

/// alpha: Z -> Aut, one of: trivial; gauge phase alpha(n)(x_i) = e^{2 pi i n theta} x_i;
/// conjugation alpha(n)(x) = W^n x W^{-n}; generator permutation
/// alpha(n)(x_i) = x_{sigma^n(i)}.
class MatrixGroupAction {
  public:
    enum class Kind { Trivial, GaugePhase, UnitaryConjugation, GeneratorPermutation };

    static MatrixGroupAction trivial() { return MatrixGroupAction(Kind::Trivial); }
    static MatrixGroupAction gauge_phase(double theta) {
        MatrixGroupAction a(Kind::GaugePhase);
        a.theta_ = theta;
        return a;
    }
    static MatrixGroupAction unitary_conjugation(CMatrix w) {
        MatrixGroupAction a(Kind::UnitaryConjugation);
        if (op_norm(w.adjoint() * w - CMatrix::Identity(w.rows(), w.cols())) > 1e-10)
            throw std::invalid_argument("MatrixGroupAction: conjugator must be unitary");
        a.w_ = std::move(w);
        return a;
    }
    static MatrixGroupAction generator_permutation(Perm sigma) {
        MatrixGroupAction a(Kind::GeneratorPermutation);
        a.sigma_ = std::move(sigma);
        return a;
    }

    Kind kind() const { return kind_; }
    double theta() const { return theta_; }

    MatTuple apply(long long n, const MatTuple& base) const {
        switch (kind_) {
            case Kind::Trivial: return base;
            case Kind::GaugePhase: {
                const Complex phase = std::polar(1.0, 2.0 * M_PI * static_cast<double>(n) * theta_);
                std::vector<CMatrix> mats;
                for (const auto& m : base.mats) mats.push_back(phase * m);
                return MatTuple(std::move(mats));
            }
            case Kind::UnitaryConjugation: {
                if (w_.rows() != base.dim)
                    throw std::invalid_argument("MatrixGroupAction: conjugator dimension mismatch");
                CMatrix wn = CMatrix::Identity(base.dim, base.dim);
                const CMatrix step = n >= 0 ? w_ : CMatrix(w_.adjoint());
                for (long long i = 0, k = std::llabs(n); i < k; ++i) wn = wn * step;
                std::vector<CMatrix> mats;
                for (const auto& m : base.mats) mats.push_back(wn * m * wn.adjoint());
                return MatTuple(std::move(mats));
            }
            case Kind::GeneratorPermutation: {
                if (sigma_.size() != static_cast<int>(base.count()))
                    throw std::invalid_argument("MatrixGroupAction: permutation degree mismatch");
                // sigma^n applied to the index list
                std::vector<CMatrix> mats(base.count());
                for (std::size_t i = 0; i < base.count(); ++i) {
                    int img = static_cast<int>(i) + 1;
                    const Perm s = n >= 0 ? sigma_ : sigma_.inverse();
                    for (long long rep = 0, k = std::llabs(n); rep < k; ++rep) img = s(img);
                    mats[i] = base[static_cast<std::size_t>(img - 1)];
                }
                return MatTuple(std::move(mats));
            }
        }
        throw std::logic_error("MatrixGroupAction: bad kind");
    }

  private:
    explicit MatrixGroupAction(Kind k) : kind_(k) {}
    Kind kind_;
    double theta_ = 0.0;
    CMatrix w_;
    Perm sigma_;
};

/// The gauge action alpha(n)(u_i) = e^{2 n pi theta i} u_i on a unitary tuple.
inline MatrixGroupAction gauge_action(double theta, const MatTuple& generators) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw std::invalid_argument("gauge_action: theta must lie in (0,1)");
    const CMatrix eye = CMatrix::Identity(generators.dim, generators.dim);
    for (const auto& u : generators.mats)
        if (op_norm(u.adjoint() * u - eye) > 1e-10)
            throw std::invalid_argument("gauge_action: generators must be unitary");
    return MatrixGroupAction::gauge_phase(theta);
}

// ---------------------------------------------------------------------------
// Orbit models x_{k,i} = alpha(-k) x_i.
// ---------------------------------------------------------------------------

struct OrbitModel {
    MatrixGroupAction action = MatrixGroupAction::trivial();
    MatTuple base;
    long long range_k = 0;
    std::map<long long, MatTuple> shifted_cache;

    const MatTuple& shifted(long long k) const {
        const auto it = shifted_cache.find(k);
        if (it == shifted_cache.end())
            throw std::out_of_range("OrbitModel: shift index outside the computed range");
        return it->second;
    }

    /// max_i |x_{k+n,i} - x_{k,i}| over the available k (near-periodicity).
    double periodicity_defect(long long n) const {
        double d = 0.0;
        bool any = false;
        for (const auto& [k, model] : shifted_cache) {
            const auto it = shifted_cache.find(k + n);
            if (it == shifted_cache.end()) continue;
            any = true;
            for (std::size_t i = 0; i < model.count(); ++i)
                d = std::max(d, op_norm(it->second[i] - model[i]));
        }
        if (!any) throw std::out_of_range("OrbitModel: period exceeds the computed range");
        return d;
    }
};

inline OrbitModel orbit_model(const MatTuple& base, const MatrixGroupAction& action,
                              long long range_k) {
    if (range_k < 0) throw std::invalid_argument("orbit_model: range must be nonnegative");
    OrbitModel orbit{action, base, range_k, {}};
    for (long long k = -range_k; k <= range_k; ++k) orbit.shifted_cache.emplace(k, action.apply(-k, base));
    return orbit;
}

// ---------------------------------------------------------------------------
// The crossed-product matrix model over the frame.
// ---------------------------------------------------------------------------

struct CrossedEpsilonReport {
    double intertwine = 0.0;                  ///< (i)  max_i |U* A_i - B_i U*|
    std::vector<double> circle_deviation;     ///< (ii) per G: ||G(U)| - circle(G)|
    std::vector<double> reference_deviation;  ///< (iii) per H: ||H(A,B)| - ref|
    std::vector<double> witness_norms;        ///< (iv) |P(A, U)| per witness polynomial
    double wraparound = 0.0;                  ///< max_i |x_{n_j,i} - x_{0,i}|
    double frame_commutator = 0.0;
};

/// A_i, B_i and U on (frame rank) x (compressed base) dimensions, with the
/// measured report quantities.
struct CrossedModel {
    MatTuple A;
    MatTuple B;
    CMatrix U;
    int nj = 0;
    Eigen::Index base_dim = 0; ///< after compression
    CrossedEpsilonReport report;
};

/// Assemble A_i = sum_k (p x_{k,i} p) (x) q_k, B_i likewise one orbit step
/// ahead, and U = 1 (x) q T q, all expressed on the frame range where they
/// act. The base compression p is the coordinate projection of rank p_rank
/// (identity when p_rank equals the base dimension).
inline CrossedModel build_crossed_model(const OrbitModel& orbit, const PVFrame& frame,
                                        Eigen::Index p_rank,
                                        const std::vector<NCPoly>& polys_G = {},
                                        const std::vector<NCPoly>& polys_H = {},
                                        const std::vector<double>& refs_H = {},
                                        const std::vector<NCPoly>& polys_P = {}) {
    const int nj = frame.nj;
    if (orbit.range_k < nj)
        throw std::invalid_argument("build_crossed_model: orbit range must cover n_j");
    const Eigen::Index d = orbit.base.dim;
    if (p_rank < 1 || p_rank > d)
        throw std::invalid_argument("build_crossed_model: compression rank out of range");
    if (polys_H.size() != refs_H.size())
        throw std::invalid_argument("build_crossed_model: one reference norm per H polynomial");
    const std::size_t m = orbit.base.count();

    auto compress = [&](const CMatrix& x) { return CMatrix(x.topLeftCorner(p_rank, p_rank)); };

    const CMatrix uhat = frame_compressed_shift(frame);
    const Eigen::Index dim = static_cast<Eigen::Index>(nj) * p_rank;
    std::vector<CMatrix> A(m, CMatrix::Zero(dim, dim)), B(m, CMatrix::Zero(dim, dim));
    for (int k = 0; k < nj; ++k) {
        const MatTuple& xk = orbit.shifted(k);
        const MatTuple& xk1 = orbit.shifted(k + 1);
        for (std::size_t i = 0; i < m; ++i) {
            A[i].block(k * p_rank, k * p_rank, p_rank, p_rank) = compress(xk[i]);
            B[i].block(k * p_rank, k * p_rank, p_rank, p_rank) = compress(xk1[i]);
        }
    }
    CrossedModel model;
    model.A = MatTuple(std::move(A));
    model.B = MatTuple(std::move(B));
    model.U = kron(uhat, CMatrix::Identity(p_rank, p_rank));
    model.nj = nj;
    model.base_dim = p_rank;
    model.report.frame_commutator = frame.commutator_norm;

    for (std::size_t i = 0; i < m; ++i) {
        model.report.intertwine =
            std::max(model.report.intertwine,
                     op_norm(model.U.adjoint() * model.A[i] - model.B[i] * model.U.adjoint()));
        model.report.wraparound =
            std::max(model.report.wraparound, op_norm(orbit.shifted(nj)[i] - orbit.shifted(0)[i]));
    }
    for (const auto& g : polys_G) {
        const double model_norm = op_norm(evaluate(g, MatTuple({model.U})));
        model.report.circle_deviation.push_back(std::abs(model_norm - circle_norm(g)));
    }
    for (std::size_t i = 0; i < polys_H.size(); ++i) {
        std::vector<CMatrix> ab = model.A.mats;
        ab.insert(ab.end(), model.B.mats.begin(), model.B.mats.end());
        const double model_norm = op_norm(evaluate(polys_H[i], MatTuple(std::move(ab))));
        model.report.reference_deviation.push_back(std::abs(model_norm - refs_H[i]));
    }
    for (const auto& p : polys_P) {
        std::vector<CMatrix> au = model.A.mats;
        au.push_back(model.U);
        model.report.witness_norms.push_back(op_norm(evaluate(p, MatTuple(std::move(au)))));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Finite-group crossed product through the regular representation.
// ---------------------------------------------------------------------------

/// Covariant pair for a finite group acting on M_d by unitary conjugation:
/// pi(a) block-diagonal with blocks alpha(g^{-1})(a), lambda_h permuting the
/// blocks, satisfying lambda_h pi(a) lambda_h* = pi(alpha_h(a)).
struct FiniteCrossed {
    GroupHandle group;
    std::vector<GroupElem> elements; ///< enumeration, identity first
    std::vector<CMatrix> conjugators;
    Eigen::Index base_dim = 0;

    std::size_t order() const { return elements.size(); }

    std::size_t index_of(const GroupElem& g) const {
        for (std::size_t i = 0; i < elements.size(); ++i)
            if (group.equal(elements[i], g)) return i;
        throw std::invalid_argument("FiniteCrossed: element not in the enumeration");
    }

    CMatrix pi(const CMatrix& a) const {
        if (a.rows() != base_dim || a.cols() != base_dim)
            throw std::invalid_argument("FiniteCrossed: base dimension mismatch");
        const std::size_t n = order();
        CMatrix out = CMatrix::Zero(base_dim * static_cast<Eigen::Index>(n),
                                    base_dim * static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const CMatrix& w = conjugators[index_of(group.inv(elements[i]))];
            out.block(static_cast<Eigen::Index>(i) * base_dim, static_cast<Eigen::Index>(i) * base_dim,
                      base_dim, base_dim) = w * a * w.adjoint();
        }
        return out;
    }

    CMatrix lambda(std::size_t h) const {
        const std::size_t n = order();
        CMatrix out = CMatrix::Zero(base_dim * static_cast<Eigen::Index>(n),
                                    base_dim * static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t target = index_of(group.mul(elements[h], elements[i]));
            out.block(static_cast<Eigen::Index>(target) * base_dim,
                      static_cast<Eigen::Index>(i) * base_dim, base_dim, base_dim) =
                CMatrix::Identity(base_dim, base_dim);
        }
        return out;
    }

    MatTuple lambdas() const {
        std::vector<CMatrix> ls;
        for (std::size_t h = 0; h < order(); ++h) ls.push_back(lambda(h));
        return MatTuple(std::move(ls));
    }

    CMatrix alpha(std::size_t h, const CMatrix& a) const {
        return conjugators[h] * a * conjugators[h].adjoint();
    }

    /// |lambda_h pi(a) lambda_h* - pi(alpha_h(a))|
    double covariance_residual(std::size_t h, const CMatrix& a) const {
        const CMatrix l = lambda(h);
        return op_norm(l * pi(a) * l.adjoint() - pi(alpha(h, a)));
    }
};

/// Validate that the conjugators implement a genuine homomorphism into the
/// automorphisms (composition holds up to a scalar phase) and assemble the
/// covariant pair.
inline FiniteCrossed finite_group_crossed(Eigen::Index base_dim, const GroupHandle& group,
                                          const std::vector<CMatrix>& conjugators) {
    FiniteCrossed fc{group, group.elements(), conjugators, base_dim};
    if (fc.elements.empty()) throw std::invalid_argument("finite_group_crossed: empty group");
    if (conjugators.size() != fc.elements.size())
        throw std::invalid_argument("finite_group_crossed: one conjugator per group element");
    const CMatrix eye = CMatrix::Identity(base_dim, base_dim);
    for (const auto& w : conjugators) {
        if (w.rows() != base_dim || w.cols() != base_dim)
            throw std::invalid_argument("finite_group_crossed: conjugator dimension mismatch");
        if (op_norm(w.adjoint() * w - eye) > 1e-10)
            throw std::invalid_argument("finite_group_crossed: conjugators must be unitary");
    }
    // Ad(W_g) Ad(W_h) = Ad(W_{gh}): W_{gh}* W_g W_h must be a scalar phase
    for (std::size_t g = 0; g < fc.elements.size(); ++g)
        for (std::size_t h = 0; h < fc.elements.size(); ++h) {
            const std::size_t gh = fc.index_of(group.mul(fc.elements[g], fc.elements[h]));
            const CMatrix m = conjugators[gh].adjoint() * conjugators[g] * conjugators[h];
            const Complex mu = m.trace() / static_cast<double>(base_dim);
            if (std::abs(std::abs(mu) - 1.0) > 1e-10 ||
                op_norm(m - mu * eye) > 1e-10)
                throw std::invalid_argument(
                    "finite_group_crossed: conjugators do not compose as a homomorphism");
        }
    return fc;
}

} // namespace mflab
