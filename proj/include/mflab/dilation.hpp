#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mflab/matrix.hpp"
#include "mflab/ncpoly.hpp"

namespace mflab {

// ---------------------------------------------------------------------------
// Polynomial approximation of sqrt on [0,1] with a constant term of zero and a
// certified sup-error bound.
// ---------------------------------------------------------------------------

/// Monomial coefficients (coeffs[0] == 0 exactly), a certified bound on
/// sup_{[0,1]} |sqrt(t) - P(t)|, and the degree.
struct SqrtApprox {
    std::vector<double> coeffs;
    double delta = 0.0;
    int degree = 0;

    double eval(double t) const {
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * t + coeffs[k];
        return acc;
    }

    /// Sum_k k |c_k|, a bound for |P'| on [0,1].
    double derivative_bound() const {
        double m = 0.0;
        for (std::size_t k = 1; k < coeffs.size(); ++k) m += static_cast<double>(k) * std::abs(coeffs[k]);
        return m;
    }
};

namespace detail {

/// Weighted least-squares fit of sqrt on [0,1] in the monomial basis without a
/// constant column; Lawson reweighting pushes it toward the sup-norm optimum.
/// The truncated-SVD solve keeps the coefficient vector as small as the target
/// allows, which is what keeps double-precision Horner evaluation meaningful.
inline std::vector<double> fit_sqrt_poly(int degree, int lawson_iters = 14, int npts = 6000) {
    Eigen::VectorXd x(npts), y(npts);
    for (int i = 0; i < npts; ++i) {
        x(i) = (1.0 - std::cos(M_PI * (i + 0.5) / npts)) / 2.0;
        y(i) = std::sqrt(x(i));
    }
    Eigen::MatrixXd v(npts, degree);
    for (int i = 0; i < npts; ++i) {
        double pw = 1.0;
        for (int k = 0; k < degree; ++k) {
            pw *= x(i);
            v(i, k) = pw;
        }
    }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(npts), c(degree);
    for (int it = 0; it < lawson_iters; ++it) {
        Eigen::VectorXd sw = w.cwiseSqrt();
        Eigen::MatrixXd vw = sw.asDiagonal() * v;
        Eigen::BDCSVD<Eigen::MatrixXd> svd(vw, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-13);
        c = svd.solve(sw.asDiagonal() * y);
        Eigen::VectorXd res = (v * c - y).cwiseAbs();
        w = w.cwiseProduct(res.array().max(1e-12).matrix());
        w /= w.sum();
    }
    std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
    for (int k = 0; k < degree; ++k) coeffs[static_cast<std::size_t>(k) + 1] = c(k);
    return coeffs;
}

/// Certified sup error of the as-stored polynomial against sqrt on [0,1].
/// Quadratic-spaced grid (uniform in sqrt t), with between-node slack from the
/// grid values of P', P'', P''' and a global bound on the fourth derivative.
inline double certify_sqrt_poly(const std::vector<double>& c, double s = 2e-6) {
    const std::size_t n = c.size();
    double m4 = 0.0;
    for (std::size_t k = 4; k < n; ++k)
        m4 += static_cast<double>(k) * (k - 1.0) * (k - 2.0) * (k - 3.0) / 24.0 * std::abs(c[k]);

    const std::size_t npts = static_cast<std::size_t>(std::ceil(1.0 / s)) + 1;
    auto derivs = [&](double t, double out[4]) {
        // divided derivatives: out[j] = P^{(j)}(t) / j!
        out[0] = c[n - 1];
        out[1] = out[2] = out[3] = 0.0;
        for (std::size_t k = n - 1; k-- > 0;) {
            out[3] = out[3] * t + out[2];
            out[2] = out[2] * t + out[1];
            out[1] = out[1] * t + out[0];
            out[0] = out[0] * t + c[k];
        }
    };
    double prev_r = 0.0, prev_e = 0.0, prev_d[4];
    derivs(0.0, prev_d);
    prev_e = std::abs(prev_d[0]); // sqrt(0) = 0
    double cert = prev_e;
    for (std::size_t i = 1; i < npts; ++i) {
        const double r = std::min(static_cast<double>(i) * s, 1.0);
        const double t = r * r;
        double d[4];
        derivs(t, d);
        const double e = std::abs(std::sqrt(t) - d[0]);
        const double h = t - prev_r * prev_r;
        const double a1 = std::max(std::abs(d[1]), std::abs(prev_d[1]));
        const double a2 = std::max(std::abs(d[2]), std::abs(prev_d[2]));
        const double a3 = std::max(std::abs(d[3]), std::abs(prev_d[3]));
        const double slack = (r - prev_r) + h * (a1 + h * (a2 + h * (a3 + h * m4)));
        cert = std::max(cert, std::max(e, prev_e) + slack);
        prev_r = r;
        prev_e = e;
        for (int j = 0; j < 4; ++j) prev_d[j] = d[j];
        if (r >= 1.0) break;
    }
    return cert;
}

inline const std::vector<int>& sqrt_fit_degrees() {
    static const std::vector<int> degs = {1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16, 18, 20};
    return degs;
}

struct SqrtCache {
    std::mutex mtx;
    std::map<int, SqrtApprox> by_degree; // certified fit per degree
    const SqrtApprox& get(int degree) {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = by_degree.find(degree);
        if (it == by_degree.end()) {
            SqrtApprox a;
            a.coeffs = fit_sqrt_poly(degree);
            a.degree = degree;
            a.delta = certify_sqrt_poly(a.coeffs);
            it = by_degree.emplace(degree, std::move(a)).first;
        }
        return it->second;
    }
};

inline SqrtCache& sqrt_cache() {
    static SqrtCache cache;
    return cache;
}

} // namespace detail

/// Smallest-degree certified polynomial with P(0) = 0 and
/// sup_{[0,1]} |sqrt(t) - P(t)| <= delta. Throws std::domain_error when no
/// degree within the cap certifies the requested delta; double-precision
/// monomial coefficients bound the reachable delta from below (about 1.4e-2)
/// regardless of the cap.
inline SqrtApprox sqrt_poly_approx(double delta, int degree_cap = 512) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("sqrt_poly_approx: delta must lie in (0,1)");
    double best = 1e300;
    for (int deg : detail::sqrt_fit_degrees()) {
        if (deg > degree_cap) break;
        const SqrtApprox& a = detail::sqrt_cache().get(deg);
        best = std::min(best, a.delta);
        if (a.delta <= delta) return a;
    }
    throw std::domain_error("sqrt_poly_approx: delta " + std::to_string(delta) +
                            " needs a degree beyond the cap; best certified " +
                            std::to_string(best));
}

/// Best certified approximation reachable within the degree cap.
inline SqrtApprox sqrt_poly_floor(int degree_cap = 512) {
    SqrtApprox best;
    best.delta = 1e300;
    for (int deg : detail::sqrt_fit_degrees()) {
        if (deg > degree_cap) break;
        const SqrtApprox& a = detail::sqrt_cache().get(deg);
        if (a.delta < best.delta) best = a;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Unitary dilation of a contraction.
// ---------------------------------------------------------------------------

/// 2d x 2d block unitary [[A, (I-AA*)^{1/2}], [(I-A*A)^{1/2}, -A*]].
/// Singular values of A up to 1 + 1e-6 are tolerated; the defect blocks clamp
/// tiny negative eigenvalues to zero.
inline CMatrix halmos_dilate(const CMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("halmos_dilate: matrix must be square");
    const double nrm = op_norm(a);
    if (nrm > 1.0 + 1e-6)
        throw std::invalid_argument("halmos_dilate: norm exceeds 1 + 1e-6, not a contraction");
    const Eigen::Index d = a.rows();
    const CMatrix eye = CMatrix::Identity(d, d);
    const CMatrix sl = psd_sqrt(eye - a * a.adjoint(), 1e-8, 3e-6);
    const CMatrix sr = psd_sqrt(eye - a.adjoint() * a, 1e-8, 3e-6);
    CMatrix u(2 * d, 2 * d);
    u.topLeftCorner(d, d) = a;
    u.topRightCorner(d, d) = sl;
    u.bottomLeftCorner(d, d) = sr;
    u.bottomRightCorner(d, d) = -a.adjoint();
    return u;
}

// ---------------------------------------------------------------------------
// The almost-commuting dilation pair.
// ---------------------------------------------------------------------------

/// Inputs for the dilation: unitary tuples us and vs on a common space, a
/// finite-rank projection p, and a partial isometry w with w*w = p and
/// w w* orthogonal to p. The certified commutator bound additionally needs
/// the us to commute with the vs.
struct DilationInput {
    MatTuple us;
    MatTuple vs;
    CMatrix p;
    CMatrix w;

    /// Returns the worst input-commutation defect max |u_i v_j - v_j u_i|.
    double validate(double tol = 1e-10, double commute_tol = 1e-8) const {
        if (us.count() == 0 || vs.count() == 0)
            throw std::invalid_argument("DilationInput: empty tuple");
        if (us.dim != vs.dim || us.dim != p.rows() || p.rows() != p.cols() ||
            w.rows() != us.dim || w.cols() != us.dim)
            throw std::invalid_argument("DilationInput: dimension mismatch");
        const CMatrix eye = CMatrix::Identity(us.dim, us.dim);
        for (const auto& u : us.mats)
            if (op_norm(u.adjoint() * u - eye) > tol)
                throw std::invalid_argument("DilationInput: us must be unitary");
        for (const auto& v : vs.mats)
            if (op_norm(v.adjoint() * v - eye) > tol)
                throw std::invalid_argument("DilationInput: vs must be unitary");
        if (hermitian_defect(p) > tol || op_norm(p * p - p) > tol)
            throw std::invalid_argument("DilationInput: p is not a projection");
        if (op_norm(w.adjoint() * w - p) > tol)
            throw std::invalid_argument("DilationInput: w*w != p");
        const CMatrix q = w * w.adjoint();
        if (op_norm(q * p) > tol)
            throw std::invalid_argument("DilationInput: w w* is not orthogonal to p");
        double defect = 0.0;
        for (const auto& u : us.mats)
            for (const auto& v : vs.mats) defect = std::max(defect, op_norm(u * v - v * u));
        if (defect > commute_tol)
            throw std::invalid_argument("DilationInput: us and vs must commute (defect " +
                                        std::to_string(defect) + ")");
        return defect;
    }
};

/// Dilated tuples on range(p + q) plus every measured quantity entering the
/// certified bound 4t + 2t D_delta + delta.
struct DilationResult {
    MatTuple us; ///< the dilated unitaries U_i
    MatTuple vs; ///< the transported V_j
    double t_measured = 0.0;
    double d_delta = 0.0;
    double delta_requested = 0.0;
    double delta_effective = 0.0; ///< 4x the certified polynomial error actually used
    double bound = 0.0;           ///< 4t + 2t D_delta + delta_effective
    int poly_degree = 0;
    double input_commutation_defect = 0.0;
    std::vector<std::vector<double>> commutators; ///< measured |U_i V_j - V_j U_i|
    double max_commutator = 0.0;
};

/// The dilation construction: compress the us to range(p), dilate each
/// compression to a unitary on range(p) + range(q) through the defect square
/// roots, and transport the vs by p . p + w . w*. Exact PSD square roots build
/// the operators; the polynomial approximation only certifies the bound.
inline DilationResult commuting_pair(const DilationInput& input, double delta,
                                     int degree_cap = 512) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("commuting_pair: delta must lie in (0,1)");
    const double input_defect = input.validate();

    const CMatrix pb = projection_range_basis(input.p);
    const Eigen::Index r = pb.cols();
    if (r == 0) throw std::invalid_argument("commuting_pair: p has rank zero");
    const CMatrix q = input.w * input.w.adjoint();
    const CMatrix qb = projection_range_basis(q);
    if (qb.cols() != r)
        throw std::invalid_argument("commuting_pair: ranks of p and w w* differ");
    const CMatrix wc = qb.adjoint() * input.w * pb; // unitary r x r

    double t = 0.0;
    for (const auto& v : input.vs.mats) t = std::max(t, op_norm(input.p * v - v * input.p));

    const CMatrix eye = CMatrix::Identity(r, r);
    std::vector<CMatrix> us2;
    for (const auto& u : input.us.mats) {
        const CMatrix a = pb.adjoint() * u * pb;
        const CMatrix sl = psd_sqrt(eye - a * a.adjoint(), 1e-8, 3e-6);
        const CMatrix sr = psd_sqrt(eye - a.adjoint() * a, 1e-8, 3e-6);
        CMatrix bu(2 * r, 2 * r);
        bu.topLeftCorner(r, r) = a;
        bu.topRightCorner(r, r) = sl * wc.adjoint();
        bu.bottomLeftCorner(r, r) = wc * sr;
        bu.bottomRightCorner(r, r) = -wc * a.adjoint() * wc.adjoint();
        us2.push_back(std::move(bu));
    }
    std::vector<CMatrix> vs2;
    for (const auto& v : input.vs.mats) {
        const CMatrix b = pb.adjoint() * v * pb;
        CMatrix bv = CMatrix::Zero(2 * r, 2 * r);
        bv.topLeftCorner(r, r) = b;
        bv.bottomRightCorner(r, r) = wc * b * wc.adjoint();
        vs2.push_back(std::move(bv));
    }

    // bound certification through the polynomial approximation of sqrt
    SqrtApprox approx;
    try {
        approx = sqrt_poly_approx(delta / 4.0, degree_cap);
    } catch (const std::domain_error&) {
        approx = sqrt_poly_floor(degree_cap); // requested split unreachable in
                                              // stored double coefficients
    }

    DilationResult out;
    out.us = MatTuple(std::move(us2));
    out.vs = MatTuple(std::move(vs2));
    out.t_measured = t;
    out.d_delta = 3.0 * approx.derivative_bound();
    out.delta_requested = delta;
    out.delta_effective = 4.0 * approx.delta;
    out.poly_degree = approx.degree;
    out.bound = 4.0 * t + 2.0 * t * out.d_delta + out.delta_effective;
    out.input_commutation_defect = input_defect;
    out.commutators.assign(input.us.count(), std::vector<double>(input.vs.count(), 0.0));
    for (std::size_t i = 0; i < out.us.count(); ++i)
        for (std::size_t j = 0; j < out.vs.count(); ++j) {
            const double c = op_norm(out.us[i] * out.vs[j] - out.vs[j] * out.us[i]);
            out.commutators[i][j] = c;
            out.max_commutator = std::max(out.max_commutator, c);
        }
    return out;
}

/// Random trial input: commuting unitary tuples (common eigenbasis), plus a
/// projection pair taken from a slightly rotated frame so that p almost
/// commutes with the vs (perturbation 0 gives t = 0 up to roundoff).
inline DilationInput random_dilation_input(Eigen::Index dim, std::size_t n, std::size_t m,
                                           std::uint64_t seed, double perturbation = 0.02) {
    if (dim < 2) throw std::invalid_argument("random_dilation_input: dim must be >= 2");
    if (n == 0 || m == 0) throw std::invalid_argument("random_dilation_input: empty tuple");
    Rng rng(seed);
    const CMatrix w0 = haar_unitary(dim, rng.next_u64());
    auto phase_tuple = [&](std::size_t count) {
        std::vector<CMatrix> mats;
        for (std::size_t i = 0; i < count; ++i) {
            CVector d(dim);
            for (Eigen::Index k = 0; k < dim; ++k)
                d(k) = std::polar(1.0, 2.0 * M_PI * rng.uniform());
            mats.push_back(w0 * d.asDiagonal() * w0.adjoint());
        }
        return MatTuple(std::move(mats));
    };
    DilationInput input;
    input.us = phase_tuple(n);
    input.vs = phase_tuple(m);

    CMatrix frame = w0;
    if (perturbation > 0.0) {
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j)
                frame(i, j) += perturbation * Complex(rng.gaussian(), rng.gaussian());
        Eigen::HouseholderQR<CMatrix> qr(frame);
        frame = qr.householderQ();
    }
    const Eigen::Index r = std::max<Eigen::Index>(1, dim / 3);
    if (2 * r > dim) throw std::invalid_argument("random_dilation_input: dim too small for rank split");
    const CMatrix pb = frame.leftCols(r);
    const CMatrix qb = frame.middleCols(r, r);
    input.p = pb * pb.adjoint();
    input.w = qb * pb.adjoint();
    return input;
}

// ---------------------------------------------------------------------------
// Tail direct sums.
// ---------------------------------------------------------------------------

/// Componentwise direct sum of models[N1..M] (one-based, inclusive). Every
/// polynomial norm on the result equals the max over the included blocks.
inline MatTuple tail_direct_sum(const std::vector<MatTuple>& models, std::size_t n1,
                                std::size_t m) {
    if (n1 < 1 || n1 > m || m > models.size())
        throw std::out_of_range("tail_direct_sum: indices must satisfy 1 <= N1 <= M <= count");
    const std::size_t gens = models[n1 - 1].count();
    for (std::size_t l = n1 - 1; l < m; ++l)
        if (models[l].count() != gens)
            throw std::invalid_argument("tail_direct_sum: models must share the generator count");
    std::vector<CMatrix> mats;
    for (std::size_t g = 0; g < gens; ++g) {
        std::vector<CMatrix> blocks;
        for (std::size_t l = n1 - 1; l < m; ++l) blocks.push_back(models[l][g]);
        mats.push_back(direct_sum(blocks));
    }
    return MatTuple(std::move(mats));
}

// ---------------------------------------------------------------------------
// Tensor microstates.
// ---------------------------------------------------------------------------

struct TensorMicrostateResult {
    DilationResult dilation;
    std::vector<double> witness_norms; ///< |P(U, V)| per supplied polynomial
};

/// Assemble the dilation input from tuples modeling u_i (x) 1 and 1 (x) z_j,
/// run the pair construction, and record norm lower-bound witnesses |P(U,V)|
/// for the supplied polynomials (variables: us first, then vs).
inline TensorMicrostateResult tensor_microstate(const MatTuple& us, const MatTuple& zs,
                                                const CMatrix& p, const CMatrix& w, double delta,
                                                const std::vector<NCPoly>& witness_polys = {}) {
    DilationInput input{us, zs, p, w};
    TensorMicrostateResult out;
    out.dilation = commuting_pair(input, delta);
    const int total = static_cast<int>(us.count() + zs.count());
    std::vector<CMatrix> joined = out.dilation.us.mats;
    joined.insert(joined.end(), out.dilation.vs.mats.begin(), out.dilation.vs.mats.end());
    const MatTuple model(std::move(joined));
    for (const auto& poly : witness_polys) {
        if (poly.num_vars() != total)
            throw std::invalid_argument("tensor_microstate: witness polynomial arity must be n + m");
        out.witness_norms.push_back(op_norm(evaluate(poly, model)));
    }
    return out;
}

} // namespace mflab
