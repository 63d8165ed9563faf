#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflab/rng.hpp"

namespace mflab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Ordered tuple of same-dimension square matrices; one matrix model of a
/// generator tuple.
struct MatTuple {
    Eigen::Index dim = 0;
    std::vector<CMatrix> mats;

    MatTuple() = default;
    explicit MatTuple(std::vector<CMatrix> ms) {
        mats = std::move(ms);
        if (!mats.empty()) {
            dim = mats.front().rows();
            for (const auto& m : mats) {
                if (m.rows() != dim || m.cols() != dim)
                    throw std::invalid_argument("MatTuple: matrices must be square and share one dimension");
            }
        }
    }

    std::size_t count() const { return mats.size(); }
    const CMatrix& operator[](std::size_t i) const { return mats.at(i); }
};

inline void ensure_finite(const CMatrix& m, const char* what = "matrix") {
    if (!m.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

inline double hermitian_defect(const CMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

namespace detail {

/// Certified largest singular value of a dense matrix via power iteration on
/// m* m. The Rayleigh quotient is a lower bound; the residual widens it into a
/// two-sided bracket. Returns the certified lower end.
inline double power_iteration_norm(const CMatrix& m, double rel_tol = 1e-12,
                                   int max_iters = 20000) {
    const Eigen::Index n = m.cols();
    if (n == 0 || m.rows() == 0) return 0.0;
    Rng rng(0x6d666c61626e726dull, static_cast<std::uint64_t>(n));
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    v.normalize();
    double theta = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        CVector bv = m.adjoint() * (m * v);
        theta = std::real(v.dot(bv));
        const double resid = (bv - theta * v).norm();
        if (resid <= 0.5 * rel_tol * std::max(theta, 1e-300)) break;
        const double nrm = bv.norm();
        if (nrm == 0.0) return 0.0;
        v = bv / nrm;
    }
    return std::sqrt(std::max(theta, 0.0));
}

} // namespace detail

/// Operator norm (largest singular value). Full SVD up to dimension 512,
/// certified power iteration beyond that.
inline double op_norm(const CMatrix& m) {
    ensure_finite(m, "op_norm");
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    const Eigen::Index n = std::max(m.rows(), m.cols());
    if (n <= 48) {
        Eigen::JacobiSVD<CMatrix> svd(m);
        return svd.singularValues()(0);
    }
    if (n <= 512) {
        Eigen::BDCSVD<CMatrix> svd(m);
        return svd.singularValues()(0);
    }
    return detail::power_iteration_norm(m);
}

/// Hermitian PSD square root via eigendecomposition. Eigenvalues in
/// [-1e-10, 0) are clamped to zero; values below -1e-6 signal an invalid
/// contraction upstream and raise.
inline CMatrix psd_sqrt(const CMatrix& m, double herm_tol = 1e-10,
                        double neg_eig_limit = 1e-6) {
    ensure_finite(m, "psd_sqrt");
    if (m.rows() != m.cols()) throw std::invalid_argument("psd_sqrt: matrix must be square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (hermitian_defect(m) > herm_tol * scale)
        throw std::invalid_argument("psd_sqrt: matrix not Hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<CMatrix> es((m + m.adjoint()) / 2.0);
    if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigensolver failed");
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -neg_eig_limit * scale)
            throw std::invalid_argument("psd_sqrt: eigenvalue below -1e-6, input is not PSD");
        if (ev(i) < 0.0) ev(i) = 0.0;
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

/// Haar-distributed random unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phases folded back in. Deterministic per seed.
inline CMatrix haar_unitary(Eigen::Index dim, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be >= 1");
    Rng rng(seed);
    CMatrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
            g(i, j) = Complex(rng.gaussian(), rng.gaussian());
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j) {
        const Complex d = r(j, j);
        const double a = std::abs(d);
        q.col(j) *= (a > 0.0) ? d / a : Complex(1.0, 0.0);
    }
    return q;
}

/// Kronecker product. The entry count of the result is capped (default 2^20)
/// to keep desk-scale experiments bounded.
inline CMatrix kron(const CMatrix& a, const CMatrix& b,
                    std::size_t entry_cap = (std::size_t{1} << 20)) {
    const std::size_t rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
    const std::size_t cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
    if (rows == 0 || cols == 0) return CMatrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (rows > entry_cap / cols)
        throw std::invalid_argument("kron: result exceeds the configured entry cap");
    CMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Block-diagonal direct sum.
inline CMatrix direct_sum(const std::vector<CMatrix>& ms) {
    Eigen::Index total = 0;
    for (const auto& m : ms) {
        if (m.rows() != m.cols()) throw std::invalid_argument("direct_sum: blocks must be square");
        total += m.rows();
    }
    CMatrix out = CMatrix::Zero(total, total);
    Eigen::Index off = 0;
    for (const auto& m : ms) {
        out.block(off, off, m.rows(), m.rows()) = m;
        off += m.rows();
    }
    return out;
}

/// Rank-one projection v v* / |v|^2.
inline CMatrix rank1_projection(const CVector& v) {
    const double n2 = v.squaredNorm();
    if (n2 <= 0.0) throw std::invalid_argument("rank1_projection: zero vector");
    return (v * v.adjoint()) / n2;
}

/// Identity on d dimensions.
inline CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

/// One-sided truncated shift on n dimensions: e_i -> e_{i+1}, e_{n-1} -> 0.
inline CMatrix truncated_shift(Eigen::Index n) {
    CMatrix t = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) t(i + 1, i) = 1.0;
    return t;
}

/// Coordinate projection onto the first r basis vectors of a d-dim space.
inline CMatrix coordinate_projection(Eigen::Index d, Eigen::Index r) {
    if (r < 0 || r > d) throw std::invalid_argument("coordinate_projection: rank out of range");
    CMatrix p = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < r; ++i) p(i, i) = 1.0;
    return p;
}

/// Orthonormal basis of the range of a projection (columns), obtained from the
/// eigenvectors with eigenvalue near one.
inline CMatrix projection_range_basis(const CMatrix& p, double tol = 1e-8) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es((p + p.adjoint()) / 2.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 1.0 - tol) keep.push_back(i);
    CMatrix basis(p.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
    return basis;
}

/// Partial isometry w with w*w = p and w w* = q, for orthogonal projections of
/// equal rank, built by matching orthonormal range bases.
inline CMatrix partial_isometry(const CMatrix& p, const CMatrix& q, double tol = 1e-8) {
    const CMatrix bp = projection_range_basis(p, tol);
    const CMatrix bq = projection_range_basis(q, tol);
    if (bp.cols() != bq.cols())
        throw std::invalid_argument("partial_isometry: projections have different ranks");
    if (op_norm(q * p) > tol * static_cast<double>(p.rows()))
        throw std::invalid_argument("partial_isometry: projections are not orthogonal");
    return bq * bp.adjoint();
}

} // namespace mflab
