#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mflab/rng.hpp"

namespace mflab {

/// Minimal CSR sparse complex matrix; only what the ball-truncation operators
/// need (assembly from triplets, matvec, adjoint matvec).
class SparseMatrix {
  public:
    SparseMatrix(std::size_t rows, std::size_t cols,
                 const std::vector<std::size_t>& ti, const std::vector<std::size_t>& tj,
                 const std::vector<std::complex<double>>& tv)
        : rows_(rows), cols_(cols) {
        if (ti.size() != tj.size() || ti.size() != tv.size())
            throw std::invalid_argument("SparseMatrix: triplet arrays must have equal length");
        std::vector<std::size_t> order(ti.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return ti[a] != ti[b] ? ti[a] < ti[b] : tj[a] < tj[b];
        });
        std::vector<std::size_t> counts(rows_, 0);
        col_.reserve(order.size());
        val_.reserve(order.size());
        std::size_t last_i = static_cast<std::size_t>(-1), last_j = 0;
        for (std::size_t k : order) {
            if (ti[k] >= rows_ || tj[k] >= cols_)
                throw std::invalid_argument("SparseMatrix: triplet index out of range");
            if (!val_.empty() && ti[k] == last_i && tj[k] == last_j) {
                val_.back() += tv[k]; // merge duplicates
                continue;
            }
            last_i = ti[k];
            last_j = tj[k];
            col_.push_back(tj[k]);
            val_.push_back(tv[k]);
            counts[ti[k]]++;
        }
        row_ptr_.assign(rows_ + 1, 0);
        for (std::size_t r = 0; r < rows_; ++r) row_ptr_[r + 1] = row_ptr_[r] + counts[r];
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return val_.size(); }

    void multiply(const std::vector<std::complex<double>>& x,
                  std::vector<std::complex<double>>& y) const {
        y.assign(rows_, {0.0, 0.0});
        for (std::size_t r = 0; r < rows_; ++r) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                acc += val_[k] * x[col_[k]];
            y[r] = acc;
        }
    }

    void multiply_adjoint(const std::vector<std::complex<double>>& x,
                          std::vector<std::complex<double>>& y) const {
        y.assign(cols_, {0.0, 0.0});
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                y[col_[k]] += std::conj(val_[k]) * x[r];
    }

  private:
    std::size_t rows_, cols_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<std::complex<double>> val_;
};

struct SingularValueBracket {
    double lower = 0.0; ///< certified: some unit v attains |Av| >= lower
    double upper = 0.0; ///< Rayleigh residual bracket end
    int iterations = 0;
    bool converged = false;
};

/// Largest singular value of a sparse operator by power iteration on A*A.
/// The Rayleigh quotient gives a certified lower bound; the residual widens it
/// to a bracket. An optional warm-start vector (zero-padded to size) makes
/// nested-compression sweeps monotone; on return it holds the final iterate.
inline SingularValueBracket sparse_largest_singular_value(
    const SparseMatrix& a, double bracket_width = 1e-6, int max_iters = 100000,
    std::vector<std::complex<double>>* warm_start = nullptr) {
    const std::size_t n = a.cols();
    std::vector<std::complex<double>> v(n), av, bv(n);
    if (warm_start && !warm_start->empty()) {
        for (std::size_t i = 0; i < n; ++i)
            v[i] = i < warm_start->size() ? (*warm_start)[i] : std::complex<double>{0.0, 0.0};
    } else {
        Rng rng(0x62616c6c6e6f726dull, n);
        for (std::size_t i = 0; i < n; ++i) v[i] = {rng.gaussian(), rng.gaussian()};
    }
    auto norm = [](const std::vector<std::complex<double>>& x) {
        double s = 0.0;
        for (const auto& c : x) s += std::norm(c);
        return std::sqrt(s);
    };
    {
        const double nv = norm(v);
        if (nv == 0.0) return {};
        for (auto& c : v) c /= nv;
    }
    SingularValueBracket out;
    for (int it = 1; it <= max_iters; ++it) {
        a.multiply(v, av);
        a.multiply_adjoint(av, bv);
        double theta = 0.0;
        for (std::size_t i = 0; i < n; ++i) theta += std::real(std::conj(v[i]) * bv[i]);
        theta = std::max(theta, 0.0);
        double resid2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) resid2 += std::norm(bv[i] - theta * v[i]);
        const double resid = std::sqrt(resid2);
        out.lower = std::sqrt(theta);
        out.upper = std::sqrt(theta + resid);
        out.iterations = it;
        if (out.upper - out.lower <= bracket_width) {
            out.converged = true;
            break;
        }
        const double nb = norm(bv);
        if (nb == 0.0) break;
        for (std::size_t i = 0; i < n; ++i) v[i] = bv[i] / nb;
    }
    if (warm_start) *warm_start = v;
    return out;
}

} // namespace mflab
