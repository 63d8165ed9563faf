#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflab/matrix.hpp"
#include "mflab/ncpoly.hpp"
#include "mflab/oracles.hpp"
#include "mflab/pvcrossed.hpp"

namespace mflab {

// ---------------------------------------------------------------------------
// Microstate deviation reports.
// ---------------------------------------------------------------------------

struct MicrostateRow {
    std::size_t model_index = 0;
    std::size_t poly_index = 0;
    double model_norm = 0.0;
    double oracle_value = 0.0;
    double deviation = 0.0; ///< |model - oracle|, or signed slack for lower bounds
    bool oracle_is_lower_bound = false;
};

struct MicrostateReport {
    std::vector<MicrostateRow> rows;
    std::vector<double> max_deviation_per_model; ///< convergence trend
    double max_deviation = 0.0;
};

/// Per-model, per-polynomial deviations between model norms and the oracle.
/// Lower-bound oracles record one-sided slack (model - bound) instead of an
/// absolute deviation.
inline MicrostateReport microstate_report(const std::vector<MatTuple>& models,
                                          const std::vector<NCPoly>& polys,
                                          const NormOracle& oracle) {
    MicrostateReport rep;
    std::vector<double> oracle_values;
    for (std::size_t j = 0; j < polys.size(); ++j) oracle_values.push_back(oracle.value(polys[j], j));
    for (std::size_t m = 0; m < models.size(); ++m) {
        double worst = 0.0;
        for (std::size_t j = 0; j < polys.size(); ++j) {
            MicrostateRow row;
            row.model_index = m;
            row.poly_index = j;
            row.model_norm = op_norm(evaluate(polys[j], models[m]));
            row.oracle_value = oracle_values[j];
            row.oracle_is_lower_bound = oracle.is_lower_bound();
            row.deviation = row.oracle_is_lower_bound ? row.model_norm - row.oracle_value
                                                      : std::abs(row.model_norm - row.oracle_value);
            if (!row.oracle_is_lower_bound) worst = std::max(worst, row.deviation);
            rep.rows.push_back(row);
        }
        rep.max_deviation_per_model.push_back(worst);
        rep.max_deviation = std::max(rep.max_deviation, worst);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Quasidiagonal compression comparison.
// ---------------------------------------------------------------------------

struct CompressRow {
    std::size_t poly_index = 0;
    std::vector<double> vector_discrepancy; ///< |P(pxp)xi - P(x)xi| per vector
    double norm_discrepancy = 0.0;          ///< ||P(pxp)|_{B(pH)}| - |P(x)||
};

/// Compare evaluations through a finite-rank projection against the ambient
/// ones: vectorwise and in compressed operator norm.
inline std::vector<CompressRow> compress_compare(const MatTuple& model, const CMatrix& proj,
                                                 const std::vector<NCPoly>& polys,
                                                 const std::vector<CVector>& vectors) {
    if (hermitian_defect(proj) > 1e-10 || op_norm(proj * proj - proj) > 1e-10)
        throw std::invalid_argument("compress_compare: invalid projection");
    for (const auto& v : vectors)
        if (v.size() != model.dim)
            throw std::invalid_argument("compress_compare: vector dimension mismatch");
    // ambient compressions p x p and the compressed model on range(p)
    std::vector<CMatrix> pxp;
    for (const auto& x : model.mats) pxp.push_back(proj * x * proj);
    const MatTuple ambient_compressed(std::move(pxp));
    const CMatrix basis = projection_range_basis(proj);
    std::vector<CMatrix> xs;
    for (const auto& x : model.mats) xs.push_back(basis.adjoint() * x * basis);
    const MatTuple range_compressed(std::move(xs));

    std::vector<CompressRow> rows;
    for (std::size_t j = 0; j < polys.size(); ++j) {
        CompressRow row;
        row.poly_index = j;
        const CMatrix ambient = evaluate(polys[j], model);
        const CMatrix through_p = evaluate(polys[j], ambient_compressed);
        for (const auto& v : vectors) row.vector_discrepancy.push_back((through_p * v - ambient * v).norm());
        row.norm_discrepancy =
            std::abs(op_norm(evaluate(polys[j], range_compressed)) - op_norm(ambient));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Hypothesis certificates. Strict comparisons; slack is recorded, never
// rounded toward a pass.
// ---------------------------------------------------------------------------

struct CertCondition {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    double slack = 0.0; ///< threshold - measured
};

struct Certificate {
    std::vector<CertCondition> conditions;
    bool all_pass = true;

    void add(std::string name, double measured, double threshold) {
        CertCondition c{std::move(name), measured, threshold, measured <= threshold,
                        threshold - measured};
        all_pass = all_pass && c.pass;
        conditions.push_back(std::move(c));
    }
};

/// Almost-commuting hypotheses: every mixed commutator at most 1/r1, and the
/// V-side polynomial norms within 1/r1 of the oracle, for the first r1
/// polynomials.
inline Certificate certify_commuting_conditions(const MatTuple& us, const MatTuple& vs,
                                                const std::vector<NCPoly>& polys_q,
                                                const NormOracle& oracle_q, int r1) {
    if (r1 < 1) throw std::invalid_argument("certify_commuting_conditions: r1 must be >= 1");
    const double threshold = 1.0 / static_cast<double>(r1);
    Certificate cert;
    double worst = 0.0;
    for (std::size_t i = 0; i < us.count(); ++i)
        for (std::size_t j = 0; j < vs.count(); ++j)
            worst = std::max(worst, op_norm(us[i] * vs[j] - vs[j] * us[i]));
    cert.add("commutator", worst, threshold);
    const std::size_t checked = std::min<std::size_t>(polys_q.size(), static_cast<std::size_t>(r1));
    for (std::size_t j = 0; j < checked; ++j) {
        const double model = op_norm(evaluate(polys_q[j], vs));
        const double target = oracle_q.value(polys_q[j], j);
        cert.add("Q[" + std::to_string(j) + "]", std::abs(model - target), threshold);
    }
    return cert;
}

/// Crossed-model hypotheses: intertwining within 1/r1, shift polynomials
/// within 1/r1 of the circle oracle, and the (A,B) polynomials within 1/r1 of
/// the supplied reference norms.
inline Certificate certify_crossed_conditions(const CrossedModel& model,
                                              const std::vector<NCPoly>& polys_g,
                                              const std::vector<NCPoly>& polys_h,
                                              const NormOracle& oracle_g,
                                              const std::vector<double>& refs_h, int r1) {
    if (r1 < 1) throw std::invalid_argument("certify_crossed_conditions: r1 must be >= 1");
    if (polys_h.size() != refs_h.size())
        throw std::invalid_argument("certify_crossed_conditions: one reference per H polynomial");
    const double threshold = 1.0 / static_cast<double>(r1);
    Certificate cert;
    double worst = 0.0;
    for (std::size_t i = 0; i < model.A.count(); ++i)
        worst = std::max(worst, op_norm(model.U.adjoint() * model.A[i] -
                                        model.B[i] * model.U.adjoint()));
    cert.add("intertwine", worst, threshold);
    const MatTuple ut({model.U});
    const std::size_t gs = std::min<std::size_t>(polys_g.size(), static_cast<std::size_t>(r1));
    for (std::size_t j = 0; j < gs; ++j) {
        const double m = op_norm(evaluate(polys_g[j], ut));
        cert.add("G[" + std::to_string(j) + "]", std::abs(m - oracle_g.value(polys_g[j], j)),
                 threshold);
    }
    std::vector<CMatrix> ab = model.A.mats;
    ab.insert(ab.end(), model.B.mats.begin(), model.B.mats.end());
    const MatTuple abt(std::move(ab));
    const std::size_t hs = std::min<std::size_t>(polys_h.size(), static_cast<std::size_t>(r1));
    for (std::size_t j = 0; j < hs; ++j) {
        const double m = op_norm(evaluate(polys_h[j], abt));
        cert.add("H[" + std::to_string(j) + "]", std::abs(m - refs_h[j]), threshold);
    }
    return cert;
}

} // namespace mflab
