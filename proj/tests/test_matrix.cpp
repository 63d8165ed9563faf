#include <catch_amalgamated.hpp>

#include "mflab/matrix.hpp"
#include "mflab/ncpoly.hpp"
#include "mflab/rng.hpp"

using namespace mflab;

namespace {

CMatrix random_matrix(Eigen::Index d, Rng& rng, double scale = 1.0) {
    CMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = scale * Complex(rng.gaussian(), rng.gaussian());
    return m;
}

} // namespace

TEST_CASE("op_norm on hand-computed matrices") {
    CHECK(op_norm(CMatrix::Identity(3, 3)) == Catch::Approx(1.0).margin(1e-12));

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = Complex(0.0, -4.0);
    CHECK(op_norm(d) == Catch::Approx(4.0).margin(1e-12));

    // nilpotent [[0,2],[0,0]]: m*m = diag(0,4), largest singular value 2
    CMatrix n = CMatrix::Zero(2, 2);
    n(0, 1) = 2.0;
    CHECK(op_norm(n) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("op_norm rejects non-finite entries") {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(op_norm(m), std::invalid_argument);
}

TEST_CASE("op_norm unitary invariance and C*-identity") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index d = 3 + static_cast<Eigen::Index>(rng.below(14));
        const CMatrix m = random_matrix(d, rng);
        const CMatrix u = haar_unitary(d, rng.next_u64());
        const CMatrix v = haar_unitary(d, rng.next_u64());
        const double nm = op_norm(m);
        CHECK(op_norm(u * m * v) == Catch::Approx(nm).epsilon(1e-9));
        CHECK(op_norm(m.adjoint() * m) == Catch::Approx(nm * nm).epsilon(1e-9));
    }
}

TEST_CASE("op_norm power-iteration path agrees with block structure") {
    // dimension above the SVD cutoff, with a known norm from the block layout
    Rng rng(5);
    const CMatrix a = random_matrix(12, rng);
    const double na = op_norm(a);
    std::vector<CMatrix> blocks;
    blocks.push_back(a);
    for (int i = 0; i < 48; ++i) blocks.push_back(0.5 * random_matrix(12, rng));
    const CMatrix big = direct_sum(blocks); // 588 dims
    REQUIRE(big.rows() > 512);
    CHECK(op_norm(big) == Catch::Approx(na).epsilon(1e-9));
}

TEST_CASE("psd_sqrt diagonal and 2x2 eigensolve oracle") {
    CHECK(op_norm(psd_sqrt(CMatrix::Identity(4, 4)) - CMatrix::Identity(4, 4)) < 1e-12);

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    CMatrix r = psd_sqrt(d);
    CHECK(std::abs(r(0, 0) - Complex(2.0, 0.0)) < 1e-12);
    CHECK(std::abs(r(1, 1) - Complex(3.0, 0.0)) < 1e-12);

    CMatrix m(2, 2);
    m << Complex(2, 0), Complex(1, 0), Complex(1, 0), Complex(2, 0);
    const CMatrix s = psd_sqrt(m);
    CHECK(op_norm(s * s - m) < 1e-10);
    CHECK(hermitian_defect(s) < 1e-12);
}

TEST_CASE("psd_sqrt scaling and error paths") {
    Rng rng(7);
    const CMatrix g = random_matrix(6, rng);
    const CMatrix m = g * g.adjoint();
    const double c = 3.7;
    CHECK(op_norm(psd_sqrt(c * m) - std::sqrt(c) * psd_sqrt(m)) < 1e-9 * op_norm(m));

    CMatrix nh = m;
    nh(0, 1) += Complex(0.0, 0.5);
    CHECK_THROWS_AS(psd_sqrt(nh), std::invalid_argument);

    CMatrix neg = CMatrix::Identity(2, 2);
    neg(1, 1) = -0.1;
    CHECK_THROWS_AS(psd_sqrt(neg), std::invalid_argument);
}

TEST_CASE("haar_unitary determinism, unitarity, scalar case") {
    const CMatrix u1 = haar_unitary(8, 1234);
    const CMatrix u2 = haar_unitary(8, 1234);
    CHECK((u1 - u2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(op_norm(u1.adjoint() * u1 - CMatrix::Identity(8, 8)) < 1e-12);

    const CMatrix s = haar_unitary(1, 99);
    CHECK(std::abs(std::abs(s(0, 0)) - 1.0) < 1e-12);

    CHECK_THROWS_AS(haar_unitary(0, 1), std::invalid_argument);
}

TEST_CASE("haar_unitary moment E|tr U|^2 = 1 within 3 sigma") {
    const int samples = 1000;
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) {
        const CMatrix u = haar_unitary(8, 50000 + static_cast<std::uint64_t>(i));
        acc += std::norm(u.trace());
    }
    const double mean = acc / samples;
    // Var |tr U|^2 = E|tr|^4 - 1 = 1 for Haar, so sigma of the mean is 1/sqrt(N)
    CHECK(std::abs(mean - 1.0) < 3.0 / std::sqrt(static_cast<double>(samples)));
}

TEST_CASE("kron identities, commutation and norm multiplicativity") {
    CHECK(op_norm(kron(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)) -
                  CMatrix::Identity(6, 6)) == 0.0);

    Rng rng(21);
    const CMatrix a = random_matrix(3, rng);
    const CMatrix b = random_matrix(4, rng);
    const CMatrix ai = kron(a, CMatrix::Identity(4, 4));
    const CMatrix ib = kron(CMatrix::Identity(3, 3), b);
    CHECK((ai * ib - ib * ai).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(op_norm(kron(a, b)) == Catch::Approx(op_norm(a) * op_norm(b)).epsilon(1e-9));

    CHECK_THROWS_AS(kron(CMatrix::Identity(2048, 2048), CMatrix::Identity(2048, 2048)),
                    std::invalid_argument);
}

TEST_CASE("direct_sum norms and blockwise evaluation") {
    CMatrix b1(1, 1), b2(1, 1);
    b1(0, 0) = 2.0;
    b2(0, 0) = 5.0;
    const CMatrix ds = direct_sum({b1, b2});
    CHECK(op_norm(ds) == Catch::Approx(5.0).margin(1e-12));

    Rng rng(31);
    const NCPoly p = parse("X1*X2 + 2*X2'*X1 - 1", 2);
    std::vector<CMatrix> xs, ys;
    for (int k = 0; k < 3; ++k) {
        xs.push_back(random_matrix(4, rng, 0.5));
        ys.push_back(random_matrix(4, rng, 0.5));
    }
    const MatTuple joint({direct_sum({xs[0], xs[1], xs[2]}), direct_sum({ys[0], ys[1], ys[2]})});
    const CMatrix whole = evaluate(p, joint);
    // oracle: evaluate blockwise and direct-sum the results
    std::vector<CMatrix> blocks;
    double maxblock = 0.0;
    for (int k = 0; k < 3; ++k) {
        blocks.push_back(evaluate(p, MatTuple({xs[static_cast<std::size_t>(k)], ys[static_cast<std::size_t>(k)]})));
        maxblock = std::max(maxblock, op_norm(blocks.back()));
    }
    CHECK(op_norm(whole - direct_sum(blocks)) < 1e-12);
    CHECK(op_norm(whole) == Catch::Approx(maxblock).margin(1e-12));
}

TEST_CASE("rank1_projection") {
    CVector e0(2);
    e0 << 1.0, 0.0;
    const CMatrix p0 = rank1_projection(e0);
    CHECK(std::abs(p0(0, 0) - Complex(1, 0)) < 1e-15);
    CHECK(std::abs(p0(1, 1)) < 1e-15);

    CVector v(2);
    v << 1.0, 1.0;
    const CMatrix ph = rank1_projection(v);
    CHECK(std::abs(ph(0, 1) - Complex(0.5, 0.0)) < 1e-15);

    Rng rng(41);
    CVector w(5);
    for (int i = 0; i < 5; ++i) w(i) = Complex(rng.gaussian(), rng.gaussian());
    const CMatrix p = rank1_projection(w);
    CHECK(op_norm(p * p - p) < 1e-12);
    CHECK(hermitian_defect(p) < 1e-12);

    CHECK_THROWS_AS(rank1_projection(CVector::Zero(3)), std::invalid_argument);
}

TEST_CASE("partial_isometry matches the projection pair") {
    const CMatrix p = coordinate_projection(6, 2);
    CMatrix q = CMatrix::Zero(6, 6);
    q(2, 2) = q(3, 3) = 1.0;
    const CMatrix w = partial_isometry(p, q);
    CHECK(op_norm(w.adjoint() * w - p) < 1e-10);
    CHECK(op_norm(w * w.adjoint() - q) < 1e-10);

    CHECK_THROWS_AS(partial_isometry(p, coordinate_projection(6, 3)), std::invalid_argument);
}

TEST_CASE("truncated shift is a partial isometry") {
    const CMatrix t = truncated_shift(5);
    const CMatrix gram = t.adjoint() * t;
    CMatrix expect = CMatrix::Identity(5, 5);
    expect(4, 4) = 0.0;
    CHECK(op_norm(gram - expect) < 1e-15);
}
