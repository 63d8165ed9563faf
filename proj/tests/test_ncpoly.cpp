#include <catch_amalgamated.hpp>

#include "mflab/matrix.hpp"
#include "mflab/ncpoly.hpp"
#include "mflab/rng.hpp"

using namespace mflab;

namespace {

NCPoly random_poly(Rng& rng, int num_vars, int max_terms = 6, int max_len = 4) {
    std::vector<NCPoly::Term> terms;
    const std::size_t nterms = rng.below(static_cast<std::uint64_t>(max_terms) + 1);
    for (std::size_t t = 0; t < nterms; ++t) {
        Word w;
        const std::size_t len = rng.below(static_cast<std::uint64_t>(max_len) + 1);
        for (std::size_t l = 0; l < len; ++l)
            w.push_back(Letter{static_cast<int>(rng.below(static_cast<std::uint64_t>(num_vars))) + 1,
                               rng.below(2) == 1});
        terms.push_back({Complex(rng.gaussian(), rng.gaussian()), std::move(w)});
    }
    return NCPoly(num_vars, std::move(terms));
}

MatTuple random_model(Rng& rng, int num_vars, Eigen::Index dim) {
    std::vector<CMatrix> mats;
    for (int i = 0; i < num_vars; ++i) {
        CMatrix m(dim, dim);
        for (Eigen::Index r = 0; r < dim; ++r)
            for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = 0.5 * Complex(rng.gaussian(), rng.gaussian());
        mats.push_back(std::move(m));
    }
    return MatTuple(std::move(mats));
}

} // namespace

TEST_CASE("parse the commutator") {
    const NCPoly p = parse("X1*X2 - X2*X1", 2);
    REQUIRE(p.terms().size() == 2);
    CHECK(p.terms()[0].coeff == Complex(1.0, 0.0));
    CHECK(p.terms()[1].coeff == Complex(-1.0, 0.0));
    CHECK(p.terms()[0].word.size() == 2);
}

TEST_CASE("parse adjoint markers and unit terms") {
    const NCPoly p = parse("X1 + X1'", 1);
    REQUIRE(p.terms().size() == 2);
    CHECK_FALSE(p.terms()[0].word[0].starred);
    CHECK(p.terms()[1].word[0].starred);

    const NCPoly q = parse("X1*X1' - 1", 1);
    REQUIRE(q.terms().size() == 2);
    CHECK(q.terms()[0].word.empty());
    CHECK(q.terms()[0].coeff == Complex(-1.0, 0.0));
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_AS(parse("X1 + ", 1), ParseError);
    CHECK_THROWS_AS(parse("X3", 2), ParseError);
    try {
        parse("X1 * $", 1);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 5);
    }
}

TEST_CASE("like terms merge exactly and zero terms vanish") {
    const NCPoly p = parse("X1 + X1 - 2*X1", 1);
    CHECK(p.is_zero());
    CHECK(format(p) == "0");
}

TEST_CASE("adjoint reverses words and conjugates") {
    const NCPoly p = parse("X1*X2", 2);
    CHECK(format(adjoint(p)) == "X2'*X1'");

    const NCPoly c = parse("(2 + 1i)", 1);
    const NCPoly cc = adjoint(c);
    REQUIRE(cc.terms().size() == 1);
    CHECK(cc.terms()[0].coeff == Complex(2.0, -1.0));

    const NCPoly sa = parse("X1 + X1'", 1);
    CHECK(adjoint(sa) == sa);
}

TEST_CASE("adjoint is an involution on random polynomials") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const NCPoly p = random_poly(rng, 3);
        CHECK(adjoint(adjoint(p)) == p);
    }
}

TEST_CASE("evaluate identity, unitarity, hand-computed commutator") {
    CHECK(op_norm(evaluate(parse("X1", 1), MatTuple({CMatrix::Identity(2, 2)})) -
                  CMatrix::Identity(2, 2)) < 1e-15);

    const CMatrix u = haar_unitary(5, 8);
    CHECK(op_norm(evaluate(parse("X1*X1'", 1), MatTuple({u})) - CMatrix::Identity(5, 5)) < 1e-12);

    CMatrix x(2, 2), y(2, 2);
    x << 1.0, 0.0, 0.0, -1.0;
    y << 0.0, 1.0, 1.0, 0.0;
    const CMatrix c = evaluate(parse("X1*X2 - X2*X1", 2), MatTuple({x, y}));
    // by hand: [[0,-2],[2,0]]
    CHECK(std::abs(c(0, 1) - Complex(-2.0, 0.0)) < 1e-15);
    CHECK(std::abs(c(1, 0) - Complex(2.0, 0.0)) < 1e-15);
    CHECK(op_norm(c) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("evaluate dimension and arity errors") {
    CHECK_THROWS_AS(evaluate(parse("X1", 2), MatTuple({CMatrix::Identity(2, 2)})),
                    std::invalid_argument);
    CHECK_THROWS_AS(MatTuple({CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)}),
                    std::invalid_argument);
}

TEST_CASE("format canonical order and fixtures") {
    CHECK(format(NCPoly(1)) == "0");
    const NCPoly st(1, {{Complex(1.0, 0.0), {Letter{1, false}, Letter{1, true}}}});
    CHECK(format(st) == "X1*X1'");
    CHECK(format(parse("X2+X1", 2)) == "X1 + X2");
}

TEST_CASE("round trip holds for generated polynomials") {
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const NCPoly p = random_poly(rng, 3);
        const NCPoly back = parse(format(p), 3);
        CHECK(back == p);
    }
}

TEST_CASE("round trip keeps exotic coefficients") {
    const NCPoly p(2, {{Complex(-0.1, 0.0), {Letter{1, false}}},
                       {Complex(0.0, -2.5), {Letter{2, true}}},
                       {Complex(1e-21, -3.5), {}},
                       {Complex(-1.0, 0.0), {Letter{1, true}, Letter{2, false}}}});
    CHECK(parse(format(p), 2) == p);
}

TEST_CASE("evaluation is a *-homomorphism") {
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        const int nv = 2;
        const NCPoly p = random_poly(rng, nv);
        const NCPoly q = random_poly(rng, nv);
        const MatTuple model = random_model(rng, nv, 6);
        const CMatrix pe = evaluate(p, model);
        CHECK(op_norm(evaluate(adjoint(p), model) - pe.adjoint()) < 1e-12 * std::max(1.0, op_norm(pe)));
        const CMatrix qe = evaluate(q, model);
        const CMatrix prod = evaluate(p * q, model);
        CHECK(op_norm(prod - pe * qe) < 1e-10 * std::max(1.0, op_norm(pe) * op_norm(qe)));
    }
}
