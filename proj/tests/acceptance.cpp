// Acceptance suite: runs every quantitative criterion end to end and prints
// one pass/fail line each. Exit status is the number of failed criteria.
//
// Usage: acceptance [--only N] [--skip N]

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mflab/mflab.hpp"

namespace {

using namespace mflab;
using Clock = std::chrono::steady_clock;

struct Criterion {
    int number;
    std::string title;
    double time_budget_s;
    std::function<bool(std::string&)> body;
};

bool check(bool cond, std::string& detail, const std::string& msg) {
    if (!cond) {
        if (!detail.empty()) detail += "; ";
        detail += msg;
    }
    return cond;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

// ---------------------------------------------------------------- criterion 1
bool dilation_unitarity(std::string& detail) {
    const int trials = 200;
    std::vector<double> defects(trials);
    parallel_for(trials, [&](std::size_t i) {
        Rng rng(0xACC1, i);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(64));
        const Eigen::Index big = d + 1 + static_cast<Eigen::Index>(rng.below(16));
        const CMatrix u = haar_unitary(big, rng.next_u64());
        const CMatrix a = u.topLeftCorner(d, d);
        const CMatrix dil = halmos_dilate(a);
        defects[i] = op_norm(dil.adjoint() * dil - CMatrix::Identity(2 * d, 2 * d));
    });
    double worst = 0.0;
    for (double v : defects) worst = std::max(worst, v);
    return check(worst <= 1e-8, detail, "worst unitarity defect " + fmt(worst));
}

// ---------------------------------------------------------------- criterion 2
bool dilation_bound(std::string& detail) {
    const std::array<double, 2> deltas{0.1, 0.01};
    const int per_delta = 60;
    bool ok = true;
    for (double delta : deltas) {
        std::vector<DilationResult> results(per_delta);
        parallel_for(per_delta, [&](std::size_t i) {
            Rng rng(0xACC2 + static_cast<std::uint64_t>(delta * 1000), i);
            const Eigen::Index dim = 6 + static_cast<Eigen::Index>(rng.below(27)); // <= 32
            const std::size_t n = 1 + rng.below(2), m = 1 + rng.below(2);
            const std::array<double, 4> perturbs{0.0, 0.005, 0.02, 0.1};
            const double perturb = perturbs[i % perturbs.size()];
            const DilationInput input = random_dilation_input(dim, n, m, rng.next_u64(), perturb);
            results[i] = commuting_pair(input, delta);
        });
        for (const auto& r : results) {
            const double criterion_bound = 4.0 * r.t_measured + 2.0 * r.t_measured * r.d_delta + delta;
            ok = check(r.max_commutator <= criterion_bound, detail,
                       "violation at delta " + fmt(delta) + ": measured " + fmt(r.max_commutator) +
                           " > " + fmt(criterion_bound)) &&
                 ok;
            ok = check(r.max_commutator <= r.bound, detail,
                       "certified bound violated at delta " + fmt(delta)) &&
                 ok;
        }
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 3
bool pv_decay(std::string& detail) {
    const std::vector<int> njs{4, 8, 16, 32, 64, 128, 256};
    // dense-norm oracle values computed ahead of the build, frozen here
    const std::vector<double> frozen{0.3826834323650898, 0.19509032201612825,
                                     0.0980171403295606, 0.049067674327418015,
                                     0.024541228522912288, 0.012271538285719925,
                                     0.006135884649154475};
    std::vector<double> norms(njs.size());
    parallel_for(njs.size(), [&](std::size_t i) { norms[i] = pv_frame(njs[i]).commutator_norm; });
    bool ok = true;
    for (std::size_t i = 0; i < njs.size(); ++i) {
        ok = check(std::abs(norms[i] - frozen[i]) <= 1e-9, detail,
                   "nj " + std::to_string(njs[i]) + " drifted from frozen value: " + fmt(norms[i])) &&
             ok;
        ok = check(norms[i] <= M_PI / njs[i], detail,
                   "nj " + std::to_string(njs[i]) + " exceeds pi/nj") &&
             ok;
        if (i > 0)
            ok = check(norms[i] < norms[i - 1], detail,
                       "decay not strict at nj " + std::to_string(njs[i])) &&
                 ok;
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 4
bool shift_convergence(std::string& detail) {
    const NCPoly p = parse("X1 + X1'", 1);
    bool ok = true;
    double last = 1.0;
    for (int n : {8, 32, 64}) {
        const double model = op_norm(evaluate(p, MatTuple({truncated_shift(n)})));
        const double deviation = std::abs(model - 2.0);
        const double closed = 2.0 - 2.0 * std::cos(M_PI / (n + 1.0));
        ok = check(std::abs(deviation - closed) <= 1e-9, detail,
                   "N " + std::to_string(n) + ": deviation " + fmt(deviation) + " vs closed form " +
                       fmt(closed)) &&
             ok;
        last = deviation;
    }
    ok = check(last <= 0.01, detail, "deviation at N=64 above 0.01: " + fmt(last)) && ok;
    return ok;
}

// ---------------------------------------------------------------- criterion 5
bool ball_bounds(std::string& detail) {
    const NCPoly p = parse("X1+X1'+X2+X2'", 2);
    const auto rows = ball_lower_bound_sweep(p, 1, 10);
    const double kesten = 2.0 * std::sqrt(3.0);
    bool ok = true;
    double prev = 0.0;
    for (const auto& row : rows) {
        ok = check(row.lower >= prev - 1e-12, detail,
                   "monotonicity broken at radius " + std::to_string(row.radius)) &&
             ok;
        ok = check(row.lower <= kesten + 1e-6, detail,
                   "radius " + std::to_string(row.radius) + " above the Kesten value") &&
             ok;
        prev = row.lower;
    }
    const double r10 = rows.back().lower;
    ok = check(r10 >= 3.3, detail, "radius-10 bound too small: " + fmt(r10)) && ok;
    // frozen from the sparse eigensolver oracle
    ok = check(std::abs(r10 - 3.361781879) <= 1e-5, detail,
               "radius-10 bound drifted from frozen value: " + fmt(r10)) &&
         ok;
    return ok;
}

// ---------------------------------------------------------------- criterion 6
bool covariance(std::string& detail) {
    bool ok = true;
    // Z2 acting on M2 by Ad(diag(1,-1))
    {
        CMatrix w = CMatrix::Identity(2, 2);
        w(1, 1) = -1.0;
        const auto fc =
            finite_group_crossed(2, GroupHandle::cyclic(2), {CMatrix::Identity(2, 2), w});
        Rng rng(0xACC6);
        for (int trial = 0; trial < 100; ++trial) {
            CMatrix a(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) a(i, j) = Complex(rng.gaussian(), rng.gaussian());
            for (std::size_t h = 0; h < fc.order(); ++h)
                ok = check(fc.covariance_residual(h, a) <= 1e-12 * std::max(1.0, op_norm(a)),
                           detail, "Z2 covariance residual too large") &&
                     ok;
        }
    }
    // S3 acting on M2 through the standard representation
    {
        const GroupHandle s3 = GroupHandle::symmetric(3);
        const auto elements = s3.elements();
        Eigen::MatrixXd diff(3, 2);
        diff << 1, 0, -1, 1, 0, -1;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(diff);
        const Eigen::MatrixXd basis = Eigen::MatrixXd(qr.householderQ()).leftCols(2);
        std::vector<CMatrix> conj;
        for (const auto& e : elements) {
            const Perm& s = std::get<Perm>(e.value);
            Eigen::MatrixXd pm = Eigen::MatrixXd::Zero(3, 3);
            for (int i = 1; i <= 3; ++i) pm(s(i) - 1, i - 1) = 1.0;
            conj.push_back((basis.transpose() * pm * basis).cast<Complex>());
        }
        const auto fc = finite_group_crossed(2, s3, conj);
        Rng rng(0xACC7);
        for (int trial = 0; trial < 100; ++trial) {
            CMatrix a(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) a(i, j) = Complex(rng.gaussian(), rng.gaussian());
            for (std::size_t h = 0; h < fc.order(); ++h)
                ok = check(fc.covariance_residual(h, a) <= 1e-12 * std::max(1.0, op_norm(a)),
                           detail, "S3 covariance residual too large") &&
                     ok;
        }
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 7
bool coset_reconstruction(std::string& detail) {
    bool ok = true;
    for (const auto& sys : {coset_system_z_mod_2z(), coset_system_semidirect_over_free(2)}) {
        Rng rng(0xACC8);
        for (int trial = 0; trial < 1000; ++trial) {
            const GroupElem g = sys.group.random(rng);
            try {
                const auto dec = coset_decompose(sys, g); // verifies reconstruction internally
                for (const auto& h : dec.h)
                    ok = check(sys.in_subgroup(h), detail, "h outside the subgroup") && ok;
            } catch (const std::exception& e) {
                ok = check(false, detail, std::string("decomposition failed: ") + e.what());
            }
        }
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 8
bool freeness_fuzz(std::string& detail) {
    const int trials = 1000;
    std::vector<int> nonid(trials), suffix(trials);
    parallel_for(trials, [&](std::size_t trial) {
        Rng rng(0xACC9, trial);
        const int n = 2 + static_cast<int>(rng.below(3));  // n <= 4
        const int blocks = 1 + static_cast<int>(rng.below(4)); // m <= 4
        std::vector<long long> exps;
        for (int b = 0; b < blocks; ++b) {
            long long e = 1 + static_cast<long long>(rng.below(3)); // |e| <= 3
            if (rng.below(2)) e = -e;
            exps.push_back(e);
        }
        std::vector<Perm> perms;
        for (int b = 0; b + 1 < blocks; ++b) {
            Perm p(n);
            do {
                p = Perm::random(n, rng);
            } while (p.is_identity() || (!perms.empty() && p == perms.back()));
            perms.push_back(p);
        }
        const auto rep = freeness_witness(n, exps, perms);
        nonid[trial] = rep.nonidentity ? 1 : 0;
        suffix[trial] = rep.suffix_matches ? 1 : 0;
    });
    int id_failures = 0, suffix_misses = 0;
    for (int i = 0; i < trials; ++i) {
        id_failures += 1 - nonid[i];
        suffix_misses += 1 - suffix[i];
    }
    bool ok = check(id_failures == 0, detail,
                    std::to_string(id_failures) + " words reduced to the identity");
    ok = check(suffix_misses == 0, detail,
               std::to_string(suffix_misses) + " words missed the suffix pattern") &&
         ok;
    return ok;
}

// ---------------------------------------------------------------- criterion 9
bool crossed_demo(std::string& detail) {
    const double theta = 0.3;
    const MatTuple base({haar_unitary(8, 0xACCA)});
    const auto action = gauge_action(theta, base);
    const std::vector<int> njs{16, 32, 64};
    // implementer oracle values, frozen ahead of the build
    const std::vector<double> frozen_intertwine{1.1699098112892672, 1.8998218541398406,
                                                1.1752164447276678};
    const std::vector<NCPoly> gp{parse("X1 + X1'", 1)};
    std::vector<double> intertwine, circle_dev;
    for (const int nj : njs) {
        const OrbitModel orbit = orbit_model(base, action, nj + 1);
        const CrossedModel model = build_crossed_model(orbit, pv_frame(nj), 8, gp);
        intertwine.push_back(model.report.intertwine);
        circle_dev.push_back(model.report.circle_deviation[0]);
    }
    bool ok = true;
    for (std::size_t i = 0; i < njs.size(); ++i)
        ok = check(std::abs(intertwine[i] - frozen_intertwine[i]) <= 1e-9, detail,
                   "intertwine at nj " + std::to_string(njs[i]) +
                       " drifted from frozen value: " + fmt(intertwine[i])) &&
             ok;
    for (std::size_t i = 1; i < njs.size(); ++i) {
        ok = check(intertwine[i] < intertwine[i - 1], detail,
                   "intertwining defect not strictly decreasing: " + fmt(intertwine[i - 1]) +
                       " -> " + fmt(intertwine[i])) &&
             ok;
        ok = check(circle_dev[i] < circle_dev[i - 1], detail,
                   "circle deviation not strictly decreasing") &&
             ok;
    }
    return ok;
}

// --------------------------------------------------------------- criterion 10
bool ncpoly_properties(std::string& detail) {
    int roundtrip_failures = 0, hom_failures = 0;
    Rng rng(0xACCB);
    for (int i = 0; i < 10000; ++i) {
        const int nv = 1 + static_cast<int>(rng.below(3));
        std::vector<NCPoly::Term> terms;
        const std::size_t nterms = rng.below(7);
        for (std::size_t t = 0; t < nterms; ++t) {
            Word w;
            const std::size_t len = rng.below(5);
            for (std::size_t l = 0; l < len; ++l)
                w.push_back(Letter{static_cast<int>(rng.below(static_cast<std::uint64_t>(nv))) + 1,
                                   rng.below(2) == 1});
            terms.push_back({Complex(rng.gaussian(), rng.gaussian()), std::move(w)});
        }
        const NCPoly p(nv, std::move(terms));
        if (!(parse(format(p), nv) == p)) ++roundtrip_failures;
    }
    for (int i = 0; i < 400; ++i) {
        const int nv = 2;
        auto rand_poly = [&](int max_terms, int max_len) {
            std::vector<NCPoly::Term> terms;
            const std::size_t nterms = rng.below(static_cast<std::uint64_t>(max_terms) + 1);
            for (std::size_t t = 0; t < nterms; ++t) {
                Word w;
                const std::size_t len = rng.below(static_cast<std::uint64_t>(max_len) + 1);
                for (std::size_t l = 0; l < len; ++l)
                    w.push_back(Letter{static_cast<int>(rng.below(2)) + 1, rng.below(2) == 1});
                terms.push_back({Complex(rng.gaussian(), rng.gaussian()), std::move(w)});
            }
            return NCPoly(nv, std::move(terms));
        };
        const NCPoly p = rand_poly(5, 4), q = rand_poly(5, 4);
        const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng.below(15)); // <= 16
        std::vector<CMatrix> mats;
        for (int g = 0; g < nv; ++g) {
            CMatrix m(dim, dim);
            for (Eigen::Index r = 0; r < dim; ++r)
                for (Eigen::Index c = 0; c < dim; ++c)
                    m(r, c) = 0.4 * Complex(rng.gaussian(), rng.gaussian());
            mats.push_back(std::move(m));
        }
        const MatTuple model(std::move(mats));
        const CMatrix pe = evaluate(p, model), qe = evaluate(q, model);
        if (op_norm(evaluate(adjoint(p), model) - pe.adjoint()) >
            1e-12 * std::max(1.0, op_norm(pe)))
            ++hom_failures;
        if (op_norm(evaluate(p * q, model) - pe * qe) >
            1e-10 * std::max(1.0, op_norm(pe) * op_norm(qe)))
            ++hom_failures;
    }
    bool ok = check(roundtrip_failures == 0, detail,
                    std::to_string(roundtrip_failures) + " round-trip failures");
    ok = check(hom_failures == 0, detail,
               std::to_string(hom_failures) + " homomorphism failures") &&
         ok;
    return ok;
}

// --------------------------------------------------------------- criterion 11
bool cli_determinism(std::string& detail) {
    const char* cli = std::getenv("MFLAB_CLI");
    if (!cli) {
        detail = "MFLAB_CLI not set";
        return false;
    }
    auto capture = [&](const std::string& args) {
        const std::string cmd = std::string(cli) + " " + args + " 2>/dev/null";
        std::string out;
        std::array<char, 4096> buf{};
        FILE* pipe = popen(cmd.c_str(), "r");
        if (!pipe) return std::string();
        std::size_t n = 0;
        while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
        pclose(pipe);
        return out;
    };
    const std::vector<std::string> scenarios{
        "pv --nj 4,8",
        "dilate --random --dim 10 --n 1 --m 1 --seed 5 --delta 0.1",
        "freeness --n 2 --m 2 --trials 40 --seed 3",
        "crossed --theta 0.25 --nj 8 --dim 4 --seed 9",
        "finite-crossed --group Z2 --base-dim 2 --action ad-diag --trials 10 --seed 4",
        "coset --example f2-s2 --random 5 --seed 12",
        "norm --oracle circle --poly \"X1+X1'\"",
        "ball --n 2 --poly \"X1+X1'+X2+X2'\" --radius 3",
    };
    bool ok = true;
    for (const auto& s : scenarios) {
        const std::string a = capture(s), b = capture(s);
        ok = check(!a.empty() && a == b, detail, "scenario not byte-identical: " + s) && ok;
    }
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only, skip;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if ((arg == "--only" || arg == "--skip") && i + 1 < argc) {
            (arg == "--only" ? only : skip).insert(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: acceptance [--only N] [--skip N]\n";
            return 64;
        }
    }

    std::vector<Criterion> criteria{
        {1, "dilation unitarity over 200 random contractions", 10.0, dilation_unitarity},
        {2, "dilation commutator bound certification", 30.0, dilation_bound},
        {3, "frame commutator decay and pi/nj envelope", 60.0, pv_decay},
        {4, "truncated-shift convergence to the circle norm", 5.0, shift_convergence},
        {5, "Cayley-ball lower bounds up to radius 10", 120.0, ball_bounds},
        {6, "finite-group covariance identity", 5.0, covariance},
        {7, "coset reconstruction identity", 5.0, coset_reconstruction},
        {8, "freeness witness fuzz", 10.0, freeness_fuzz},
        {9, "gauge-action crossed model demo", 60.0, crossed_demo},
        {10, "polynomial round-trip and homomorphism properties", 10.0, ncpoly_properties},
        {11, "CLI byte-level determinism", 120.0, cli_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && only.find(c.number) == only.end()) continue;
        if (skip.find(c.number) != skip.end()) continue;
        const auto start = Clock::now();
        std::string detail;
        bool pass = false;
        try {
            pass = c.body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start).count();
        if (secs > c.time_budget_s) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "over time budget " + fmt(c.time_budget_s) + " s";
        }
        std::printf("criterion %2d (%s): %s [%.2f s]%s%s\n", c.number, c.title.c_str(),
                    pass ? "PASS" : "FAIL", secs, detail.empty() ? "" : " -- ",
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    return failures;
}
