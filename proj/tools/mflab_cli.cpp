// Command-line driver for the matrix-model experiments: dilation trials,
// shift-frame decay sweeps, crossed-product models, freeness fuzzing, norm
// oracles and microstate reports. Every subcommand emits canonical JSON, so
// runs with a fixed seed are byte-reproducible.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mflab/mflab.hpp"

namespace {

using mflab::Json;

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> vals;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        vals.push_back(std::stoi(item));
    }
    if (vals.empty()) throw CLI::ValidationError("expected a comma-separated integer list");
    return vals;
}

/// Parse a polynomial, inferring the variable count from the letters used
/// when vars == 0.
mflab::NCPoly parse_poly(const std::string& text, int vars) {
    if (vars > 0) return mflab::parse(text, vars);
    const mflab::NCPoly wide = mflab::parse(text, 1 << 20);
    int used = 1;
    for (const auto& t : wide.terms())
        for (const auto& l : t.word) used = std::max(used, l.index);
    std::vector<mflab::NCPoly::Term> terms(wide.terms().begin(), wide.terms().end());
    return mflab::NCPoly(used, std::move(terms));
}

Json certificate_to_json(const mflab::Certificate& cert) {
    Json conditions = Json::array();
    for (const auto& c : cert.conditions) {
        Json j;
        j["name"] = c.name;
        j["measured"] = c.measured;
        j["threshold"] = c.threshold;
        j["pass"] = c.pass;
        j["slack"] = c.slack;
        conditions.push_back(std::move(j));
    }
    Json out;
    out["conditions"] = std::move(conditions);
    out["all_pass"] = cert.all_pass;
    return out;
}

Json dilation_result_to_json(const mflab::DilationResult& r, bool include_matrices) {
    Json j;
    j["t_measured"] = r.t_measured;
    j["d_delta"] = r.d_delta;
    j["delta_requested"] = r.delta_requested;
    j["delta_effective"] = r.delta_effective;
    j["bound"] = r.bound;
    j["poly_degree"] = r.poly_degree;
    j["input_commutation_defect"] = r.input_commutation_defect;
    j["max_commutator"] = r.max_commutator;
    Json rows = Json::array();
    for (const auto& row : r.commutators) rows.push_back(row);
    j["commutators"] = std::move(rows);
    j["bound_satisfied"] = r.max_commutator <= r.bound;
    if (include_matrices) {
        j["us"] = mflab::tuple_to_json(r.us);
        j["vs"] = mflab::tuple_to_json(r.vs);
    }
    return j;
}

Json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    Json j;
    f >> j;
    return j;
}

/// Orthogonal matrices of the standard (n-1)-dimensional representation of
/// S_n, from the permutation action restricted to the sum-zero subspace.
mflab::CMatrix standard_rep(const mflab::Perm& sigma) {
    const int n = sigma.size();
    Eigen::MatrixXd diff(n, n - 1);
    diff.setZero();
    for (int c = 0; c < n - 1; ++c) {
        diff(c, c) = 1.0;
        diff(c + 1, c) = -1.0;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(diff);
    Eigen::MatrixXd basis = Eigen::MatrixXd(qr.householderQ()).leftCols(n - 1);
    Eigen::MatrixXd pm = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i <= n; ++i) pm(sigma(i) - 1, i - 1) = 1.0;
    return (basis.transpose() * pm * basis).cast<mflab::Complex>();
}

struct Emitter {
    std::string out_path = "-";
    bool timing = false;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void add_options(CLI::App* cmd) {
        cmd->add_option("-o,--out", out_path, "Output path, - for stdout")->capture_default_str();
        cmd->add_flag("--timing", timing,
                      "Record wall-clock time (breaks byte-reproducibility)");
    }

    void write(const std::string& schema, const Json& config, Json payload) const {
        Json report = mflab::make_report(schema, config, std::move(payload));
        if (timing) {
            const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
            report["wall_clock_ms"] = static_cast<std::int64_t>(ms);
        }
        mflab::emit(report, out_path);
    }
};

int run_cli(int argc, char** argv) {
    CLI::App app{"matrix-model constructions and certified norm experiments"};
    app.require_subcommand(1);
    bool certificates_ok = true;

    // ---------------------------------------------------------------- dilate
    auto* dilate = app.add_subcommand("dilate", "Almost-commuting unitary dilation of a pair of tuples");
    struct {
        std::string input_path;
        bool random = false;
        int dim = 16;
        int n = 1, m = 1;
        std::uint64_t seed = 0;
        double perturb = 0.02;
        double delta = 0.1;
        bool matrices = false;
        Emitter emit;
    } dil;
    dilate->add_option("--input", dil.input_path, "DilationInput JSON file");
    dilate->add_flag("--random", dil.random, "Generate a random commuting input");
    dilate->add_option("--dim", dil.dim, "Ambient dimension (random mode)")->capture_default_str();
    dilate->add_option("--n", dil.n, "Number of u generators")->capture_default_str();
    dilate->add_option("--m", dil.m, "Number of v generators")->capture_default_str();
    auto* dil_seed = dilate->add_option("--seed", dil.seed, "RNG seed (random mode)");
    dilate->add_option("--perturb", dil.perturb, "Frame perturbation scale")->capture_default_str();
    dilate->add_option("--delta", dil.delta, "Bound parameter delta")->capture_default_str();
    dilate->add_flag("--matrices", dil.matrices, "Include the dilated matrices in the report");
    dil.emit.add_options(dilate);
    dilate->callback([&] {
        mflab::DilationInput input;
        if (dil.random) {
            if (!*dil_seed) throw CLI::ValidationError("--random requires --seed");
            input = mflab::random_dilation_input(dil.dim, static_cast<std::size_t>(dil.n),
                                                 static_cast<std::size_t>(dil.m), dil.seed,
                                                 dil.perturb);
        } else if (!dil.input_path.empty()) {
            const Json j = load_json_file(dil.input_path);
            input.us = mflab::tuple_from_json(j.at("us"));
            input.vs = mflab::tuple_from_json(j.at("vs"));
            input.p = mflab::matrix_from_json(j.at("p"));
            input.w = mflab::matrix_from_json(j.at("w"));
        } else {
            throw CLI::ValidationError("dilate needs --input or --random");
        }
        const auto result = mflab::commuting_pair(input, dil.delta);
        Json config;
        config["random"] = dil.random;
        config["dim"] = dil.dim;
        config["n"] = dil.n;
        config["m"] = dil.m;
        config["seed"] = dil.seed;
        config["perturb"] = dil.perturb;
        config["delta"] = dil.delta;
        certificates_ok = result.max_commutator <= result.bound;
        dil.emit.write("mflab/dilate/v1", config, dilation_result_to_json(result, dil.matrices));
    });

    // -------------------------------------------------------------------- pv
    auto* pv = app.add_subcommand("pv", "Shift-frame commutator decay sweep");
    struct {
        std::string nj_csv = "4,8,16,32,64,128,256";
        int ambient_factor = 4;
        int window_factor = 2;
        Emitter emit;
    } pvo;
    pv->add_option("--nj", pvo.nj_csv, "Frame ranks, comma separated")->capture_default_str();
    pv->add_option("--ambient-factor", pvo.ambient_factor, "L = factor * nj")->capture_default_str();
    pv->add_option("--window-factor", pvo.window_factor, "window = factor * nj")->capture_default_str();
    pvo.emit.add_options(pv);
    pv->callback([&] {
        const auto njs = parse_int_list(pvo.nj_csv);
        std::vector<double> norms(njs.size());
        mflab::parallel_for(njs.size(), [&](std::size_t i) {
            const int nj = njs[i];
            norms[i] = mflab::pv_frame(nj, static_cast<Eigen::Index>(pvo.ambient_factor) * nj,
                                      static_cast<Eigen::Index>(pvo.window_factor) * nj)
                           .commutator_norm;
        });
        Json rows = Json::array();
        mflab::Certificate cert;
        for (std::size_t i = 0; i < njs.size(); ++i) {
            Json row;
            row["nj"] = njs[i];
            row["commutator_norm"] = norms[i];
            rows.push_back(std::move(row));
            cert.add("pi-over-nj[" + std::to_string(njs[i]) + "]", norms[i], M_PI / njs[i]);
            if (i > 0)
                cert.add("decreasing[" + std::to_string(njs[i]) + "]", norms[i],
                         norms[i - 1] - 1e-15);
        }
        Json payload;
        payload["rows"] = std::move(rows);
        payload["certificate"] = certificate_to_json(cert);
        certificates_ok = cert.all_pass;
        Json config;
        config["nj"] = pvo.nj_csv;
        config["ambient_factor"] = pvo.ambient_factor;
        config["window_factor"] = pvo.window_factor;
        pvo.emit.write("mflab/pv/v1", config, std::move(payload));
    });

    // --------------------------------------------------------------- crossed
    auto* crossed = app.add_subcommand("crossed", "Crossed-product matrix model over the shift frame");
    struct {
        double theta = 0.3;
        std::string nj_csv = "16";
        int dim = 8;
        int gens = 1;
        std::uint64_t seed = 0;
        int prank = 0;
        std::vector<std::string> gpolys{"X1+X1'"};
        int r1 = 0;
        Emitter emit;
    } cro;
    crossed->add_option("--theta", cro.theta, "Gauge angle in (0,1)")->required();
    crossed->add_option("--nj", cro.nj_csv, "Frame ranks, comma separated")->capture_default_str();
    crossed->add_option("--dim", cro.dim, "Base dimension")->capture_default_str();
    crossed->add_option("--gens", cro.gens, "Number of base generators")->capture_default_str();
    crossed->add_option("--seed", cro.seed, "RNG seed for the base unitaries")->required();
    crossed->add_option("--prank", cro.prank, "Compression rank (default: full)");
    crossed->add_option("--gpoly", cro.gpolys, "Shift polynomials checked against the circle oracle")
        ->capture_default_str();
    crossed->add_option("--r1", cro.r1, "Emit a 1/r1 hypothesis certificate");
    cro.emit.add_options(crossed);
    crossed->callback([&] {
        std::vector<mflab::CMatrix> base_mats;
        mflab::Rng rng(cro.seed);
        for (int g = 0; g < cro.gens; ++g)
            base_mats.push_back(mflab::haar_unitary(cro.dim, rng.next_u64()));
        const mflab::MatTuple base(std::move(base_mats));
        const auto action = mflab::gauge_action(cro.theta, base);
        std::vector<mflab::NCPoly> gp;
        for (const auto& s : cro.gpolys) gp.push_back(mflab::parse(s, 1));
        const auto njs = parse_int_list(cro.nj_csv);
        Json rows = Json::array();
        for (const int nj : njs) {
            const auto orbit = mflab::orbit_model(base, action, nj + 1);
            const auto frame = mflab::pv_frame(nj);
            const Eigen::Index prank = cro.prank > 0 ? cro.prank : cro.dim;
            const auto model = mflab::build_crossed_model(orbit, frame, prank, gp);
            Json row;
            row["nj"] = nj;
            row["intertwine"] = model.report.intertwine;
            row["wraparound"] = model.report.wraparound;
            row["frame_commutator"] = model.report.frame_commutator;
            row["circle_deviation"] = model.report.circle_deviation;
            if (cro.r1 > 0) {
                const auto cert = mflab::certify_crossed_conditions(model, gp, {},
                                                                    mflab::NormOracle::circle(), {},
                                                                    cro.r1);
                row["certificate"] = certificate_to_json(cert);
                certificates_ok = certificates_ok && cert.all_pass;
            }
            rows.push_back(std::move(row));
        }
        Json payload;
        payload["rows"] = std::move(rows);
        Json config;
        config["theta"] = cro.theta;
        config["nj"] = cro.nj_csv;
        config["dim"] = cro.dim;
        config["gens"] = cro.gens;
        config["seed"] = cro.seed;
        config["prank"] = cro.prank;
        config["gpoly"] = cro.gpolys;
        config["r1"] = cro.r1;
        cro.emit.write("mflab/crossed/v1", config, std::move(payload));
    });

    // -------------------------------------------------------- finite-crossed
    auto* fcr = app.add_subcommand("finite-crossed", "Finite-group covariant pair on matrix blocks");
    struct {
        std::string group = "Z2";
        int base_dim = 2;
        std::string action = "ad-diag";
        int trials = 100;
        std::uint64_t seed = 0;
        Emitter emit;
    } fco;
    fcr->add_option("--group", fco.group, "Z<p> or S<n>")->capture_default_str();
    fcr->add_option("--base-dim", fco.base_dim, "Base matrix dimension")->capture_default_str();
    fcr->add_option("--action", fco.action, "trivial | ad-diag | standard")->capture_default_str();
    fcr->add_option("--trials", fco.trials, "Random matrices per element")->capture_default_str();
    fcr->add_option("--seed", fco.seed, "RNG seed")->required();
    fco.emit.add_options(fcr);
    fcr->callback([&] {
        mflab::GroupHandle group = mflab::GroupHandle::integers();
        if (fco.group.size() >= 2 && fco.group[0] == 'Z')
            group = mflab::GroupHandle::cyclic(std::stol(fco.group.substr(1)));
        else if (fco.group.size() >= 2 && fco.group[0] == 'S')
            group = mflab::GroupHandle::symmetric(std::stoi(fco.group.substr(1)));
        else
            throw CLI::ValidationError("--group must be Z<p> or S<n>");
        const auto elements = group.elements();
        std::vector<mflab::CMatrix> conj;
        const mflab::CMatrix eye = mflab::CMatrix::Identity(fco.base_dim, fco.base_dim);
        if (fco.action == "trivial") {
            conj.assign(elements.size(), eye);
        } else if (fco.action == "ad-diag") {
            if (group.family() != mflab::GroupHandle::Family::Zp)
                throw CLI::ValidationError("ad-diag needs a cyclic group");
            mflab::CVector d(fco.base_dim);
            for (int k = 0; k < fco.base_dim; ++k)
                d(k) = std::polar(1.0, 2.0 * M_PI * k / group.order_p());
            const mflab::CMatrix w = d.asDiagonal();
            for (const auto& e : elements) {
                const long long r = std::get<mflab::ZpElem>(e.value).r;
                mflab::CMatrix acc = eye;
                for (long long i = 0; i < r; ++i) acc = acc * w;
                conj.push_back(acc);
            }
        } else if (fco.action == "standard") {
            if (group.family() != mflab::GroupHandle::Family::S ||
                fco.base_dim != group.degree() - 1)
                throw CLI::ValidationError("standard action needs S<n> with base dim n-1");
            for (const auto& e : elements) conj.push_back(standard_rep(std::get<mflab::Perm>(e.value)));
        } else {
            throw CLI::ValidationError("unknown action kind");
        }
        const auto fc = mflab::finite_group_crossed(fco.base_dim, group, conj);
        mflab::Rng rng(fco.seed);
        mflab::Certificate cert;
        Json rows = Json::array();
        for (std::size_t h = 0; h < fc.order(); ++h) {
            double worst = 0.0;
            for (int trial = 0; trial < fco.trials; ++trial) {
                mflab::CMatrix a(fco.base_dim, fco.base_dim);
                for (int i = 0; i < fco.base_dim; ++i)
                    for (int j = 0; j < fco.base_dim; ++j)
                        a(i, j) = mflab::Complex(rng.gaussian(), rng.gaussian());
                worst = std::max(worst, fc.covariance_residual(h, a / std::max(1.0, mflab::op_norm(a))));
            }
            Json row;
            row["element"] = group.str(fc.elements[h]);
            row["max_covariance_residual"] = worst;
            rows.push_back(std::move(row));
            cert.add("covariance[" + std::to_string(h) + "]", worst, 1e-12);
        }
        certificates_ok = cert.all_pass;
        Json payload;
        payload["rows"] = std::move(rows);
        payload["certificate"] = certificate_to_json(cert);
        Json config;
        config["group"] = fco.group;
        config["base_dim"] = fco.base_dim;
        config["action"] = fco.action;
        config["trials"] = fco.trials;
        config["seed"] = fco.seed;
        fco.emit.write("mflab/finite-crossed/v1", config, std::move(payload));
    });

    // -------------------------------------------------------------- freeness
    auto* freeness = app.add_subcommand("freeness", "Fuzz the conjugated-power freeness witness");
    struct {
        int n = 2;
        int m = 3;
        int trials = 1000;
        std::uint64_t seed = 0;
        int power = 3;
        int max_exp = 3;
        Emitter emit;
    } fro;
    freeness->add_option("--n", fro.n, "Free rank / permutation degree")->capture_default_str();
    freeness->add_option("--m", fro.m, "Maximum number of power blocks")->capture_default_str();
    freeness->add_option("--trials", fro.trials, "Trial count")->capture_default_str();
    freeness->add_option("--seed", fro.seed, "RNG seed")->required();
    freeness->add_option("--power", fro.power, "Exponent of the product generator")->capture_default_str();
    freeness->add_option("--max-exp", fro.max_exp, "Exponent magnitude cap")->capture_default_str();
    fro.emit.add_options(freeness);
    freeness->callback([&] {
        if (fro.n < 2) throw CLI::ValidationError("freeness needs n >= 2");
        std::vector<Json> failures;
        int suffix_hits = 0;
        std::vector<std::size_t> lengths(static_cast<std::size_t>(fro.trials));
        std::vector<int> nonid(static_cast<std::size_t>(fro.trials)), suffix(static_cast<std::size_t>(fro.trials));
        std::vector<Json> descriptions(static_cast<std::size_t>(fro.trials));
        mflab::parallel_for(static_cast<std::size_t>(fro.trials), [&](std::size_t trial) {
            mflab::Rng rng(fro.seed, trial);
            const int blocks = static_cast<int>(rng.below(static_cast<std::uint64_t>(fro.m))) + 1;
            std::vector<long long> exps;
            for (int b = 0; b < blocks; ++b) {
                long long e = static_cast<long long>(rng.below(static_cast<std::uint64_t>(fro.max_exp))) + 1;
                if (rng.below(2)) e = -e;
                exps.push_back(e);
            }
            std::vector<mflab::Perm> perms;
            for (int b = 0; b + 1 < blocks; ++b) {
                mflab::Perm p(fro.n);
                do {
                    p = mflab::Perm::random(fro.n, rng);
                } while (p.is_identity() || (!perms.empty() && p == perms.back()));
                perms.push_back(p);
            }
            const auto rep = mflab::freeness_witness(fro.n, exps, perms, fro.power);
            nonid[trial] = rep.nonidentity ? 1 : 0;
            suffix[trial] = rep.suffix_matches ? 1 : 0;
            lengths[trial] = rep.word_length;
            Json d;
            d["exponents"] = exps;
            Json ps = Json::array();
            for (const auto& p : perms) ps.push_back(p.str());
            d["perms"] = std::move(ps);
            descriptions[trial] = std::move(d);
        });
        std::size_t max_len = 0;
        for (std::size_t trial = 0; trial < static_cast<std::size_t>(fro.trials); ++trial) {
            if (!nonid[trial]) failures.push_back(descriptions[trial]);
            suffix_hits += suffix[trial];
            max_len = std::max(max_len, lengths[trial]);
        }
        mflab::Certificate cert;
        cert.add("identity_failures", static_cast<double>(failures.size()), 0.0);
        cert.add("suffix_misses", static_cast<double>(fro.trials - suffix_hits), 0.0);
        certificates_ok = cert.all_pass;
        Json payload;
        payload["failures"] = failures;
        payload["suffix_matches"] = suffix_hits;
        payload["trials"] = fro.trials;
        payload["max_word_length"] = max_len;
        payload["certificate"] = certificate_to_json(cert);
        Json config;
        config["n"] = fro.n;
        config["m"] = fro.m;
        config["trials"] = fro.trials;
        config["seed"] = fro.seed;
        config["power"] = fro.power;
        config["max_exp"] = fro.max_exp;
        fro.emit.write("mflab/freeness/v1", config, std::move(payload));
    });

    // ----------------------------------------------------------------- coset
    auto* coset = app.add_subcommand("coset", "Coset decomposition against a built-in system");
    struct {
        std::string example = "z-2z";
        std::string g_text;
        int random_count = 0;
        std::uint64_t seed = 0;
        Emitter emit;
    } cso;
    coset->add_option("--example", cso.example, "z-2z | f2-s2")->capture_default_str();
    coset->add_option("--g", cso.g_text, "Element, e.g. t^5 for z-2z");
    coset->add_option("--random", cso.random_count, "Decompose this many random elements");
    coset->add_option("--seed", cso.seed, "RNG seed (random mode)");
    cso.emit.add_options(coset);
    coset->callback([&] {
        mflab::CosetSystem sys = cso.example == "z-2z"
                                     ? mflab::coset_system_z_mod_2z()
                                     : mflab::coset_system_semidirect_over_free(2);
        if (cso.example != "z-2z" && cso.example != "f2-s2")
            throw CLI::ValidationError("unknown coset example");
        std::vector<mflab::GroupElem> targets;
        if (!cso.g_text.empty()) {
            if (cso.example != "z-2z")
                throw CLI::ValidationError("--g text form is only supported for z-2z");
            if (cso.g_text.rfind("t^", 0) != 0)
                throw CLI::ValidationError("element must look like t^<k>");
            targets.push_back(mflab::GroupElem(mflab::ZElem{std::stoll(cso.g_text.substr(2))}));
        }
        if (cso.random_count > 0) {
            if (cso.seed == 0 && !coset->count("--seed"))
                throw CLI::ValidationError("--random requires --seed");
            mflab::Rng rng(cso.seed);
            for (int i = 0; i < cso.random_count; ++i) targets.push_back(sys.group.random(rng));
        }
        if (targets.empty()) throw CLI::ValidationError("coset needs --g or --random");
        Json rows = Json::array();
        for (const auto& g : targets) {
            const auto dec = mflab::coset_decompose(sys, g);
            Json row;
            row["g"] = sys.group.str(g);
            Json sigma = Json::array(), hs = Json::array();
            for (std::size_t i = 0; i < dec.sigma.size(); ++i) {
                sigma.push_back(dec.sigma[i] + 1); // one-based in reports
                hs.push_back(sys.group.str(dec.h[i]));
            }
            row["sigma"] = std::move(sigma);
            row["h"] = std::move(hs);
            rows.push_back(std::move(row));
        }
        Json payload;
        payload["rows"] = std::move(rows);
        payload["system"] = sys.name;
        Json config;
        config["example"] = cso.example;
        config["g"] = cso.g_text;
        config["random"] = cso.random_count;
        config["seed"] = cso.seed;
        cso.emit.write("mflab/coset/v1", config, std::move(payload));
    });

    // ------------------------------------------------------------------ norm
    auto* norm = app.add_subcommand("norm", "Circle or torus sup-norm oracle");
    struct {
        std::string oracle = "circle";
        int m = 1;
        std::string poly;
        Emitter emit;
    } noo;
    norm->add_option("--oracle", noo.oracle, "circle | torus")->capture_default_str();
    norm->add_option("--m", noo.m, "Torus arity")->capture_default_str();
    norm->add_option("--poly", noo.poly, "Polynomial text")->required();
    noo.emit.add_options(norm);
    norm->callback([&] {
        double value = 0.0;
        if (noo.oracle == "circle")
            value = mflab::circle_norm(mflab::parse(noo.poly, 1));
        else if (noo.oracle == "torus")
            value = mflab::torus_norm(parse_poly(noo.poly, noo.m), noo.m);
        else
            throw CLI::ValidationError("unknown oracle kind");
        Json payload;
        payload["value"] = value;
        Json config;
        config["oracle"] = noo.oracle;
        config["m"] = noo.m;
        config["poly"] = noo.poly;
        noo.emit.write("mflab/norm/v1", config, std::move(payload));
    });

    // ------------------------------------------------------------------ ball
    auto* ball = app.add_subcommand("ball", "Cayley-ball lower bounds for reduced free-group norms");
    struct {
        int n = 2;
        std::string poly;
        int radius = 6;
        int from = 0;
        std::size_t cap = 2000000;
        Emitter emit;
    } blo;
    ball->add_option("--n", blo.n, "Free-group rank")->capture_default_str();
    ball->add_option("--poly", blo.poly, "Polynomial text")->required();
    ball->add_option("--radius", blo.radius, "Largest radius")->capture_default_str();
    ball->add_option("--from", blo.from, "Starting radius (default: polynomial degree)");
    ball->add_option("--cap", blo.cap, "Vertex cap")->capture_default_str();
    blo.emit.add_options(ball);
    ball->callback([&] {
        const auto p = mflab::parse(blo.poly, blo.n);
        const int from = blo.from > 0 ? blo.from : std::max<int>(1, static_cast<int>(p.degree()));
        const auto rows = mflab::ball_lower_bound_sweep(p, from, blo.radius, blo.cap);
        double triangle = 0.0;
        for (const auto& t : p.terms()) triangle += std::abs(t.coeff);
        mflab::Certificate cert;
        Json jrows = Json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Json row;
            row["radius"] = rows[i].radius;
            row["ball_size"] = rows[i].ball_size;
            row["lower"] = rows[i].lower;
            row["bracket_upper"] = rows[i].bracket_upper;
            jrows.push_back(std::move(row));
            cert.add("triangle[" + std::to_string(rows[i].radius) + "]", rows[i].lower, triangle);
            if (i > 0)
                cert.add("monotone[" + std::to_string(rows[i].radius) + "]",
                         rows[i - 1].lower - rows[i].lower, 1e-12);
        }
        certificates_ok = cert.all_pass;
        Json payload;
        payload["rows"] = std::move(jrows);
        payload["triangle_upper_bound"] = triangle;
        payload["certificate"] = certificate_to_json(cert);
        Json config;
        config["n"] = blo.n;
        config["poly"] = blo.poly;
        config["radius"] = blo.radius;
        config["from"] = from;
        config["cap"] = blo.cap;
        blo.emit.write("mflab/ball/v1", config, std::move(payload));
    });

    // ---------------------------------------------------------------- report
    auto* report = app.add_subcommand("report", "Microstate deviation report for models against an oracle");
    struct {
        std::string models_path;
        std::string polys_path;
        int vars = 1;
        std::string oracle = "circle";
        Emitter emit;
    } rpo;
    report->add_option("--models", rpo.models_path, "JSON file with a list of matrix tuples")->required();
    report->add_option("--polys", rpo.polys_path, "Text file, one polynomial per line")->required();
    report->add_option("--vars", rpo.vars, "Variable count")->capture_default_str();
    report->add_option("--oracle", rpo.oracle,
                       "circle | torus:<m> | exact:<tuple.json> | ball:<radius> | const:<v1,v2,...>")
        ->capture_default_str();
    rpo.emit.add_options(report);
    report->callback([&] {
        const Json mj = load_json_file(rpo.models_path);
        std::vector<mflab::MatTuple> models;
        for (const auto& t : (mj.is_array() ? mj : mj.at("models"))) models.push_back(mflab::tuple_from_json(t));
        std::ifstream pf(rpo.polys_path);
        if (!pf) throw std::runtime_error("cannot open " + rpo.polys_path);
        std::vector<mflab::NCPoly> polys;
        std::string line;
        while (std::getline(pf, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            polys.push_back(mflab::parse(line, rpo.vars));
        }
        mflab::NormOracle oracle = mflab::NormOracle::circle();
        if (rpo.oracle == "circle") {
        } else if (rpo.oracle.rfind("torus:", 0) == 0) {
            oracle = mflab::NormOracle::torus(std::stoi(rpo.oracle.substr(6)));
        } else if (rpo.oracle.rfind("exact:", 0) == 0) {
            oracle = mflab::NormOracle::exact_matrix(
                mflab::tuple_from_json(load_json_file(rpo.oracle.substr(6))));
        } else if (rpo.oracle.rfind("ball:", 0) == 0) {
            oracle = mflab::NormOracle::ball(std::stoi(rpo.oracle.substr(5)));
        } else if (rpo.oracle.rfind("const:", 0) == 0) {
            std::vector<double> vals;
            std::stringstream ss(rpo.oracle.substr(6));
            std::string item;
            while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
            oracle = mflab::NormOracle::user_constant(std::move(vals));
        } else {
            throw CLI::ValidationError("unknown oracle spec");
        }
        const auto rep = mflab::microstate_report(models, polys, oracle);
        Json rows = Json::array();
        for (const auto& r : rep.rows) {
            Json row;
            row["model"] = r.model_index;
            row["poly"] = r.poly_index;
            row["model_norm"] = r.model_norm;
            row["oracle_value"] = r.oracle_value;
            row["deviation"] = r.deviation;
            row["oracle_is_lower_bound"] = r.oracle_is_lower_bound;
            rows.push_back(std::move(row));
        }
        Json payload;
        payload["rows"] = std::move(rows);
        payload["max_deviation_per_model"] = rep.max_deviation_per_model;
        payload["max_deviation"] = rep.max_deviation;
        Json config;
        config["models"] = rpo.models_path;
        config["polys"] = rpo.polys_path;
        config["vars"] = rpo.vars;
        config["oracle"] = rpo.oracle;
        rpo.emit.write("mflab/report/v1", config, std::move(payload));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 1;
    }
    return certificates_ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
