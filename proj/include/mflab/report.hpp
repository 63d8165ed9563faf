#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mflab/matrix.hpp"

namespace mflab {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Matrix JSON: {"dim_rows": r, "dim_cols": c, "re": [...], "im": [...]},
// row-major; tuples as {"dim": d, "mats": [...]}.
// ---------------------------------------------------------------------------

inline Json matrix_to_json(const CMatrix& m) {
    Json j;
    j["dim_rows"] = m.rows();
    j["dim_cols"] = m.cols();
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            re.push_back(m(i, c).real());
            im.push_back(m(i, c).imag());
        }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j;
}

inline CMatrix matrix_from_json(const Json& j) {
    const Eigen::Index r = j.at("dim_rows").get<Eigen::Index>();
    const Eigen::Index c = j.at("dim_cols").get<Eigen::Index>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (r < 0 || c < 0 || re.size() != static_cast<std::size_t>(r * c) || im.size() != re.size())
        throw std::invalid_argument("matrix_from_json: entry count mismatch");
    CMatrix m(r, c);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index cc = 0; cc < c; ++cc, ++k)
            m(i, cc) = Complex(re[k].get<double>(), im[k].get<double>());
    ensure_finite(m, "matrix_from_json");
    return m;
}

inline Json tuple_to_json(const MatTuple& t) {
    Json j;
    j["dim"] = t.dim;
    Json mats = Json::array();
    for (const auto& m : t.mats) mats.push_back(matrix_to_json(m));
    j["mats"] = std::move(mats);
    return j;
}

inline MatTuple tuple_from_json(const Json& j) {
    std::vector<CMatrix> mats;
    for (const auto& mj : j.at("mats")) mats.push_back(matrix_from_json(mj));
    MatTuple t(std::move(mats));
    if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != t.dim)
        throw std::invalid_argument("tuple_from_json: declared dim disagrees with matrices");
    return t;
}

// ---------------------------------------------------------------------------
// Canonical serialization: object keys sorted (nlohmann's default map order),
// floating-point numbers printed with 17 significant digits, so identical
// payloads serialize to identical bytes.
// ---------------------------------------------------------------------------

namespace detail {

inline void canonical_dump_impl(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.cbegin(); it != j.cend(); ++it) {
                if (!first) out += ',';
                first = false;
                out += Json(it.key()).dump();
                out += ':';
                canonical_dump_impl(it.value(), out);
            }
            out += '}';
            break;
        }
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                canonical_dump_impl(v, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::number_float: {
            const double x = j.get<double>();
            if (!std::isfinite(x))
                throw std::invalid_argument("canonical_dump: non-finite number in payload");
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", x);
            out += buf;
            break;
        }
        default:
            out += j.dump();
    }
}

} // namespace detail

inline std::string canonical_dump(const Json& j) {
    std::string out;
    detail::canonical_dump_impl(j, out);
    out += '\n';
    return out;
}

/// Wrap a payload with the versioned schema tag and the configuration echo.
inline Json make_report(const std::string& schema, const Json& config, Json payload) {
    Json r;
    r["schema"] = schema;
    r["config"] = config;
    r["payload"] = std::move(payload);
    return r;
}

/// Structural validation of an emitted report: schema tag, config echo and a
/// payload object must be present; the schema tag must carry a version.
inline bool validate_report_skeleton(const Json& r, std::string* error = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (error) *error = msg;
        return false;
    };
    if (!r.is_object()) return fail("report is not an object");
    if (!r.contains("schema") || !r.at("schema").is_string()) return fail("missing schema tag");
    const std::string tag = r.at("schema").get<std::string>();
    if (tag.rfind("mflab/", 0) != 0 || tag.find("/v") == std::string::npos)
        return fail("schema tag must look like mflab/<kind>/v<N>");
    if (!r.contains("config") || !r.at("config").is_object()) return fail("missing config echo");
    if (!r.contains("payload")) return fail("missing payload");
    return true;
}

/// Write canonical JSON to a file, or to standard output for path "-".
inline void emit(const Json& report, const std::string& path) {
    const std::string text = canonical_dump(report);
    if (path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("emit: cannot open " + path);
    f << text;
    if (!f) throw std::runtime_error("emit: write failed for " + path);
}

} // namespace mflab
