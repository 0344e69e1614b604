#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "collections.hpp"
#include "norms.hpp"
#include "rational.hpp"
#include "space.hpp"

namespace sparselab {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalar formatting.  Doubles in CSV carry 15 significant digits; JSON uses
// the library's shortest round-trip representation.  Rationals travel as
// canonical "p/q" strings so they survive any magnitude.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

inline std::string rational_to_string(const Rational& r) {
    std::ostringstream os;
    os << numerator(r) << "/" << denominator(r);
    return os.str();
}

inline Rational rational_from_string(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(s);
    using Int = boost::multiprecision::cpp_int;
    const Int num(s.substr(0, slash));
    const Int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational_from_string: zero denominator");
    return Rational(num, den);
}

// ---------------------------------------------------------------------------
// Spaces, sets, collections
// ---------------------------------------------------------------------------

inline ordered_json space_to_json(const DyadicSpace& sp) {
    return ordered_json{{"d", sp.dim}, {"L", sp.depth}};
}

inline DyadicSpace space_from_json(const ordered_json& j) {
    return build_space(j.at("d").get<int>(), j.at("L").get<int>());
}

inline ordered_json meas_set_to_json(const MeasSet& s) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : s.ranges()) arr.push_back({r.begin, r.end});
    return arr;
}

inline MeasSet meas_set_from_json(const ordered_json& j) {
    std::vector<CellRange> runs;
    for (const auto& e : j)
        runs.push_back({e.at(0).get<std::int64_t>(), e.at(1).get<std::int64_t>()});
    return MeasSet::from_ranges(std::move(runs));
}

inline ordered_json portions_to_json(const std::vector<PortionSet>& portions) {
    ordered_json arr = ordered_json::array();
    for (const auto& ps : portions) {
        ordered_json p = ordered_json::array();
        for (const auto& iv : ps.intervals())
            p.push_back(ordered_json{{"lo", rational_to_string(iv.lo)},
                                     {"hi", rational_to_string(iv.hi)}});
        arr.push_back(std::move(p));
    }
    return arr;
}

/// Schema: {"space": {"d","L"}, "sets": [[ [b,e], ... ], ...], "portions"?}.
/// Sets appear in family order so a parse/serialize cycle is byte-identical.
inline ordered_json collection_to_json(const SparseCollection& col,
                                       bool with_portions = false) {
    ordered_json j;
    j["space"] = space_to_json(col.space());
    ordered_json sets = ordered_json::array();
    for (const auto& s : col.sets()) sets.push_back(meas_set_to_json(s));
    j["sets"] = std::move(sets);
    j["gamma"] = rational_to_string(col.gamma());
    if (with_portions) j["portions"] = portions_to_json(col.portions());
    return j;
}

inline SparseCollection collection_from_json(const ordered_json& j) {
    const DyadicSpace sp = space_from_json(j.at("space"));
    std::vector<MeasSet> sets;
    for (const auto& e : j.at("sets")) sets.push_back(meas_set_from_json(e));
    SparseCollection col = SparseCollection::from_sets(sp, std::move(sets));
    if (j.contains("gamma")) {
        const Rational claimed = rational_from_string(j.at("gamma").get<std::string>());
        if (claimed != col.gamma())
            throw std::invalid_argument("collection_from_json: stored gamma disagrees");
    }
    return col;
}

// ---------------------------------------------------------------------------
// Norm estimates
// ---------------------------------------------------------------------------

inline ordered_json norm_estimate_to_json(const NormEstimate& est) {
    ordered_json j;
    j["kind"] = to_string(est.kind);
    j["p"] = est.p;
    j["value"] = est.value;
    if (est.lambda) j["lambda"] = *est.lambda;
    j["seed"] = est.seed;
    j["iterations"] = est.iterations;
    return j;
}

inline NormEstimate norm_estimate_from_json(const ordered_json& j) {
    NormEstimate est;
    est.kind = norm_kind_from_string(j.at("kind").get<std::string>());
    est.p = j.at("p").get<double>();
    est.value = j.at("value").get<double>();
    if (j.contains("lambda")) est.lambda = j.at("lambda").get<double>();
    est.seed = j.at("seed").get<std::uint64_t>();
    est.iterations = j.at("iterations").get<std::int64_t>();
    return est;
}

// ---------------------------------------------------------------------------
// Experiment reports: one table plus a small ordered summary map.  Wall-clock
// diagnostics live next to the data in memory but never in the serialized
// bytes, so outputs from repeat runs compare equal.
// ---------------------------------------------------------------------------

struct ExperimentReport {
    std::string id;
    std::uint64_t seed = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, double>> summary;
    double runtime_seconds = 0.0; // diagnostic only, not serialized

    void add_row(std::vector<double> r) {
        if (r.size() != columns.size())
            throw std::invalid_argument("ExperimentReport: row width mismatch");
        rows.push_back(std::move(r));
    }
    void add_summary(std::string key, double v) { summary.emplace_back(std::move(key), v); }
    double summary_value(const std::string& key) const {
        for (const auto& [k, v] : summary)
            if (k == key) return v;
        throw std::out_of_range("ExperimentReport: no summary key " + key);
    }
};

inline std::string report_to_csv(const ExperimentReport& rep) {
    std::string out;
    out += "# id " + rep.id + "\n";
    out += "# seed " + std::to_string(rep.seed) + "\n";
    for (std::size_t i = 0; i < rep.columns.size(); ++i) {
        if (i) out += ",";
        out += rep.columns[i];
    }
    out += "\n";
    for (const auto& row : rep.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += format_double(row[i]);
        }
        out += "\n";
    }
    for (const auto& [k, v] : rep.summary)
        out += "# " + k + " " + format_double(v) + "\n";
    return out;
}

inline ordered_json report_to_json(const ExperimentReport& rep) {
    ordered_json j;
    j["id"] = rep.id;
    j["seed"] = rep.seed;
    j["columns"] = rep.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& row : rep.rows) rows.push_back(row);
    j["rows"] = std::move(rows);
    ordered_json sum = ordered_json::object();
    for (const auto& [k, v] : rep.summary) sum[k] = v;
    j["summary"] = std::move(sum);
    return j;
}

inline std::string report_to_string(const ExperimentReport& rep, const std::string& format) {
    if (format == "csv") return report_to_csv(rep);
    if (format == "json") return report_to_json(rep).dump(2) + "\n";
    throw std::invalid_argument("report_to_string: format must be csv or json");
}

inline void write_text_file(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << bytes;
    if (!os) throw std::runtime_error("short write: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace sparselab
