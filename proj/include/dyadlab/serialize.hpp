#pragma once

#include "dyadlab/bloch.hpp"
#include "dyadlab/cantor.hpp"
#include "dyadlab/lorenz.hpp"
#include "dyadlab/numbers.hpp"
#include "dyadlab/symbolic.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <string>

namespace dyadlab {

// Golden files are pinned per schema version; bump when any emitted shape
// changes.
inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

// Exact values serialize as canonical rational strings, never floats.
inline std::string json_rational(const Rational& q) {
    Rational c = q;
    c.canonicalize();
    return rational_to_string(c);
}

inline std::string json_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// symbolic algebra
// ---------------------------------------------------------------------------

inline Json to_json(const SymbolString& s) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["label"] = std::string(1, s.label);
    j["cells"] = s.cells;
    return j;
}

inline SymbolString symbol_string_from_json(const Json& j) {
    SymbolString s;
    s.label = j.at("label").get<std::string>().at(0);
    s.cells = j.at("cells").get<std::vector<uint8_t>>();
    return s;
}

inline Json to_json(const SignedPermutation& f) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["size"] = f.size();
    j["targets"] = f.targets;
    j["signs"] = f.signs;
    return j;
}

inline SignedPermutation signed_permutation_from_json(const Json& j) {
    SignedPermutation f;
    f.targets = j.at("targets").get<std::vector<uint32_t>>();
    f.signs = j.at("signs").get<std::vector<uint8_t>>();
    f.check_valid();
    return f;
}

inline Json to_json(const SignMatrix& m) {
    Json rows = Json::array();
    for (size_t r = 0; r < m.n; ++r) {
        Json row = Json::array();
        for (size_t c = 0; c < m.n; ++c) row.push_back(static_cast<int>(m.at(r, c)));
        rows.push_back(row);
    }
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["n"] = m.n;
    j["rows"] = rows;
    return j;
}

// ---------------------------------------------------------------------------
// fractal geometry
// ---------------------------------------------------------------------------

inline const char* variant_name(CantorVariant v) {
    switch (v) {
        case CantorVariant::t_i: return "t_i";
        case CantorVariant::t_f: return "t_f";
        case CantorVariant::unlabelled: return "unlabelled";
    }
    return "?";
}

inline Json to_json(const GroupingStats& s) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["grouping_count"] = s.grouping_count;
    j["grouping_width"] = json_rational(s.grouping_width);
    j["gap"] = json_rational(s.gap);
    return j;
}

inline Json to_json(const CantorApprox& a) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["family"] = a.family == CantorFamily::middle_thirds ? "middle_thirds" : "c_n";
    j["N"] = a.N;
    j["k"] = a.k;
    j["variant"] = variant_name(a.variant);
    if (a.family == CantorFamily::c_n) j["stats"] = to_json(a.stats);
    Json intervals = Json::array();
    for (size_t i = 0; i < a.intervals.size(); ++i) {
        Json iv;
        iv["lo"] = json_rational(a.intervals[i].lo);
        iv["hi"] = json_rational(a.intervals[i].hi);
        if (a.labelled) iv["label"] = a.labels[i] ? "negated" : "plain";
        intervals.push_back(iv);
    }
    j["intervals"] = intervals;
    return j;
}

// lo, hi, label rows; label column empty when unlabelled
inline void write_intervals_csv(std::ostream& os, const CantorApprox& a) {
    os << "lo,hi,label\n";
    for (size_t i = 0; i < a.intervals.size(); ++i) {
        os << json_rational(a.intervals[i].lo) << ',' << json_rational(a.intervals[i].hi) << ',';
        if (a.labelled) os << (a.labels[i] ? "negated" : "plain");
        os << '\n';
    }
}

inline Json to_json(const MapD& d) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["plain_count"] = d.plain_count;
    j["negated_count"] = d.negated_count;
    j["forward"] = d.forward;
    return j;
}

// ---------------------------------------------------------------------------
// number theory
// ---------------------------------------------------------------------------

inline Json to_json(const SphericalCosine& s) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["certificate"] = certificate_name(s.certificate);
    j["dyadic_admissible"] = s.dyadic_admissible;
    if (s.exact)
        j["value"] = json_rational(*s.exact);
    else {
        j["value_lo"] = json_double(mpq_get_d(s.enclosure.lo.get_mpq_t()));
        j["value_hi"] = json_double(mpq_get_d(s.enclosure.hi.get_mpq_t()));
    }
    // rounding down keeps this a certified lower bound while staying short
    j["nearest_dyadic_gap"] = json_rational(round_down(s.nearest_dyadic_gap, 64));
    return j;
}

inline Json to_json(const TripleAdmissibility& t) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["pair_ab"] = t.pair_ab;
    j["pair_ac"] = t.pair_ac;
    j["pair_bc"] = t.pair_bc;
    j["simultaneous"] = t.simultaneous;
    return j;
}

// ---------------------------------------------------------------------------
// quantum correspondence
// ---------------------------------------------------------------------------

inline Json to_json(const BlochPoint& p) {
    Json j;
    j["cos_theta"] = json_rational(p.cos_theta);
    j["beta"] = json_rational(p.beta);
    j["bits"] = p.bits;
    return j;
}

inline Json to_json(const CorrelationRecord& r, bool include_sample = false) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["lambda_space_id"] = r.lambda_space_id;
    j["sample_size"] = r.sample_size;
    j["relative_cosine"] = json_rational(r.relative_cosine);
    j["alpha"] = json_rational(r.alpha);
    j["relative_beta"] = json_rational(r.relative_beta);
    j["correlation"] = json_rational(r.correlation);
    if (include_sample) j["sample"] = r.sample.cells;
    return j;
}

inline Json to_json(const BellReport& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["corr_ab"] = to_json(r.corr_ab);
    j["corr_ac"] = to_json(r.corr_ac);
    j["corr_bc_prime"] = to_json(r.corr_bc_prime);
    j["lhs"] = json_rational(r.lhs);
    j["rhs"] = json_rational(r.rhs);
    j["violated"] = r.violated;
    j["triple"] = to_json(r.triple);
    j["shared_lambda_admissible"] = r.shared_lambda_admissible;
    return j;
}

inline Json to_json(const ChshReport& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json corr = Json::array();
    for (const auto& c : r.correlations) corr.push_back(to_json(c));
    j["correlations"] = corr;
    j["S"] = json_rational(r.S);
    j["violated"] = r.violated;
    return j;
}

inline Json to_json(const SequentialSgReport& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json cosines = Json::array(), ups = Json::array();
    for (const auto& c : r.stage_cosines) cosines.push_back(json_rational(c));
    for (const auto& u : r.stage_up_fractions) ups.push_back(json_rational(u));
    j["stage_cosines"] = cosines;
    j["stage_up_fractions"] = ups;
    j["p_a"] = json_rational(r.p_a);
    j["p_b"] = json_rational(r.p_b);
    j["p_c"] = json_rational(r.p_c);
    j["p_d"] = json_rational(r.p_d);
    return j;
}

inline Json to_json(const std::vector<CauchyRow>& rows) {
    Json out = Json::array();
    for (const auto& r : rows) {
        Json j;
        j["beta"] = json_rational(r.beta);
        j["next_beta"] = json_rational(r.next_beta);
        j["hamming_distance"] = json_rational(r.hamming_distance);
        out.push_back(j);
    }
    Json root;
    root["schema_version"] = kSchemaVersion;
    root["rows"] = out;
    return root;
}

// ---------------------------------------------------------------------------
// Lorenz dynamics
// ---------------------------------------------------------------------------

inline void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    os << "t,x,y,z\n";
    for (size_t k = 0; k < t.states.size(); ++k) {
        const auto& s = t.states[k];
        os << json_double(t.dt * static_cast<double>(k)) << ',' << json_double(s.x) << ','
           << json_double(s.y) << ',' << json_double(s.z) << '\n';
    }
}

inline void write_ensemble_csv(std::ostream& os, const std::vector<LorenzState>& before,
                               const EnsembleResult& after) {
    os << "member,x0,y0,z0,x1,y1,z1,diverged\n";
    for (size_t m = 0; m < before.size(); ++m) {
        os << m << ',' << json_double(before[m].x) << ',' << json_double(before[m].y) << ','
           << json_double(before[m].z) << ',' << json_double(after.states[m].x) << ','
           << json_double(after.states[m].y) << ',' << json_double(after.states[m].z) << ','
           << static_cast<int>(after.diverged[m]) << '\n';
    }
}

inline Json to_json(const ModularMatrix& m) {
    Json j;
    j["a"] = m.a.get_str();
    j["b"] = m.b.get_str();
    j["c"] = m.c.get_str();
    j["d"] = m.d.get_str();
    return j;
}

inline Json to_json(const UpoRecord& o) {
    Json j;
    j["word"] = o.word;
    j["normal_form"] = o.normal_form;
    j["matrix"] = to_json(o.matrix);
    j["period"] = json_double(o.period);
    j["initial"] = {json_double(o.initial.x), json_double(o.initial.y),
                    json_double(o.initial.z)};
    j["closure_error"] = json_double(o.closure_error);
    return j;
}

inline Json to_json(const UpoCatalogue& c) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["budget_exhausted"] = c.budget_exhausted;
    Json orbits = Json::array();
    for (const auto& o : c.orbits) orbits.push_back(to_json(o));
    j["orbits"] = orbits;
    return j;
}

}  // namespace dyadlab
