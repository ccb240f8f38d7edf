#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "growth.hpp"
#include "lattice.hpp"
#include "modgen.hpp"
#include "orbit_growth.hpp"
#include "subtree.hpp"

namespace pgrowth {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

// Big integers and rationals travel as decimal strings.
inline Json big_json(const BigInt& x) { return x.str(); }
inline Json big_json(const Rational& q) { return to_string(q); }

inline BigInt big_from_json(const Json& j) {
  if (j.is_number_integer()) return BigInt(j.get<long long>());
  return BigInt(j.get<std::string>());
}

inline Json to_json(const GrowthTables& T) {
  Json j;
  j["group_id"] = T.group_id;
  j["p"] = T.p;
  j["level"] = T.level;
  j["mode"] = mode_name(T.mode);
  Json rows = Json::array();
  for (const auto& r : T.rows)
    rows.push_back({{"m", r.m},
                    {"count", big_json(r.count)},
                    {"s_count", big_json(r.s_count)},
                    {"class_count", r.class_count},
                    {"dp_max", r.dp_max},
                    {"o_max", r.o_max},
                    {"level_used", r.level_used},
                    {"stabilized", r.stabilized}});
  j["per_m"] = std::move(rows);
  return j;
}

inline GrowthTables growth_tables_from_json(const Json& j) {
  GrowthTables T;
  T.group_id = j.at("group_id").get<std::string>();
  T.p = j.at("p").get<int>();
  T.level = j.at("level").get<int>();
  T.mode = parse_mode(j.at("mode").get<std::string>());
  for (const auto& r : j.at("per_m")) {
    GrowthRow g;
    g.m = r.at("m").get<int>();
    g.count = big_from_json(r.at("count"));
    g.s_count = big_from_json(r.at("s_count"));
    g.class_count = r.at("class_count").get<std::uint64_t>();
    g.dp_max = r.at("dp_max").get<int>();
    g.o_max = r.at("o_max").get<int>();
    g.level_used = r.at("level_used").get<int>();
    g.stabilized = r.at("stabilized").get<bool>();
    T.rows.push_back(g);
  }
  return T;
}

inline Json to_json(const BudgetStats& B) {
  return {{"peak_bytes", B.peak_bytes},
          {"spilled_bytes", B.spilled_bytes},
          {"spill_runs", B.spill_runs},
          {"cache_hits", B.cache_hits},
          {"orbit_computations", B.orbit_computations},
          {"seconds", B.seconds}};
}

inline Json to_json(const OrbitTable& T) {
  Json rows = Json::array();
  for (const auto& r : T.rows) {
    Json x{{"m", r.m}, {"o_max", r.o_max}};
    x["bound"] = r.bound >= 0 ? Json(r.bound) : Json(nullptr);
    x["bound_exp4"] = r.bound4 >= 0 ? Json(r.bound4) : Json(nullptr);
    x["witness_key"] = lattice_detail::hex(r.witness);
    x["pass"] = r.pass;
    rows.push_back(std::move(x));
  }
  return {{"label", T.label}, {"p", T.p}, {"level", T.level}, {"k", T.k}, {"rows", std::move(rows)}};
}

inline Json to_json(const StabilizerWitness& w) {
  return {{"j", w.j}, {"m", w.m}, {"orbits", w.orbits}, {"bound", w.bound}, {"pass", w.pass()}};
}

inline Json to_json(const BoundReport& R) {
  return {{"name", R.name},
          {"checked", R.checked},
          {"violations", R.violations},
          {"min_slack", R.checked ? Json(R.min_slack) : Json(nullptr)},
          {"max_ratio", big_json(R.max_ratio)},
          {"violation_details", R.violation_details},
          {"pass", R.pass()}};
}

inline Json to_json(const ColouredSubtree& S) { return S.to_strings(); }

inline Json to_json(const StageReport& R) {
  Json cands = Json::array();
  for (const auto& c : R.candidates) {
    Json o = Json::array();
    for (const auto& x : c.o_cum) o.push_back(big_json(x));
    cands.push_back({{"tree", to_json(c.tree)}, {"o_cum", std::move(o)}, {"large", c.large}, {"first_exceed", c.first_exceed}});
  }
  Json small = Json::array(), large = Json::array();
  for (std::size_t i = 0; i < R.candidates.size(); ++i)
    (R.candidates[i].large ? large : small).push_back(i);
  Json j{{"p", R.p}, {"ell", R.ell}, {"ell_prime", R.ell_prime}, {"n1", R.n1}, {"candidates", std::move(cands)},
         {"small", std::move(small)}, {"large", std::move(large)}};
  if (R.found) {
    j["boundary_pair"] = {{"small", to_json(R.candidates[R.small_index].tree)},
                          {"large", to_json(R.candidates[R.large_index].tree)},
                          {"m_i", R.m_i}};
    j["witness"] = {{"key", lattice_detail::hex(R.witness_key)}, {"orbits", big_json(R.witness_orbits)}};
  } else {
    j["boundary_pair"] = nullptr;
    j["witness"] = nullptr;
  }
  j["smax"] = {{"orbits", big_json(R.smax_orbits)},
               {"stated_bound", big_json(R.smax_bound)},
               {"stated_pass", R.smax_pass},
               {"colourings", big_json(R.smax_colourings)},
               {"colouring_pass", R.smax_colouring_pass}};
  j["subgroups_examined"] = R.subgroups_examined;
  return j;
}

inline Json to_json(const AlphaEstimate& A) {
  Json terms = Json::array();
  for (const auto& t : A.terms)
    terms.push_back({{"m", t.m}, {"dp", t.dp}, {"stabilized", t.stabilized}, {"value", big_json(t.value)}});
  return {{"group_id", A.group_id},
          {"k", A.k},
          {"ell", A.ell},
          {"d", A.d},
          {"dp_K", A.dp_K},
          {"lower", big_json(A.lower)},
          {"optimistic", big_json(A.optimistic)},
          {"upper", big_json(A.upper)},
          {"m0_term", big_json(A.m0_term)},
          {"certified", A.has_certified},
          {"consistent", A.consistent()},
          {"per_m", std::move(terms)},
          {"note", "bracket for the distinguished subgroup K; commensurable groups share the value"}};
}

inline Json to_json(const WindowEndpoints& W) {
  return {{"label", W.label}, {"lower", W.lower_text}, {"upper", W.upper_text}, {"informational", true}};
}

inline Json to_json(const GrowthReport& R) {
  Json rows = Json::array();
  for (const auto& c : R.rows)
    rows.push_back({{"m", c.m},
                    {"s_count", big_json(c.s_count)},
                    {"admissible_mu", c.mus},
                    {"best_lower_exp", c.best_lower_exp},
                    {"upper_exp", c.upper_exp},
                    {"lower_ok", c.lower_ok},
                    {"upper_ok", c.upper_ok},
                    {"log_s_over_m2", c.log_ratio}});
  Json j{{"group_id", R.group_id}, {"p", R.p}, {"rows", std::move(rows)}, {"violations", R.violations}, {"pass", R.pass()}};
  j["window"] = R.window ? to_json(*R.window) : Json(nullptr);
  return j;
}

inline Json to_json(const ModgenCheck& C, int id) {
  return {{"instance_id", id}, {"d", C.d}, {"m", C.m}, {"output_size", C.output_size},
          {"in_kernel", C.in_kernel}, {"span_ok", C.span_ok}, {"bound_ok", C.bound_ok}};
}

inline Json to_json(const SandwichCheck& C) {
  return {{"n", C.n},
          {"orbits", C.orbits},
          {"homomorphism", C.homomorphism},
          {"surjective", C.surjective},
          {"dp_preimage", C.dp_preimage},
          {"upper_stated", C.upper},
          {"upper_proof", C.upper_proof},
          {"lower_ok", C.lower_ok()},
          {"upper_stated_ok", C.upper_ok()},
          {"upper_proof_ok", C.upper_proof_ok()},
          {"level_relative", true}};
}

/// Re-runs the growth inequalities on a serialized table.
inline GrowthReport revalidate(const Json& tables_json) {
  return growth_bounds_report(growth_tables_from_json(tables_json));
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_growth(const GrowthTables& T) {
  std::ostringstream os;
  os << "m,count,s_count,class_count,dp_max,o_max,level_used,stabilized\n";
  for (const auto& r : T.rows)
    os << r.m << ',' << r.count << ',' << r.s_count << ',' << r.class_count << ',' << r.dp_max << ','
       << r.o_max << ',' << r.level_used << ',' << (r.stabilized ? 1 : 0) << '\n';
  return os.str();
}

inline std::string csv_orbits(const OrbitTable& T) {
  std::ostringstream os;
  os << "m,o_max,bound,witness_key,pass\n";
  for (const auto& r : T.rows)
    os << r.m << ',' << r.o_max << ',' << r.bound << ',' << lattice_detail::hex(r.witness) << ',' << (r.pass ? 1 : 0) << '\n';
  return os.str();
}

inline std::string csv_growth_report(const GrowthReport& R) {
  std::ostringstream os;
  os << "m,s_count,best_lower_exp,upper_exp,lower_ok,upper_ok,log_s_over_m2\n";
  for (const auto& c : R.rows)
    os << c.m << ',' << c.s_count << ',' << c.best_lower_exp << ',' << c.upper_exp << ',' << c.lower_ok << ','
       << c.upper_ok << ',' << c.log_ratio << '\n';
  return os.str();
}

}  // namespace pgrowth
