#pragma once

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsl.hpp"
#include "growth.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "modgen.hpp"
#include "orbit_growth.hpp"
#include "selfsim.hpp"
#include "subtree.hpp"

namespace pgrowth {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitBudget = 2, kExitVerify = 3 };

struct RunConfig {
  std::string command;
  std::string target;  // verify id
  std::string group = "grigorchuk";
  int p = 0;           // 0: the family default
  std::string def_file;
  std::string subgroup = "whole";  // whole | K
  int level = 3;
  int max_m = 3;
  std::string mode = "conjugacy";
  std::string budget_mem = "4G";
  double budget_time = 0;
  std::string spill_dir;
  std::string resume;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  // command specific
  int k = 2;
  int count = 200;
  std::vector<int> levels;
  std::vector<std::string> tree;
  int ell = 1;
  int ell_prime = 3;
  long long f_mul = 1;
  long long f_add = 0;
  int n1 = 1;

  std::string canonical() const {
    std::ostringstream os;
    os << command << '|' << target << '|' << group << '|' << p << '|' << def_file << '|' << subgroup << '|'
       << level << '|' << max_m << '|' << mode << '|' << budget_mem << '|' << budget_time << '|' << jobs << '|'
       << seed << '|' << format << '|' << k << '|' << count << '|' << ell << '|' << ell_prime << '|' << f_mul
       << '|' << f_add << '|' << n1;
    for (int l : levels) os << ",l" << l;
    for (const auto& t : tree) os << ",t" << t;
    return os.str();
  }

  std::string hash() const {
    std::ostringstream os;
    os << std::hex << KeySet::hash(canonical());
    return os.str();
  }
};

inline std::size_t parse_bytes(const std::string& s) {
  if (s.empty()) throw Error(Errc::Usage, "empty byte count");
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw Error(Errc::Usage, "bad byte count " + s);
  }
  std::string suf = s.substr(pos);
  std::size_t mul = 1;
  if (suf == "K" || suf == "k") mul = std::size_t(1) << 10;
  else if (suf == "M" || suf == "m") mul = std::size_t(1) << 20;
  else if (suf == "G" || suf == "g") mul = std::size_t(1) << 30;
  else if (!suf.empty()) throw Error(Errc::Usage, "bad byte suffix " + suf);
  if (v == 0) throw Error(Errc::Usage, "budget must be positive");
  return static_cast<std::size_t>(v) * mul;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "info",         "quotient",      "enumerate",    "dp-table",        "orbit-table",
      "product-orbits", "partition",   "modgen-check", "wreath-dp",       "subtree-orbits",
      "stage-search", "alpha",         "verify",       "report"};
  return names;
}

inline const std::vector<std::string>& verify_ids() {
  static const std::vector<std::string> ids = {
      "partition", "direct",  "inductive", "permutation-product", "many-orbits", "orbit-upper", "orbit-lower",
      "sandwich",  "modgen",  "congruence-index", "growth", "kseed", "antichain"};
  return ids;
}

/// Registers every flag on app, bound to cfg.  `--config` reads key=value lines.
inline void add_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("command", cfg.command, "Command to run")->required()->check(CLI::IsMember(command_names()));
  app.add_option("target", cfg.target, "Identifier for verify");
  app.add_option("--group", cfg.group, "Builtin group: grigorchuk | gupta_sidki");
  app.add_option("--p", cfg.p, "Prime for builtin families");
  app.add_option("--def", cfg.def_file, "Group definition file");
  app.add_option("--subgroup", cfg.subgroup, "whole | K")->check(CLI::IsMember({"whole", "K"}));
  app.add_option("--level", cfg.level, "Congruence level");
  app.add_option("--max-m", cfg.max_m, "Largest index exponent");
  app.add_option("--mode", cfg.mode, "exact | conjugacy")->check(CLI::IsMember({"exact", "conjugacy"}));
  app.add_option("--budget-mem", cfg.budget_mem, "Memory budget, e.g. 512M or 4G");
  app.add_option("--budget-time", cfg.budget_time, "Time budget in seconds (0: none)");
  app.add_option("--spill-dir", cfg.spill_dir, "Directory for spill files");
  app.add_option("--resume", cfg.resume, "Resume token file");
  app.add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Seed for randomized checks");
  app.add_option("--out", cfg.out, "Output path (default stdout)");
  app.add_option("--format", cfg.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--k", cfg.k, "Number of direct factors");
  app.add_option("--count", cfg.count, "Number of randomized instances");
  app.add_option("--levels", cfg.levels, "Levels for a stabilization sweep");
  app.add_option("--tree", cfg.tree, "Subtree vertices as digit words");
  app.add_option("--ell", cfg.ell, "Stage search: path level");
  app.add_option("--ell-prime", cfg.ell_prime, "Stage search: quotient level");
  app.add_option("--f-mul", cfg.f_mul, "Stage search: f(n) = f_mul * n + f_add");
  app.add_option("--f-add", cfg.f_add, "Stage search: f(n) = f_mul * n + f_add");
  app.add_option("--n1", cfg.n1, "Stage search: first index exponent checked");
  app.set_config("--config", "", "key=value configuration file");
}

namespace cli_detail {

struct Context {
  const RunConfig& cfg;
  std::ostream& out;
  std::ostream& err;
  Json result;
  std::string csv;
  bool verify_failed = false;
};

inline SelfSimilarGroup load_group(const RunConfig& cfg) {
  if (!cfg.def_file.empty()) {
    std::ifstream in(cfg.def_file);
    if (!in) throw Error(Errc::Usage, "cannot read " + cfg.def_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_group_def(ss.str());
  }
  auto kind = parse_builtin_kind(cfg.group);
  int p = cfg.p ? cfg.p : (kind == BuiltinKind::Grigorchuk ? 2 : 3);
  return builtin_group(kind, p);
}

inline SeedSubgroup selector(const RunConfig& cfg, const SelfSimilarGroup& G) {
  return cfg.subgroup == "K" ? SeedSubgroup::k_of(G) : SeedSubgroup::whole();
}

inline EnumerationJob make_job(const RunConfig& cfg, std::shared_ptr<const PermGroup> Q, int p, int max_m) {
  EnumerationJob job;
  job.group = std::move(Q);
  job.p = p;
  job.max_m = max_m;
  job.mode = parse_mode(cfg.mode);
  job.memory_budget = parse_bytes(cfg.budget_mem);
  job.parallelism = cfg.jobs;
  job.spill_dir = cfg.spill_dir;
  job.time_budget_s = cfg.budget_time;
  job.resume_token = cfg.resume;
  return job;
}

inline Json perm_cycles(const Perm& g) {
  std::vector<int> img(g.images().begin(), g.images().end());
  return dsl_detail::format_cycles(img);
}

inline Json metadata_json(const SelfSimilarGroup& G) {
  const auto& m = G.metadata();
  Json j;
  j["k"] = m.k ? Json(*m.k) : Json(nullptr);
  j["ell"] = m.ell ? Json(*m.ell) : Json(nullptr);
  j["d"] = m.d ? Json(*m.d) : Json(nullptr);
  j["d_K"] = m.d_K ? Json(*m.d_K) : Json(nullptr);
  using K = GroupMetadata::KKind;
  j["K"] = m.k_kind == K::Derived ? "derived" : m.k_kind == K::NormalClosure ? "normal_closure" : "none";
  Json seeds = Json::array();
  for (const auto& w : m.k_seed) seeds.push_back(G.format_word(w));
  j["K_seed"] = std::move(seeds);
  return j;
}

inline void cmd_info(Context& c) {
  auto G = load_group(c.cfg);
  Json gens = Json::array();
  for (const auto& g : G.generators()) gens.push_back(g.name);
  c.result["group_id"] = G.id();
  c.result["p"] = G.p();
  c.result["max_level"] = G.max_level();
  c.result["generators"] = std::move(gens);
  c.result["metadata"] = metadata_json(G);
  c.result["definition"] = print_group_def(G);
  std::ostringstream os;
  os << "key,value\ngroup_id," << G.id() << "\np," << G.p() << "\n";
  c.csv = os.str();
}

inline void cmd_quotient(Context& c) {
  auto G = load_group(c.cfg);
  PermGroup Q = level_quotient(G, c.cfg.level, selector(c.cfg, G));
  c.result["group_id"] = G.id();
  c.result["subgroup"] = c.cfg.subgroup;
  c.result["level"] = c.cfg.level;
  c.result["degree"] = Q.degree();
  c.result["order"] = big_json(Q.order());
  auto e = Q.order_exp(G.p());
  c.result["order_exp"] = e ? Json(*e) : Json(nullptr);
  c.result["dp"] = e ? Json(dp(Q, G.p())) : Json(nullptr);
  Json gens = Json::array();
  for (const auto& g : Q.generators()) gens.push_back(perm_cycles(g));
  c.result["generators"] = std::move(gens);
  if (c.cfg.subgroup == "whole") {
    auto r = congruence_index(G, c.cfg.level);
    c.result["congruence_bound_exp"] = r.bound_exp;
    c.result["congruence_bound_ok"] = r.pass();
    if (!r.pass()) c.verify_failed = true;
  }
  std::ostringstream os;
  os << "level,order,order_exp\n" << c.cfg.level << ',' << Q.order() << ',' << (e ? *e : -1) << '\n';
  c.csv = os.str();
}

inline GrowthTables enumerate_tables(Context& c, const SelfSimilarGroup& G, int level, Json* budget = nullptr) {
  auto Q = std::make_shared<const PermGroup>(level_quotient(G, level, selector(c.cfg, G)));
  auto job = make_job(c.cfg, Q, G.p(), c.cfg.max_m);
  auto S = enumerate_subgroups(job, [](const SubgroupRecord&) {});
  if (budget) *budget = to_json(S.budget);
  return tables_from_summary(S, c.cfg.max_m, G.p(), level, job.mode, G.id() + (c.cfg.subgroup == "K" ? ":K" : ""));
}

inline void cmd_enumerate(Context& c) {
  auto G = load_group(c.cfg);
  Json budget;
  auto T = enumerate_tables(c, G, c.cfg.level, &budget);
  c.result = to_json(T);
  c.result["budget_stats"] = std::move(budget);
  c.csv = csv_growth(T);
}

inline void cmd_dp_table(Context& c) {
  auto G = load_group(c.cfg);
  std::vector<int> levels = c.cfg.levels;
  if (levels.empty()) levels = {std::max(1, c.cfg.level - 1), c.cfg.level};
  auto R = stabilization_sweep(G, selector(c.cfg, G), c.cfg.max_m, levels, parse_mode(c.cfg.mode),
                               parse_bytes(c.cfg.budget_mem), c.cfg.jobs);
  c.result = to_json(R.table);
  Json per = Json::array();
  for (const auto& t : R.per_level) per.push_back(to_json(t));
  c.result["per_level"] = std::move(per);
  c.result["level_policy"] = "rows flagged stabilized agree at the last two levels; others are lower bounds";
  c.csv = csv_growth(R.table);
}

inline void cmd_orbit_table(Context& c) {
  auto G = load_group(c.cfg);
  auto Q = std::make_shared<const PermGroup>(level_quotient(G, c.cfg.level, selector(c.cfg, G)));
  auto job = make_job(c.cfg, Q, G.p(), c.cfg.max_m);
  auto S = enumerate_subgroups(job, [](const SubgroupRecord&) {});
  auto T = orbit_table(S.levels, G.p(), c.cfg.level, c.cfg.max_m, 1, G.id() + ":" + c.cfg.subgroup);
  Json w = Json::array();
  bool ok = true;
  for (const auto& x : stabilizer_witnesses(Q, G.p(), c.cfg.level)) {
    w.push_back(to_json(x));
    ok = ok && x.pass();
  }
  for (const auto& r : T.rows) ok = ok && r.pass;
  c.result = to_json(T);
  c.result["stabilizer_witnesses"] = std::move(w);
  c.result["budget_stats"] = to_json(S.budget);
  c.result["pass"] = ok;
  if (!ok) c.verify_failed = true;
  c.csv = csv_orbits(T);
}

inline void cmd_product_orbits(Context& c) {
  auto G = load_group(c.cfg);
  PermGroup Q = level_quotient(G, c.cfg.level, selector(c.cfg, G));
  auto R = product_orbit_table(Q, G.p(), c.cfg.level, c.cfg.k, c.cfg.max_m, -1, parse_mode(c.cfg.mode), c.cfg.jobs);
  c.result = to_json(R.table);
  c.result["witness"] = {{"m", R.witness_m},
                         {"orbits", R.witness_orbits},
                         {"expected", R.expected},
                         {"tight", R.witness_tight},
                         {"index_bound_ok", R.index_bound_ok}};
  if (!R.witness_tight || !R.index_bound_ok) c.verify_failed = true;
  c.csv = csv_orbits(R.table);
}

inline Json partition_rows(int p, int max_m, bool& ok) {
  Json rows = Json::array();
  for (int m = 1; m <= max_m; ++m) {
    int v = partition_min_parts(p, m);
    int e = (p - 1) * m + 1;
    rows.push_back({{"p", p}, {"m", m}, {"min_parts", v}, {"expected", e}, {"pass", v == e}});
    ok = ok && v == e;
  }
  return rows;
}

inline void cmd_partition(Context& c) {
  int p = c.cfg.p ? c.cfg.p : 2;
  bool ok = true;
  c.result["rows"] = partition_rows(p, c.cfg.max_m, ok);
  c.result["pass"] = ok;
  if (!ok) c.verify_failed = true;
  std::ostringstream os;
  os << "p,m,min_parts,expected\n";
  for (const auto& r : c.result["rows"]) os << r["p"] << ',' << r["m"] << ',' << r["min_parts"] << ',' << r["expected"] << '\n';
  c.csv = os.str();
}

inline void cmd_modgen(Context& c) {
  std::mt19937_64 rng(c.cfg.seed);
  Json rows = Json::array();
  std::size_t fails = 0;
  std::ostringstream os;
  os << "instance_id,p,d,m,output_size,span_ok,bound_ok\n";
  for (int i = 0; i < c.cfg.count; ++i) {
    int p = c.cfg.p ? c.cfg.p : (i % 2 ? 3 : 2);
    auto I = random_modgen_instance(p, rng);
    auto C = check_modgen(I);
    auto j = to_json(C, i);
    j["p"] = p;
    j["dim"] = I.module.dim;
    rows.push_back(j);
    if (!C.pass()) ++fails;
    os << i << ',' << p << ',' << C.d << ',' << C.m << ',' << C.output_size << ',' << C.span_ok << ',' << C.bound_ok << '\n';
  }
  c.result["instances"] = std::move(rows);
  c.result["failures"] = fails;
  c.result["pass"] = fails == 0;
  if (fails) c.verify_failed = true;
  c.csv = os.str();
}

struct SandwichSummary {
  std::size_t checked = 0;
  std::size_t lower_fail = 0;
  std::size_t stated_upper_fail = 0;
  std::size_t proof_upper_fail = 0;
  Json rows = Json::array();
};

/// All subgroups of the level quotient with m ≤ max_m; D(n) is the running
/// maximum of dp_max.
inline SandwichSummary sandwich_suite(const PermGroup& Q, int p, int max_m, int jobs) {
  EnumerationJob job;
  job.group = std::make_shared<const PermGroup>(Q);
  job.p = p;
  job.max_m = max_m;
  job.parallelism = jobs;
  std::vector<SubgroupRecord> recs;
  auto S = enumerate_subgroups(job, [&](const SubgroupRecord& r) { recs.push_back(r); });
  std::vector<int> D(max_m + 1, 0);
  for (int m = 0; m <= max_m && m < static_cast<int>(S.levels.size()); ++m)
    D[m] = std::max(m ? D[m - 1] : 0, S.levels[m].dp_max);
  for (int m = static_cast<int>(S.levels.size()); m <= max_m; ++m) D[m] = m ? D[m - 1] : 0;
  auto W = wreath_quotient(Q, p);
  SandwichSummary out;
  for (const auto& r : recs) {
    auto C = phi_orbit_surjection(W, r.group(Q.degree()), r.m, D[r.m]);
    ++out.checked;
    if (!C.lower_ok()) ++out.lower_fail;
    if (!C.upper_ok()) {
      ++out.stated_upper_fail;
      auto j = to_json(C);
      j["key"] = lattice_detail::hex(r.canonical_key);
      out.rows.push_back(std::move(j));
    }
    if (!C.upper_proof_ok()) ++out.proof_upper_fail;
  }
  return out;
}

inline void cmd_wreath_dp(Context& c) {
  auto G = load_group(c.cfg);
  PermGroup Q = level_quotient(G, c.cfg.level, selector(c.cfg, G));
  auto S = sandwich_suite(Q, G.p(), c.cfg.max_m, c.cfg.jobs);
  c.result["level"] = c.cfg.level;
  c.result["checked"] = S.checked;
  c.result["lower_failures"] = S.lower_fail;
  c.result["stated_upper_failures"] = S.stated_upper_fail;
  c.result["proof_upper_failures"] = S.proof_upper_fail;
  c.result["stated_upper_violations"] = S.rows;
  c.result["level_relative"] = true;
  bool ok = S.lower_fail == 0 && S.stated_upper_fail == 0 && S.proof_upper_fail == 0;
  c.result["pass"] = ok;
  if (!ok) c.verify_failed = true;
  std::ostringstream os;
  os << "checked,lower_failures,stated_upper_failures,proof_upper_failures\n"
     << S.checked << ',' << S.lower_fail << ',' << S.stated_upper_fail << ',' << S.proof_upper_fail << '\n';
  c.csv = os.str();
}

inline void cmd_subtree_orbits(Context& c) {
  auto G = load_group(c.cfg);
  const int L = c.cfg.level;
  auto Q = std::make_shared<const PermGroup>(level_quotient(G, L, selector(c.cfg, G)));
  std::vector<std::string> words = c.cfg.tree;
  if (words.empty()) words = ColouredSubtree::path(G.p(), std::min(L, 2)).to_strings();
  ColouredSubtree S = complete(ColouredSubtree::from_strings(G.p(), words));
  if (S.max_level() > L) throw Error(Errc::Usage, "tree deeper than the level");
  auto job = make_job(c.cfg, Q, G.p(), c.cfg.max_m);
  std::map<int, BigInt> best;
  std::size_t checked = 0, fails = 0;
  enumerate_subgroups(job, [&](const SubgroupRecord& r) {
    PermGroup U = r.group(Q->degree());
    auto A = antichain_bound_check(*Q, U, G.p(), L, S);
    ++checked;
    if (!A.pass) ++fails;
    auto& b = best[r.m];
    if (A.orbits > b) b = A.orbits;
  });
  Json rows = Json::array();
  std::ostringstream os;
  os << "m,o_max\n";
  for (const auto& [m, o] : best) {
    rows.push_back({{"m", m}, {"o_max", big_json(o)}});
    os << m << ',' << o << '\n';
  }
  c.result["tree"] = S.to_strings();
  c.result["level"] = L;
  c.result["rows"] = std::move(rows);
  c.result["antichain_checked"] = checked;
  c.result["antichain_violations"] = fails;
  c.result["pass"] = fails == 0;
  if (fails) c.verify_failed = true;
  c.csv = os.str();
}

inline void cmd_stage_search(Context& c) {
  auto G = load_group(c.cfg);
  PermGroup Q = level_quotient(G, c.cfg.ell_prime);
  const long long a = c.cfg.f_mul, b = c.cfg.f_add;
  auto R = stage_classify(Q, G.p(), c.cfg.ell, c.cfg.ell_prime, [a, b](int n) { return a * n + b; }, c.cfg.n1,
                          parse_bytes(c.cfg.budget_mem), c.cfg.jobs);
  c.result = to_json(R);
  c.result["f"] = std::to_string(a) + "*n+" + std::to_string(b);
  c.result["exploratory"] = true;
  std::ostringstream os;
  os << "candidate,size,large,first_exceed\n";
  for (std::size_t i = 0; i < R.candidates.size(); ++i)
    os << i << ',' << R.candidates[i].tree.size() << ',' << R.candidates[i].large << ',' << R.candidates[i].first_exceed << '\n';
  c.csv = os.str();
}

struct AlphaRun {
  AlphaEstimate stated;    // with the metadata d(K)
  AlphaEstimate computed;  // with d_p(K) of the level quotient
  GrowthTables table;
  GrowthReport report;
  int dp_K_computed = 0;
};

inline AlphaRun alpha_run(const SelfSimilarGroup& G, int level, int max_m, EnumMode mode, std::size_t budget, int jobs) {
  const auto& md = G.metadata();
  if (!md.k || !md.ell || !md.d) throw Error(Errc::Usage, "group metadata lacks k, ell or d");
  AlphaRun A;
  std::vector<int> levels;
  if (level > 1) levels.push_back(level - 1);
  levels.push_back(level);
  auto sw = stabilization_sweep(G, SeedSubgroup::k_of(G), max_m, levels, mode, budget, jobs);
  A.table = sw.table;
  A.dp_K_computed = A.table.rows.front().dp_max;
  int dK = md.d_K ? *md.d_K : A.dp_K_computed;
  A.stated = alpha_estimate(A.table.rows, *md.k, *md.ell, *md.d, dK, G.id() + ":K");
  A.computed = alpha_estimate(A.table.rows, *md.k, *md.ell, *md.d, A.dp_K_computed, G.id() + ":K");
  A.report = growth_bounds_report(A.table);
  return A;
}

inline void cmd_alpha(Context& c) {
  auto G = load_group(c.cfg);
  auto A = alpha_run(G, c.cfg.level, c.cfg.max_m, parse_mode(c.cfg.mode), parse_bytes(c.cfg.budget_mem), c.cfg.jobs);
  c.result["alpha"] = to_json(A.stated);
  c.result["alpha_with_computed_dK"] = to_json(A.computed);
  c.result["dp_K_computed"] = A.dp_K_computed;
  c.result["tables"] = to_json(A.table);
  c.result["growth_report"] = to_json(A.report);
  try {
    auto F = family_constants(G);
    c.result["window"] = to_json(F.window);
    c.result["family_note"] = F.note;
  } catch (const Error&) {
    c.result["window"] = nullptr;
  }
  if (!A.report.pass() || !A.stated.consistent()) c.verify_failed = true;
  std::ostringstream os;
  os << "m,dp,stabilized,value\n";
  for (const auto& t : A.stated.terms) os << t.m << ',' << t.dp << ',' << t.stabilized << ',' << to_string(t.value) << '\n';
  c.csv = os.str();
}

inline void cmd_verify(Context& c);

inline void cmd_report(Context& c) {
  auto G = load_group(c.cfg);
  Json j;
  j["metadata"] = metadata_json(G);
  if (G.metadata().k_kind != GroupMetadata::KKind::None) {
    int top = std::min(G.max_level(), c.cfg.level + 2);
    auto K = check_k_seed(G, std::max(1, top - 3), top);
    Json idx = Json::array();
    for (const auto& x : K.indices) idx.push_back(big_json(x));
    j["k_seed"] = {{"levels", K.levels}, {"indices", idx}, {"stable", K.stable}};
    if (!K.stable) c.verify_failed = true;
  }
  Json cong = Json::array();
  for (int l = 1; l <= std::min(G.max_level(), c.cfg.level + 1); ++l) {
    auto r = congruence_index(G, l);
    cong.push_back({{"level", l}, {"order_exp", r.order_exp}, {"bound_exp", r.bound_exp}, {"equality", r.equality()}});
    if (!r.pass()) c.verify_failed = true;
  }
  j["congruence_index"] = std::move(cong);
  if (G.metadata().k) {
    auto A = alpha_run(G, c.cfg.level, c.cfg.max_m, parse_mode(c.cfg.mode), parse_bytes(c.cfg.budget_mem), c.cfg.jobs);
    j["alpha"] = to_json(A.stated);
    j["growth_report"] = to_json(A.report);
    if (!A.report.pass()) c.verify_failed = true;
    try {
      j["window"] = to_json(family_constants(G).window);
    } catch (const Error&) {
    }
  }
  c.result = std::move(j);
  c.csv = "section,present\nreport,1\n";
}

}  // namespace cli_detail

/// Runs one command; returns the process exit status.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

namespace cli_detail {

inline void cmd_verify(Context& c) {
  const auto& id = c.cfg.target;
  const auto& cfg = c.cfg;
  Json j;
  j["id"] = id;
  bool ok = true;
  if (id == "partition") {
    Json rows = Json::array();
    for (auto [p, mm] : std::vector<std::pair<int, int>>{{2, 10}, {3, 5}, {5, 5}}) {
      if (cfg.p && cfg.p != p) continue;
      int top = cfg.p ? cfg.max_m : mm;
      for (auto& r : partition_rows(p, top, ok)) rows.push_back(r);
    }
    j["rows"] = std::move(rows);
  } else if (id == "direct") {
    auto G = load_group(cfg);
    PermGroup Q = level_quotient(G, cfg.level);
    auto R = verify_lemma_direct(Q, Q, G.p(), cfg.max_m, cfg.jobs, parse_bytes(cfg.budget_mem));
    j["report"] = to_json(R);
    ok = R.pass();
  } else if (id == "inductive") {
    auto G = load_group(cfg);
    const auto& md = G.metadata();
    if (!md.k || !md.ell || !md.d) throw Error(Errc::Usage, "group metadata lacks k, ell or d");
    auto sw = stabilization_sweep(G, SeedSubgroup::k_of(G), cfg.max_m, {cfg.level}, parse_mode(cfg.mode),
                                  parse_bytes(cfg.budget_mem), cfg.jobs);
    int dK = sw.table.rows.front().dp_max;
    auto R = verify_lemma_inductive(dK, *md.k, *md.ell, *md.d, sw.table);
    j["report"] = to_json(R);
    ok = R.pass();
  } else if (id == "permutation-product") {
    auto G = load_group(cfg);
    PermGroup Q = level_quotient(G, cfg.level);
    std::mt19937_64 rng(cfg.seed);
    auto R = verify_permutation_product(random_product_samples(Q, Q, static_cast<std::size_t>(cfg.count), rng));
    j["checked"] = R.checked;
    j["violations"] = R.violations;
    j["max_ratio"] = big_json(R.max_ratio);
    ok = R.violations == 0;
  } else if (id == "many-orbits") {
    Json rows = Json::array();
    for (auto [p, l, k] : std::vector<std::tuple<int, int, int>>{{2, 2, 2}, {2, 1, 3}, {3, 1, 2}}) {
      auto G = p == 2 ? builtin_group(BuiltinKind::Grigorchuk, 2) : builtin_group(BuiltinKind::GuptaSidki, p);
      PermGroup Q = level_quotient(G, l);
      int mm = k * *Q.order_exp(p);
      auto R = product_orbit_table(Q, p, l, k, mm, -1, EnumMode::Conjugacy, cfg.jobs);
      rows.push_back({{"p", p}, {"ell", l}, {"k", k}, {"orbits", R.witness_orbits}, {"expected", R.expected},
                      {"tight", R.witness_tight}, {"index_bound_ok", R.index_bound_ok}});
      ok = ok && R.witness_tight && R.index_bound_ok;
    }
    j["rows"] = std::move(rows);
  } else if (id == "orbit-upper" || id == "orbit-lower") {
    auto G = load_group(cfg);
    auto Q = std::make_shared<const PermGroup>(level_quotient(G, cfg.level, selector(cfg, G)));
    if (id == "orbit-upper") {
      auto job = make_job(cfg, Q, G.p(), cfg.max_m);
      auto S = enumerate_subgroups(job, [](const SubgroupRecord&) {});
      auto T = orbit_table(S.levels, G.p(), cfg.level, cfg.max_m);
      for (const auto& r : T.rows) ok = ok && r.pass;
      j["table"] = to_json(T);
    } else {
      Json w = Json::array();
      for (const auto& x : stabilizer_witnesses(Q, G.p(), cfg.level)) {
        w.push_back(to_json(x));
        ok = ok && x.pass();
      }
      j["witnesses"] = std::move(w);
    }
  } else if (id == "sandwich") {
    auto G = load_group(cfg);
    PermGroup Q = level_quotient(G, cfg.level, selector(cfg, G));
    auto S = sandwich_suite(Q, G.p(), cfg.max_m, cfg.jobs);
    j["checked"] = S.checked;
    j["lower_failures"] = S.lower_fail;
    j["stated_upper_failures"] = S.stated_upper_fail;
    j["proof_upper_failures"] = S.proof_upper_fail;
    j["stated_upper_violations"] = S.rows;
    ok = S.lower_fail == 0 && S.stated_upper_fail == 0 && S.proof_upper_fail == 0;
  } else if (id == "modgen") {
    Context sub{cfg, c.out, c.err, Json(), "", false};
    cmd_modgen(sub);
    j["failures"] = sub.result["failures"];
    j["instances"] = cfg.count;
    ok = !sub.verify_failed;
  } else if (id == "congruence-index") {
    auto G = load_group(cfg);
    Json rows = Json::array();
    for (int l = 1; l <= cfg.level; ++l) {
      auto r = congruence_index(G, l);
      rows.push_back({{"level", l}, {"order_exp", r.order_exp}, {"bound_exp", r.bound_exp}, {"equality", r.equality()}});
      ok = ok && r.pass();
    }
    j["rows"] = std::move(rows);
  } else if (id == "growth") {
    auto G = load_group(cfg);
    Json budget;
    auto T = enumerate_tables(c, G, cfg.level, &budget);
    auto R = growth_bounds_report(T);
    auto back = revalidate(to_json(T));
    j["report"] = to_json(R);
    j["round_trip_pass"] = back.pass();
    ok = R.pass() && back.pass();
  } else if (id == "kseed") {
    auto G = load_group(cfg);
    std::optional<BigInt> expected;
    if (G.id() == "grigorchuk") expected = BigInt(16);
    auto K = check_k_seed(G, 4, G.max_level(), expected);
    Json idx = Json::array();
    for (const auto& x : K.indices) idx.push_back(big_json(x));
    j["levels"] = K.levels;
    j["indices"] = std::move(idx);
    ok = K.pass();
  } else if (id == "antichain") {
    RunConfig sub = cfg;
    std::ostringstream sink;
    Context sc{sub, sink, c.err, Json(), "", false};
    cmd_subtree_orbits(sc);
    j["checked"] = sc.result["antichain_checked"];
    j["violations"] = sc.result["antichain_violations"];
    ok = !sc.verify_failed;
  } else {
    throw Error(Errc::Usage, "unknown verify id '" + id + "'");
  }
  j["pass"] = ok;
  if (!ok) c.verify_failed = true;
  c.result = std::move(j);
  c.csv = "id,pass\n" + id + "," + (ok ? "1" : "0") + "\n";
}

}  // namespace cli_detail

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  static const std::map<std::string, std::function<void(Context&)>> table = {
      {"info", cmd_info},
      {"quotient", cmd_quotient},
      {"enumerate", cmd_enumerate},
      {"dp-table", cmd_dp_table},
      {"orbit-table", cmd_orbit_table},
      {"product-orbits", cmd_product_orbits},
      {"partition", cmd_partition},
      {"modgen-check", cmd_modgen},
      {"wreath-dp", cmd_wreath_dp},
      {"subtree-orbits", cmd_subtree_orbits},
      {"stage-search", cmd_stage_search},
      {"alpha", cmd_alpha},
      {"verify", cmd_verify},
      {"report", cmd_report},
  };
  Context c{cfg, out, err, Json(), "", false};
  int status = kExitOk;
  Json envelope;
  envelope["schema"] = kSchemaVersion;
  envelope["tool_version"] = kToolVersion;
  envelope["command"] = cfg.command;
  envelope["config_hash"] = cfg.hash();
  envelope["seed"] = cfg.seed;
  try {
    auto it = table.find(cfg.command);
    if (it == table.end()) throw Error(Errc::Usage, "unknown command '" + cfg.command + "'");
    if (cfg.command == "verify" && cfg.target.empty())
      throw Error(Errc::Usage, "verify needs an id");
    it->second(c);
    envelope["result"] = c.result;
    if (c.verify_failed) status = kExitVerify;
  } catch (const BudgetExceeded& e) {
    status = kExitBudget;
    Json partial;
    partial["levels_completed"] = e.partial().complete_to;
    partial["budget_stats"] = to_json(e.partial().budget);
    envelope["error"] = {{"code", "BudgetExceeded"}, {"message", e.what()}, {"resume_token", e.resume_token()}};
    envelope["partial"] = std::move(partial);
    c.csv.clear();
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::BudgetExceeded:
      case Errc::CapExceeded:
      case Errc::CosetSpaceTooLarge:
      case Errc::IncompleteEnumeration: status = kExitBudget; break;
      case Errc::InequalityViolated: status = kExitVerify; break;
      default: status = kExitUsage;
    }
    envelope["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
    c.csv.clear();
  }
  envelope["exit_status"] = status;
  if (envelope.contains("error")) err << "error: " << envelope["error"]["message"].get<std::string>() << "\n";
  std::string text = cfg.format == "csv" && !c.csv.empty() ? c.csv : envelope.dump(2) + "\n";
  if (cfg.out.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.out);
    if (!f) {
      err << "error: cannot write " << cfg.out << "\n";
      return kExitUsage;
    }
    f << text;
  }
  return status;
}

/// Parses argv into cfg; returns -1 to continue or an exit status.
inline int parse_args(int argc, const char* const* argv, RunConfig& cfg, std::ostream& out, std::ostream& err) {
  CLI::App app{"p-group subgroup and orbit growth toolkit"};
  add_options(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return -1;
}

}  // namespace pgrowth
