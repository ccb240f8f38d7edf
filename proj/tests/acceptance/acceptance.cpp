// Acceptance runner: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every failure is a known conflict whose corrected
// form passes (criterion 7), 1 otherwise.  --strict treats every FAIL as fatal.

#include <chrono>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <pgrowth/growth.hpp>
#include <pgrowth/io.hpp>
#include <pgrowth/lattice.hpp>
#include <pgrowth/modgen.hpp>
#include <pgrowth/orbit_growth.hpp>
#include <pgrowth/selfsim.hpp>
#include <pgrowth/subtree.hpp>

#include "../corpus.hpp"
#include "../oracle.hpp"

using namespace pgrowth;
using namespace pgrowth::fixtures;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  bool known_conflict = false;  // FAIL explained by a documented conflict
  bool corrected_pass = true;   // ... whose corrected form holds

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("violated: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

const SelfSimilarGroup& grig() {
  static const auto G = builtin_group(BuiltinKind::Grigorchuk, 2);
  return G;
}

const SelfSimilarGroup& gs3() {
  static const auto G = builtin_group(BuiltinKind::GuptaSidki, 3);
  return G;
}

EnumerationJob job_for(std::shared_ptr<const PermGroup> Q, int p, int max_m, EnumMode mode, int jobs = 1) {
  EnumerationJob job;
  job.group = std::move(Q);
  job.p = p;
  job.max_m = max_m;
  job.mode = mode;
  job.parallelism = jobs;
  job.memory_budget = std::size_t(4) << 30;
  return job;
}

// fewest powers of p summing to p^m with one part equal to 1, by plain search
int partition_search(int p, int m) {
  const long long total = static_cast<long long>(upow(p, m));
  int best = std::numeric_limits<int>::max();
  std::function<void(long long, int, int)> go = [&](long long rest, int e, int parts) {
    if (parts >= best) return;
    if (rest == 0) {
      best = parts;
      return;
    }
    if (e < 0) return;
    long long c = static_cast<long long>(upow(p, e));
    for (long long t = rest / c; t >= 0; --t) go(rest - t * c, e - 1, parts + static_cast<int>(t));
  };
  go(total - 1, m - 1, 1);
  return best;
}

// every table produced along the way, rechecked for criterion 10
std::vector<GrowthTables>& emitted_tables() {
  static std::vector<GrowthTables> t;
  return t;
}

Outcome c1_partition() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  int rows = 0;
  for (auto [p, top] : std::vector<std::pair<int, int>>{{2, 10}, {3, 5}, {5, 5}})
    for (int m = 1; m <= top; ++m, ++rows) {
      int v = partition_min_parts(p, m);
      std::string at = "p=" + std::to_string(p) + " m=" + std::to_string(m);
      o.require(v == (p - 1) * m + 1, at + " min_parts " + std::to_string(v));
      o.require(v == partition_search(p, m), at + " disagrees with exhaustive search");
    }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(s < 60, "time limit");
  o.note(std::to_string(rows) + " rows");
  return o;
}

Outcome c2_grigorchuk_constants() {
  Outcome o;
  const auto& md = grig().metadata();
  o.require(md.k == 4 && md.ell == 6 && md.d == 3 && md.d_K == 3, "metadata k=4 ell=6 d=3 d(K)=3");
  auto K = check_k_seed(grig(), 4, 7, BigInt(16));
  o.require(K.pass(), "K seed index stabilizes at 16 on levels 4..7");
  if (!K.pass()) return o;  // a wrong seed aborts the rest
  for (int lv : {5, 6}) {
    auto S = k_structure(grig(), lv);
    o.require(S.index_in_G == 16, "(G:K) at level " + std::to_string(lv));
    o.require(S.index_K_Kn == 64, "(K:K_2) = 2^6 at level " + std::to_string(lv));
  }
  auto A = alpha_estimate({GrowthRow{0, 0, 0, 0, *md.d_K, -1, -1, true}}, *md.k, *md.ell, *md.d, *md.d_K);
  o.require(A.lower == Rational(3, 2), "alpha lower endpoint 3/2");
  o.require(A.upper == Rational(12), "alpha upper endpoint 12");
  auto F = family_constants(grig());
  o.require(F.bracket_lower == Rational(3, 2) && F.bracket_upper == Rational(12), "family bracket");
  o.note("alpha bracket [" + to_string(A.lower) + ", " + to_string(A.upper) + "]");
  return o;
}

Outcome orbit_upper_for(const SelfSimilarGroup& G, int L, int max_m, int budget_m) {
  Outcome o;
  auto Q = std::make_shared<const PermGroup>(level_quotient(G, L));
  EnumerationSummary S;
  int done = max_m;
  try {
    S = enumerate_subgroups(job_for(Q, G.p(), max_m, EnumMode::Conjugacy), [](const SubgroupRecord&) {});
  } catch (const BudgetExceeded& e) {
    S.levels = e.partial().levels;
    done = e.partial().complete_to;
    o.require(done >= budget_m, "budget exhausted at m=" + std::to_string(done));
  }
  auto T = orbit_table(S.levels, G.p(), L, std::min(done, max_m));
  for (const auto& r : T.rows)
    o.require(r.pass, G.id() + " m=" + std::to_string(r.m) + " orbits " + std::to_string(r.o_max));
  std::ostringstream os;
  os << G.id() << " level " << L << ": m<=" << std::min(done, max_m) << ", o_max";
  for (const auto& r : T.rows) os << ' ' << r.o_max;
  o.note(os.str());
  emitted_tables().push_back(tables_from_summary(S, std::min(done, max_m), G.p(), L, EnumMode::Conjugacy, G.id()));
  return o;
}

Outcome c3_orbit_upper() {
  Outcome o = orbit_upper_for(grig(), 5, 6, 6);
  Outcome b = orbit_upper_for(gs3(), 3, 5, 4);
  o.pass = o.pass && b.pass;
  o.notes.insert(o.notes.end(), b.notes.begin(), b.notes.end());
  return o;
}

Outcome c4_witnesses() {
  Outcome o;
  for (auto [G, top] : std::vector<std::pair<const SelfSimilarGroup*, int>>{{&grig(), 5}, {&gs3(), 3}})
    for (int L = 1; L <= top; ++L) {
      auto Q = std::make_shared<const PermGroup>(level_quotient(*G, L));
      std::ostringstream os;
      os << G->id() << " level " << L << ":";
      for (const auto& w : stabilizer_witnesses(Q, G->p(), L)) {
        int direct = oracle::orbits(w.handle.group.generators(), Q->degree());
        o.require(direct == w.orbits, "orbit count recomputation");
        o.require(Q->order() / w.handle.group.order() == big_pow(G->p(), w.m), "index exponent");
        o.require(w.pass(), G->id() + " j=" + std::to_string(w.j));
        os << " (m=" << w.m << ", orbits=" << w.orbits << ")";
      }
      o.note(os.str());
    }
  return o;
}

Outcome c5_lattice_oracle() {
  Outcome o;
  auto groups = corpus();
  o.require(groups.size() >= 10, "corpus size");
  for (const auto& c : groups) {
    auto Q = make_group(c);
    o.require(Q->order() <= 128, c.name + " order");
    auto E = oracle::closure(c.gens, c.degree);
    auto expected = oracle::all_subgroups(E);
    std::set<oracle::Subset> got;
    EnumerationSummary S;
    auto recs = collect_subgroups(job_for(Q, c.p, *Q->order_exp(c.p), EnumMode::Exact), &S);
    for (const auto& r : recs) got.insert(oracle::element_set(E, r.generators));
    o.require(got.size() == recs.size() && got == expected, c.name + " subgroup set");
    if (c.name == "grigorchuk_l2") o.require(recs.size() == 10, "Grigorchuk level-2 total 10");
    emitted_tables().push_back(tables_from_summary(S, *Q->order_exp(c.p), c.p, -1, EnumMode::Exact, c.name));
  }
  auto Q = std::make_shared<const PermGroup>(level_quotient(grig(), 4));
  for (auto mode : {EnumMode::Exact, EnumMode::Conjugacy}) {
    std::string out[2];
    int i = 0;
    for (int w : {1, 8}) {
      auto S = enumerate_subgroups(job_for(Q, 2, 4, mode, w), [](const SubgroupRecord&) {});
      out[i++] = to_json(tables_from_summary(S, 4, 2, 4, mode, "grigorchuk")).dump();
    }
    o.require(out[0] == out[1], std::string("1 vs 8 workers, ") + mode_name(mode));
  }
  o.note(std::to_string(groups.size()) + " groups, worker runs byte-identical");
  return o;
}

Outcome c6_modgen() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  int fails = 0;
  for (int i = 0; i < 200; ++i) {
    int p = i % 2 ? 3 : 2;
    auto I = random_modgen_instance(p, rng);
    bool shape = I.module.dim <= 12 && I.group_order <= 64 && I.module.valid() && I.phi.is_invariant(I.module);
    auto C = check_modgen(I);
    if (!shape || !C.pass() || C.output_size > static_cast<std::size_t>(C.d + C.m - 1)) ++fails;
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(fails == 0, std::to_string(fails) + " failing instances");
  o.require(s < 300, "time limit");
  o.note("200 instances, p in {2,3}");
  return o;
}

Outcome c7_sandwich() {
  Outcome o;
  PermGroup Q = level_quotient(grig(), 3);
  auto W = wreath_quotient(Q, 2);
  EnumerationSummary S;
  auto recs = collect_subgroups(job_for(std::make_shared<const PermGroup>(Q), 2, 4, EnumMode::Exact), &S);
  std::vector<int> D(5, 0);
  for (int m = 0; m <= 4 && m < static_cast<int>(S.levels.size()); ++m)
    D[m] = std::max(m ? D[m - 1] : 0, S.levels[m].dp_max);
  std::size_t lower_fail = 0, stated_fail = 0, proof_fail = 0;
  std::set<int> stated_fail_m;
  for (const auto& r : recs) {
    auto C = phi_orbit_surjection(W, r.group(Q.degree()), r.m, D[r.m]);
    if (!C.lower_ok()) ++lower_fail;
    if (!C.upper_ok()) {
      ++stated_fail;
      stated_fail_m.insert(r.m);
    }
    if (!C.upper_proof_ok()) ++proof_fail;
  }
  o.require(lower_fail == 0, std::to_string(lower_fail) + " surjection/lower-bound failures");
  o.require(stated_fail == 0, std::to_string(stated_fail) + " of " + std::to_string(recs.size()) +
                                  " subgroups exceed N + n*max dp");
  o.corrected_pass = lower_fail == 0 && proof_fail == 0;
  if (stated_fail) {
    std::string ms;
    for (int m : stated_fail_m) ms += " " + std::to_string(m);
    o.note("stated bound fails only at m =" + ms + "; there N + n*max dp = 1 while d_p = 4");
    o.known_conflict = lower_fail == 0 && stated_fail_m == std::set<int>{0};
  }
  o.note("bound N + n*(D-1) + D keeping the lifted generators: " + std::to_string(proof_fail) + " failures on " +
         std::to_string(recs.size()) + " subgroups");
  return o;
}

Outcome c8_lemmas() {
  Outcome o;
  for (int p : {2, 3}) {
    std::vector<int> c(p);
    for (int i = 0; i < p; ++i) c[i] = i;
    PermGroup C(p, {Perm::from_cycles(p, {c})});
    o.require(verify_lemma_direct(C, C, p, 2).pass(), "direct, cyclic squared p=" + std::to_string(p));
  }
  PermGroup Q2 = level_quotient(grig(), 2);
  auto D = verify_lemma_direct(Q2, Q2, 2, 6);
  o.require(D.pass(), "direct, Grigorchuk level 2 squared");
  o.note("direct: " + std::to_string(D.checked) + " subgroups");

  auto sw = stabilization_sweep(grig(), SeedSubgroup::k_of(grig()), 3, {4, 5});
  emitted_tables().push_back(sw.table);
  const auto& md = grig().metadata();
  auto I = verify_lemma_inductive(sw.table.rows.front().dp_max, *md.k, *md.ell, *md.d, sw.table);
  o.require(I.pass(), "inductive on the K table");
  o.note("inductive: " + std::to_string(I.checked) + " rows, min slack " + std::to_string(I.min_slack));

  std::mt19937_64 rng(2024);
  auto P = verify_permutation_product(random_product_samples(Q2, Q2, 500, rng));
  o.require(P.checked == 500 && P.violations == 0, "permutation product");
  o.note("permutation product: 500 samples, max ratio " + to_string(P.max_ratio));

  for (auto [p, L, k] : std::vector<std::tuple<int, int, int>>{{2, 2, 2}, {2, 1, 3}, {3, 1, 2}}) {
    PermGroup Q = level_quotient(p == 2 ? grig() : gs3(), L);
    auto R = product_orbit_table(Q, p, L, k, k * *Q.order_exp(p));
    std::string at = "(p,l,k)=(" + std::to_string(p) + "," + std::to_string(L) + "," + std::to_string(k) + ")";
    o.require(R.witness_tight && R.witness_orbits == upow(p, k * L) && R.index_bound_ok, "many orbits " + at);
  }
  return o;
}

Outcome c9_congruence() {
  Outcome o;
  for (auto [G, top] : std::vector<std::pair<const SelfSimilarGroup*, int>>{{&grig(), 6}, {&gs3(), 4}}) {
    std::string eq;
    for (int L = 1; L <= top; ++L) {
      auto r = congruence_index(*G, L);
      o.require(r.pass(), G->id() + " level " + std::to_string(L));
      if (r.equality()) eq += " " + std::to_string(L);
    }
    o.note(G->id() + " equality at levels" + eq);
  }
  return o;
}

Outcome c10_growth() {
  Outcome o;
  for (int L = 2; L <= 4; ++L) {
    auto Q = std::make_shared<const PermGroup>(level_quotient(grig(), L));
    auto S = enumerate_subgroups(job_for(Q, 2, 4, EnumMode::Conjugacy), [](const SubgroupRecord&) {});
    emitted_tables().push_back(tables_from_summary(S, 4, 2, L, EnumMode::Conjugacy, "grigorchuk"));
  }
  std::size_t rows = 0;
  for (const auto& T : emitted_tables()) {
    auto R = growth_bounds_report(T);
    auto back = revalidate(to_json(T));
    o.require(R.pass() && back.pass(), T.group_id + " level " + std::to_string(T.level));
    rows += R.rows.size();
  }
  o.note(std::to_string(emitted_tables().size()) + " tables, " + std::to_string(rows) + " rows");
  auto Wg = family_constants(grig()).window;
  auto Ws = family_constants(gs3()).window;
  o.require(Wg.lower_text == "9/40" && Wg.upper_text == "6", "Grigorchuk window text");
  o.require(Ws.lower_text == "1/8" && Ws.upper_text.rfind("(3p^2-4p+1)/2", 0) == 0, "Gupta-Sidki window text");
  o.note("window grigorchuk (informational): (" + Wg.lower_text + ", " + Wg.upper_text + ")");
  o.note("window gupta_sidki (informational): (" + Ws.lower_text + ", " + Ws.upper_text + ")");
  return o;
}

Outcome c11_subtrees() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(11);
  int cases = 0;
  for (int L = 1; L <= 3; ++L) {
    PermGroup Q = level_quotient(grig(), L);
    for (int i = 0; i < 70; ++i, ++cases) {
      auto S = random_tree(2, L, rng);
      Perm g = Q.random_element(rng);
      o.require(complete(apply(g, L, S).image()) == apply(g, L, complete(S)).image(), "completion equivariance");
      auto U = random_subgroup(Q, rng);
      auto a = orbit_count_on_embeddings(Q, U, 2, L, S);
      o.require(a == BigInt(orbit_count_materialized(Q, U, 2, L, S)), "double cosets vs materialized");
      o.require(a == orbit_count_on_embeddings(Q, U, 2, L, complete(S)), "completion bijection");
    }
  }
  o.note(std::to_string(cases) + " random cases");

  // continuity: every complete tree of depth <= 3 and every single sibling-set extension, level 4
  PermGroup Q4 = level_quotient(grig(), 4);
  auto Q4p = std::make_shared<const PermGroup>(Q4);
  auto recs = collect_subgroups(job_for(Q4p, 2, 4, EnumMode::Conjugacy));
  std::vector<std::vector<Vertex>> ext;
  complete_extensions(Vertex{}, 2, 3, ext);
  std::size_t pairs = 0;
  for (const auto& e : ext) {
    auto S = ColouredSubtree::from_vertices(2, e);
    for (const auto& v : S.vertices()) {
      if (v.level() >= 3) continue;
      Vertex c = v;
      c.word.push_back(0);
      if (S.contains(c)) continue;
      auto T = add_children(S, v);
      for (const auto& r : recs) {
        PermGroup U = r.group(16);
        BigInt a = orbit_count_on_embeddings(Q4, U, 2, 4, S);
        BigInt b = orbit_count_on_embeddings(Q4, U, 2, 4, T);
        o.require(a <= b && b <= 2 * a, "continuity factor");
        ++pairs;
      }
    }
  }
  o.note(std::to_string(pairs) + " sibling-extension pairs");

  std::size_t checked = 0;
  for (int L = 2; L <= 4; ++L) {
    auto Q = std::make_shared<const PermGroup>(level_quotient(grig(), L));
    for (const auto& words : {std::vector<std::string>{"00"}, std::vector<std::string>{"000", "11"}}) {
      auto S = complete(ColouredSubtree::from_strings(2, words)).truncate(L);
      enumerate_subgroups(job_for(Q, 2, std::min(L + 1, 5), EnumMode::Exact), [&](const SubgroupRecord& r) {
        auto A = antichain_bound_check(*Q, r.group(Q->degree()), 2, L, S);
        if (!A.applicable) return;  // U = Q: the bound needs a proper subgroup
        ++checked;
        o.require(A.pass, "antichain bound L=" + std::to_string(L) + " m=" + std::to_string(r.m));
      });
    }
  }
  o.note(std::to_string(checked) + " antichain pairs");

  auto ts = std::chrono::steady_clock::now();
  PermGroup Q3 = level_quotient(grig(), 3);
  auto f = [](int n) { return static_cast<long long>(n); };
  auto R = stage_classify(Q3, 2, 1, 3, f);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - ts).count();
  o.require(secs < 600, "stage search time");
  auto all = collect_subgroups(job_for(std::make_shared<const PermGroup>(Q3), 2, 7, EnumMode::Exact));
  for (const auto& c : R.candidates) {
    std::vector<std::size_t> best(8, 0);
    for (const auto& r : all)
      best[r.m] = std::max(best[r.m], orbit_count_materialized(Q3, r.group(8), 2, 3, c.tree));
    bool large = false;
    std::size_t cum = 0;
    for (int n = 0; n <= 7; ++n) {
      cum = std::max(cum, best[n]);
      if (n >= 1 && static_cast<long long>(cum) > n) large = true;
    }
    o.require(c.large == large, "stage classification");
  }
  o.note("stage search: " + std::to_string(R.candidates.size()) + " candidates, " +
         (R.found ? "found" : "no small/large pair (NotFound)"));
  double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.note("elapsed " + std::to_string(static_cast<int>(total)) + " s");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"partition lemma, exact", c1_partition},
      {"Grigorchuk constants", c2_grigorchuk_constants},
      {"orbit upper bound", c3_orbit_upper},
      {"orbit lower bound witnesses", c4_witnesses},
      {"lattice oracle equivalence", c5_lattice_oracle},
      {"module generation", c6_modgen},
      {"sandwich bound", c7_sandwich},
      {"direct / inductive / permutation-product / many-orbits", c8_lemmas},
      {"congruence index bound", c9_congruence},
      {"subgroup growth inequalities and windows", c10_growth},
      {"subtree machinery", c11_subtrees},
  };
  int unexplained = 0, failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu  %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), s);
    for (const auto& n : o.notes) std::printf("        %s\n", n.c_str());
    if (!o.pass) {
      ++failed;
      if (o.known_conflict && o.corrected_pass)
        std::printf("        known conflict: corrected bound passes\n");
      else
        ++unexplained;
    }
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed, %d unexplained\n", criteria.size(), failed, unexplained);
  return (strict ? failed : unexplained) ? 1 : 0;
}
