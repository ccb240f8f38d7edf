#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "permgroup.hpp"
#include "selfsim.hpp"

namespace pgrowth {

// ---------------------------------------------------------------------------
// Distinguished subgroup K

struct KSeedCheck {
  std::vector<int> levels;
  std::vector<BigInt> indices;  // (G:K) image per level
  std::optional<BigInt> expected;
  bool stable = false;
  bool pass() const {
    return stable && (!expected || (!indices.empty() && indices.back() == *expected));
  }
};

/// (G:K) at each level in [from, to]; stable when all equal.
inline KSeedCheck check_k_seed(const SelfSimilarGroup& G, int from, int to,
                               std::optional<BigInt> expected = std::nullopt) {
  KSeedCheck C;
  C.expected = expected;
  const auto seed = SeedSubgroup::k_of(G);
  for (int lv = from; lv <= to; ++lv) {
    G.check_level(lv);
    PermGroup Q = level_quotient(G, lv);
    PermGroup K = level_quotient(G, lv, seed);
    C.levels.push_back(lv);
    C.indices.push_back(Q.order() / K.order());
  }
  C.stable = !C.indices.empty();
  for (const auto& x : C.indices) C.stable = C.stable && x == C.indices.front();
  return C;
}

/// Throws unless the K index is stable (and equals the expected value).
inline void require_k_seed(const SelfSimilarGroup& G, int from, int to, std::optional<BigInt> expected = std::nullopt) {
  auto C = check_k_seed(G, from, to, expected);
  if (!C.pass()) {
    std::string s;
    for (std::size_t i = 0; i < C.levels.size(); ++i)
      s += " " + std::to_string(C.levels[i]) + ":" + to_string(C.indices[i]);
    throw Error(Errc::InequalityViolated, "K seed index does not stabilize:" + s);
  }
}

/// Words generating the K image at the given level.
inline std::vector<ElementWord> k_words(const SelfSimilarGroup& G, int level) {
  using Kind = GroupMetadata::KKind;
  if (G.metadata().k_kind == Kind::Derived) return derived_words(G, level);
  if (G.metadata().k_kind == Kind::NormalClosure) return normal_closure_words(G, G.metadata().k_seed, level);
  throw Error(Errc::Usage, "group " + G.id() + " has no distinguished subgroup K");
}

struct KStructure {
  int level = 0;
  BigInt index_in_G = 0;
  int dp_K = 0;
  BigInt index_K_Kn = 0;  // (K : K^(p^depth)) image
  int depth = 2;
  bool Kn_in_frattini = false;
};

inline KStructure k_structure(const SelfSimilarGroup& G, int level, int depth = 2) {
  KStructure S;
  S.level = level;
  S.depth = depth;
  PermGroup Q = level_quotient(G, level);
  PermGroup K = level_quotient(G, level, SeedSubgroup::k_of(G));
  S.index_in_G = Q.order() / K.order();
  S.dp_K = dp(K, G.p());
  PermGroup Kn = geometric_power_image(G, k_words(G, level), depth, level);
  S.index_K_Kn = K.order() / Kn.order();
  S.Kn_in_frattini = Kn.is_subgroup_of(frattini_p(K, G.p()));
  return S;
}

// ---------------------------------------------------------------------------
// Congruence index bound

struct CongruenceIndexRow {
  int level = 0;
  int order_exp = 0;
  int bound_exp = 0;  // (p^l - 1)/(p - 1)
  bool pass() const { return order_exp <= bound_exp; }
  bool equality() const { return order_exp == bound_exp; }
};

inline CongruenceIndexRow congruence_index(const SelfSimilarGroup& G, int level) {
  CongruenceIndexRow r;
  r.level = level;
  r.order_exp = *level_quotient(G, level).order_exp(G.p());
  r.bound_exp = static_cast<int>((upow(G.p(), level) - 1) / (G.p() - 1));
  return r;
}

// ---------------------------------------------------------------------------
// Alpha bracket

struct AlphaTerm {
  int m = 0;
  int dp = 0;
  bool stabilized = false;
  Rational value = 0;  // dp / (m + ell/(k-1))
};

struct AlphaEstimate {
  std::string group_id;
  int k = 0, ell = 0, d = 0, dp_K = 0;
  std::vector<AlphaTerm> terms;
  Rational lower = 0;       // certified: stabilized terms only
  Rational optimistic = 0;  // all terms
  Rational upper = 0;       // (k-1) dp_K + d
  Rational m0_term = 0;     // (k-1) dp_K / ell
  bool has_certified = false;
  bool consistent() const { return lower <= upper && optimistic <= upper; }
};

/// `rows` are d_p(m) values of K; only stabilized rows enter the certified bound.
inline AlphaEstimate alpha_estimate(const std::vector<GrowthRow>& rows, int k, int ell, int d, int dp_K,
                                    std::string id = "") {
  if (rows.empty()) throw Error(Errc::EmptyTable, "no d_p(m) entries");
  if (k < 2 || ell <= 0 || d <= 0) throw Error(Errc::Usage, "constants must satisfy k >= 2, ell > 0, d > 0");
  AlphaEstimate A;
  A.group_id = std::move(id);
  A.k = k;
  A.ell = ell;
  A.d = d;
  A.dp_K = dp_K;
  A.upper = Rational((k - 1) * dp_K + d);
  A.m0_term = Rational((k - 1) * dp_K, ell);
  for (const auto& r : rows) {
    if (r.dp_max < 0) continue;
    AlphaTerm t;
    t.m = r.m;
    t.dp = r.dp_max;
    t.stabilized = r.stabilized;
    // dp / (m + ell/(k-1)) = dp (k-1) / (m (k-1) + ell)
    t.value = Rational(BigInt(r.dp_max) * (k - 1), BigInt(r.m) * (k - 1) + ell);
    if (t.value > A.optimistic) A.optimistic = t.value;
    if (t.stabilized) {
      A.has_certified = true;
      if (t.value > A.lower) A.lower = t.value;
    }
    A.terms.push_back(t);
  }
  if (A.terms.empty()) throw Error(Errc::EmptyTable, "no d_p(m) entries");
  return A;
}

// ---------------------------------------------------------------------------
// Subgroup growth inequalities

struct GrowthCheckRow {
  int m = 0;
  BigInt s_count = 0;
  std::vector<int> mus;     // admissible mu
  int best_lower_exp = -1;  // max mu (dp(m-mu) - mu)
  int upper_exp = 0;        // sum_{nu<m} dp_max(nu)
  bool lower_ok = true;
  bool upper_ok = true;
  double log_ratio = 0;     // log_p s / m^2, informational
};

struct WindowEndpoints {
  std::string label;
  Rational lower = 0;
  Rational upper = 0;
  std::string lower_text;
  std::string upper_text;
};

struct GrowthReport {
  std::string group_id;
  int p = 2;
  std::vector<GrowthCheckRow> rows;
  std::vector<std::string> violations;
  std::optional<WindowEndpoints> window;
  bool pass() const { return violations.empty(); }
};

/// alpha^2/(4(alpha+1)) and alpha/2 for a bracket [lo, hi].
inline WindowEndpoints window_from_bracket(const Rational& lo, const Rational& hi, std::string label) {
  WindowEndpoints W;
  W.label = std::move(label);
  W.lower = lo * lo / (4 * (lo + 1));
  W.upper = hi / 2;
  W.lower_text = to_string(W.lower);
  W.upper_text = to_string(W.upper);
  return W;
}

/// p^{mu(dp(m-mu)-mu)} <= s_{p^m} for 1 <= mu <= dp(m-mu), and
/// s_{p^m} <= p^{sum_{nu<m} dp(nu)}.
inline GrowthReport growth_bounds_report(const GrowthTables& T, std::optional<WindowEndpoints> window = std::nullopt) {
  GrowthReport R;
  R.group_id = T.group_id;
  R.p = T.p;
  R.window = std::move(window);
  const auto& rows = T.rows;
  int prefix = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    GrowthCheckRow c;
    c.m = r.m;
    c.s_count = r.s_count;
    c.upper_exp = prefix;
    if (r.m >= 1) {
      c.upper_ok = r.s_count <= big_pow(T.p, prefix);
      for (int mu = 1; mu <= r.m; ++mu) {
        int dpv = rows[r.m - mu].dp_max;
        if (mu > dpv) continue;
        c.mus.push_back(mu);
        int e = mu * (dpv - mu);
        c.best_lower_exp = std::max(c.best_lower_exp, e);
        if (big_pow(T.p, e) > r.s_count) c.lower_ok = false;
      }
      c.log_ratio = std::log(static_cast<double>(r.s_count)) / std::log(static_cast<double>(T.p)) /
                    (static_cast<double>(r.m) * r.m);
    }
    if (!c.lower_ok) R.violations.push_back("m=" + std::to_string(r.m) + " lower bound exceeds s");
    if (!c.upper_ok) R.violations.push_back("m=" + std::to_string(r.m) + " s exceeds upper bound");
    prefix += r.dp_max;
    R.rows.push_back(std::move(c));
  }
  return R;
}

inline void require_pass(const GrowthReport& R) {
  if (!R.pass()) throw Error(Errc::InequalityViolated, R.violations.front());
}

/// Endpoint constants for the builtin families.  The Gupta-Sidki upper
/// endpoint is carried as the stated closed form; `computed_upper` holds
/// (k-1) d(K) + d evaluated from the stated constants.
struct FamilyConstants {
  std::string family;
  int p = 2;
  WindowEndpoints window;
  Rational bracket_lower = 0;
  Rational bracket_upper = 0;
  Rational computed_upper = 0;
  std::string note;
};

inline FamilyConstants family_constants(const SelfSimilarGroup& G) {
  FamilyConstants F;
  F.p = G.p();
  const auto& md = G.metadata();
  if (G.id() == "grigorchuk") {
    F.family = "grigorchuk";
    F.bracket_lower = Rational((*md.k - 1) * *md.d_K, *md.ell);
    F.bracket_upper = Rational((*md.k - 1) * *md.d_K + *md.d);
    F.computed_upper = F.bracket_upper;
    F.window = window_from_bracket(F.bracket_lower, F.bracket_upper, "grigorchuk");
  } else if (G.id().rfind("gupta_sidki", 0) == 0) {
    const long long p = G.p();
    F.family = "gupta_sidki";
    F.bracket_upper = Rational(3 * p * p - 4 * p + 1);
    F.computed_upper = Rational((*md.k - 1) * *md.d_K + *md.d);
    F.window.label = "gupta_sidki";
    F.window.lower = Rational(1, 8);
    F.window.upper = F.bracket_upper / 2;
    F.window.lower_text = "1/8";
    F.window.upper_text = "(3p^2-4p+1)/2 = " + to_string(F.window.upper);
    F.note = "stated upper 3p^2-4p+1; (k-1)d(K)+d from the stated constants gives " + to_string(F.computed_upper);
  } else {
    throw Error(Errc::Usage, "no family constants for " + G.id());
  }
  return F;
}

}  // namespace pgrowth
