#include <gtest/gtest.h>

#include <pgrowth/dsl.hpp>
#include <pgrowth/growth.hpp>
#include <pgrowth/io.hpp>
#include <pgrowth/lattice.hpp>
#include <pgrowth/selfsim.hpp>

#include "util.hpp"

using namespace pgrowth;

namespace {

const SelfSimilarGroup& grig() {
  static const auto G = builtin_group(BuiltinKind::Grigorchuk, 2);
  return G;
}

const SelfSimilarGroup& gs3() {
  static const auto G = builtin_group(BuiltinKind::GuptaSidki, 3);
  return G;
}

GrowthTables whole_table(int L, int max_m) {
  auto sw = stabilization_sweep(grig(), SeedSubgroup::whole(), max_m, {L});
  return sw.table;
}

GrowthRow row(int m, int dp, bool stab = true) {
  GrowthRow r;
  r.m = m;
  r.dp_max = dp;
  r.stabilized = stab;
  return r;
}

}  // namespace

TEST(KSeed, GrigorchukIndexSixteen) {
  auto C = check_k_seed(grig(), 4, 7, BigInt(16));
  EXPECT_TRUE(C.pass());
  for (const auto& x : C.indices) EXPECT_EQ(x, 16);
  EXPECT_NO_THROW(require_k_seed(grig(), 4, 7, BigInt(16)));
  EXPECT_ERRC(require_k_seed(grig(), 4, 5, BigInt(8)), Errc::InequalityViolated);
}

TEST(KSeed, GrigorchukStructure) {
  auto S = k_structure(grig(), 5);
  EXPECT_EQ(S.index_in_G, 16);
  EXPECT_EQ(S.index_K_Kn, 64);
  EXPECT_TRUE(S.Kn_in_frattini);
  EXPECT_EQ(S.dp_K, 3);
}

TEST(CongruenceIndex, GrigorchukOrders) {
  // |Q_l| = 2, 2^3, 2^7, 2^12, 2^22, 2^42
  const int expect[] = {1, 3, 7, 12, 22, 42};
  for (int L = 1; L <= 6; ++L) {
    auto r = congruence_index(grig(), L);
    EXPECT_EQ(r.order_exp, expect[L - 1]);
    EXPECT_EQ(r.bound_exp, (1 << L) - 1);
    EXPECT_TRUE(r.pass());
    EXPECT_EQ(r.equality(), L <= 3);
  }
}

TEST(CongruenceIndex, GuptaSidki) {
  for (int L = 1; L <= 4; ++L) {
    auto r = congruence_index(gs3(), L);
    EXPECT_TRUE(r.pass()) << L;
    EXPECT_EQ(r.bound_exp, static_cast<int>((upow(3, L) - 1) / 2));
  }
  EXPECT_TRUE(congruence_index(gs3(), 1).equality());
}

TEST(Alpha, GrigorchukStatedConstants) {
  auto A = alpha_estimate({row(0, 3)}, 4, 6, 3, 3);
  EXPECT_EQ(A.lower, Rational(3, 2));
  EXPECT_EQ(A.upper, Rational(12));
  EXPECT_EQ(A.m0_term, Rational(3, 2));
  EXPECT_TRUE(A.consistent());
  EXPECT_TRUE(A.has_certified);
}

TEST(Alpha, UnstabilizedRowsAreNotCertified) {
  auto A = alpha_estimate({row(0, 3), row(1, 9, false)}, 4, 6, 3, 3);
  EXPECT_EQ(A.lower, Rational(3, 2));
  EXPECT_EQ(A.optimistic, Rational(27, 9));
  EXPECT_EQ(A.terms.size(), 2u);
}

TEST(Alpha, Errors) {
  EXPECT_ERRC(alpha_estimate({}, 4, 6, 3, 3), Errc::EmptyTable);
  EXPECT_ERRC(alpha_estimate({row(0, -1)}, 4, 6, 3, 3), Errc::EmptyTable);
  EXPECT_ERRC(alpha_estimate({row(0, 3)}, 1, 6, 3, 3), Errc::Usage);
  EXPECT_ERRC(alpha_estimate({row(0, 3)}, 4, 0, 3, 3), Errc::Usage);
}

TEST(Alpha, LowerBoundMonotoneInMaxM) {
  auto small = stabilization_sweep(grig(), SeedSubgroup::k_of(grig()), 1, {4, 5});
  auto large = stabilization_sweep(grig(), SeedSubgroup::k_of(grig()), 3, {4, 5});
  auto A = alpha_estimate(small.table.rows, 4, 6, 3, 3);
  auto B = alpha_estimate(large.table.rows, 4, 6, 3, 3);
  EXPECT_LE(A.lower, B.lower);
  EXPECT_GE(B.lower, Rational(3, 2));
  EXPECT_TRUE(B.consistent());
}

TEST(Windows, Grigorchuk) {
  auto F = family_constants(grig());
  EXPECT_EQ(F.bracket_lower, Rational(3, 2));
  EXPECT_EQ(F.bracket_upper, Rational(12));
  EXPECT_EQ(F.window.lower, Rational(9, 40));
  EXPECT_EQ(F.window.upper, Rational(6));
  EXPECT_EQ(F.window.lower_text, "9/40");
  EXPECT_EQ(F.window.upper_text, "6");
}

TEST(Windows, GuptaSidkiStatedText) {
  auto F = family_constants(gs3());
  EXPECT_EQ(F.window.lower_text, "1/8");
  EXPECT_EQ(F.window.upper_text, "(3p^2-4p+1)/2 = 8");
  EXPECT_EQ(F.bracket_upper, Rational(16));
  EXPECT_EQ(F.computed_upper, Rational(10));
  EXPECT_FALSE(F.note.empty());
}

TEST(Windows, UnknownFamily) {
  auto G = parse_group_def("p = 2\ngen a = perm (0 1) sections [1, a]\nid = odometer\n");
  EXPECT_ERRC(family_constants(G), Errc::Usage);
}

TEST(GrowthReport, GrigorchukQuotientsPass) {
  for (int L = 2; L <= 4; ++L) {
    auto T = whole_table(L, 4);
    auto R = growth_bounds_report(T);
    EXPECT_TRUE(R.pass()) << L;
    EXPECT_NO_THROW(require_pass(R));
    for (const auto& c : R.rows)
      if (c.m >= 1) EXPECT_FALSE(c.mus.empty());
  }
}

TEST(GrowthReport, SyntheticViolations) {
  GrowthTables T;
  T.p = 2;
  T.rows = {row(0, 2), row(1, 2)};
  T.rows[0].s_count = 1;
  T.rows[1].s_count = 2;  // lower bound asks for 2^(1*(2-1)) = 2 and upper allows 2^2
  EXPECT_TRUE(growth_bounds_report(T).pass());
  T.rows[1].s_count = 1;
  auto R = growth_bounds_report(T);
  EXPECT_FALSE(R.pass());
  EXPECT_FALSE(R.rows[1].lower_ok);
  T.rows[1].s_count = 5;
  R = growth_bounds_report(T);
  EXPECT_FALSE(R.rows[1].upper_ok);
  EXPECT_ERRC(require_pass(R), Errc::InequalityViolated);
}

TEST(Io, RoundTripAndRevalidate) {
  auto T = whole_table(3, 4);
  auto j = to_json(T);
  auto U = growth_tables_from_json(Json::parse(j.dump()));
  EXPECT_EQ(U.group_id, T.group_id);
  ASSERT_EQ(U.rows.size(), T.rows.size());
  for (std::size_t i = 0; i < T.rows.size(); ++i) {
    EXPECT_EQ(U.rows[i].s_count, T.rows[i].s_count);
    EXPECT_EQ(U.rows[i].dp_max, T.rows[i].dp_max);
    EXPECT_EQ(U.rows[i].class_count, T.rows[i].class_count);
  }
  EXPECT_TRUE(revalidate(j).pass());
  j["per_m"][1]["s_count"] = "1000000";
  EXPECT_FALSE(revalidate(j).pass());
}
