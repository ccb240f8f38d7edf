#include <functional>
#include <random>

#include <gtest/gtest.h>

#include <pgrowth/lattice.hpp>
#include <pgrowth/orbit_growth.hpp>
#include <pgrowth/selfsim.hpp>

#include "oracle.hpp"
#include "util.hpp"

using namespace pgrowth;

namespace {

std::shared_ptr<const PermGroup> grig_quotient(int L) {
  static const auto G = builtin_group(BuiltinKind::Grigorchuk, 2);
  return std::make_shared<const PermGroup>(level_quotient(G, L));
}

EnumerationSummary enumerate(std::shared_ptr<const PermGroup> Q, int p, int max_m,
                             const std::function<void(const SubgroupRecord&)>& f = nullptr) {
  EnumerationJob job;
  job.group = std::move(Q);
  job.p = p;
  job.max_m = max_m;
  job.mode = EnumMode::Conjugacy;
  return enumerate_subgroups(job, [&](const SubgroupRecord& r) {
    if (f) f(r);
  });
}

// fewest powers of p summing to p^m with a part equal to 1, by plain recursion
int partition_oracle(int p, int m) {
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

}  // namespace

TEST(OrbitsOnLevel, TrivialFullAndStabilizer) {
  auto Q = grig_quotient(2);
  EXPECT_EQ(orbits_on_level(make_handle(Q, *Q, 2)), 1);
  EXPECT_EQ(orbits_on_level(make_handle(Q, PermGroup::trivial(4), 2)), 4);
  auto St1 = level_stabilizer(*Q, 2, 2, 1);
  EXPECT_EQ(Q->order() / St1.order(), 2);
  EXPECT_EQ(orbits_on_level(make_handle(Q, St1, 2)), 2);
  EXPECT_EQ(oracle::orbits(St1.generators(), 4), 2);
}

TEST(OrbitsOnLevel, LevelStabilizerIsKernelOfBlocks) {
  auto Q = grig_quotient(4);
  for (int j = 0; j <= 4; ++j) {
    auto St = level_stabilizer(*Q, 2, 4, j);
    for (const auto& g : St.generators())
      for (Point x = 0; x < 16; ++x) EXPECT_EQ(g[x] >> (4 - j), x >> (4 - j));
    EXPECT_EQ(orbit_count(St), static_cast<int>(upow(2, j)));
  }
  EXPECT_TRUE(level_stabilizer(*Q, 2, 4, 4).is_trivial());
}

TEST(OrbitTable, GrigorchukRowsWithinBound) {
  for (int L = 3; L <= 4; ++L) {
    auto Q = grig_quotient(L);
    auto S = enumerate(Q, 2, 4);
    auto T = orbit_table(S.levels, 2, L, 4);
    EXPECT_TRUE(T.pass());
    EXPECT_TRUE(T.monotone());
    EXPECT_EQ(T.rows[0].o_max, 1);
    for (const auto& r : T.rows) EXPECT_EQ(r.bound, 31LL * r.m + 1);
  }
}

TEST(OrbitTable, MatchesDirectOrbitComputation) {
  auto Q = grig_quotient(3);
  std::vector<int> best(6, 0);
  enumerate(Q, 2, 5, [&](const SubgroupRecord& r) {
    best[r.m] = std::max(best[r.m], oracle::orbits(r.generators, Q->degree()));
  });
  auto T = orbit_table(enumerate(Q, 2, 5).levels, 2, 3, 5);
  for (const auto& r : T.rows) EXPECT_EQ(r.o_max, best[r.m]);
}

TEST(OrbitTable, StabilizerWitnessInserted) {
  auto Q = grig_quotient(3);
  auto St = level_stabilizer(*Q, 2, 3, 3);
  int m = *log_exact(Q->order() / St.order(), 2);
  auto T = orbit_table(enumerate(Q, 2, m).levels, 2, 3, m);
  insert_witness(T, m, orbit_count(St));
  EXPECT_EQ(T.rows[m].o_max, 8);
}

TEST(OrbitTable, IncompleteRejected) {
  std::vector<LevelSummary> levels(1);
  levels[0].classes = 1;
  EXPECT_ERRC(orbit_table(levels, 2, 3, 2), Errc::IncompleteEnumeration);
}

TEST(Witnesses, MeetLowerBound) {
  for (int L = 1; L <= 5; ++L) {
    auto ws = stabilizer_witnesses(grig_quotient(L), 2, L);
    ASSERT_EQ(ws.size(), static_cast<std::size_t>(L + 1));
    EXPECT_EQ(ws[0].m, 0);
    EXPECT_EQ(ws[0].orbits, 1);
    for (const auto& w : ws) EXPECT_TRUE(w.pass()) << "level " << L << " j " << w.j;
  }
}

TEST(Witnesses, GrigorchukLevelTwoVertexStabilizer) {
  auto ws = stabilizer_witnesses(grig_quotient(2), 2, 2);
  bool found = false;
  for (const auto& w : ws)
    if (w.m == 1) {
      found = true;
      EXPECT_GE(w.orbits, 2);
    }
  EXPECT_TRUE(found);
}

TEST(Witnesses, GuptaSidkiLevelOne) {
  auto G = builtin_group(BuiltinKind::GuptaSidki, 3);
  auto Q = std::make_shared<const PermGroup>(level_quotient(G, 1));
  auto ws = stabilizer_witnesses(Q, 3, 1);
  ASSERT_EQ(ws.back().m, 1);
  EXPECT_GE(ws.back().orbits, 3);
  EXPECT_EQ(ws.back().bound, 3);
}

TEST(Partition, StatedValues) {
  for (int p : {2, 3, 5, 7}) EXPECT_EQ(partition_min_parts(p, 1), p);
  EXPECT_EQ(partition_min_parts(2, 3), 4);
  EXPECT_EQ(partition_min_parts(3, 2), 5);
}

TEST(Partition, MatchesRecursiveOracle) {
  for (auto [p, top] : std::vector<std::pair<int, int>>{{2, 10}, {3, 6}, {5, 4}, {7, 3}})
    for (int m = 1; m <= top; ++m) {
      int v = partition_min_parts(p, m);
      EXPECT_EQ(v, partition_oracle(p, m));
      EXPECT_EQ(v, (p - 1) * m + 1);
    }
}

TEST(Partition, Errors) {
  EXPECT_ERRC(partition_min_parts(2, 21), Errc::CapExceeded);
  EXPECT_ERRC(partition_min_parts(4, 2), Errc::UnsupportedPrime);
}

TEST(ProductOrbits, KOneMatchesOrbitTable) {
  auto Q = grig_quotient(3);
  auto R = product_orbit_table(*Q, 2, 3, 1, 4, 3);
  auto T = orbit_table(enumerate(Q, 2, 4).levels, 2, 3, 4);
  for (int m = 0; m <= 4; ++m) EXPECT_EQ(R.table.rows[m].o_max, T.rows[m].o_max);
}

TEST(ProductOrbits, ManyOrbitsTight) {
  struct Case {
    int p, L, k;
  };
  for (auto c : {Case{2, 2, 2}, Case{2, 1, 3}, Case{3, 1, 2}}) {
    auto G = c.p == 2 ? builtin_group(BuiltinKind::Grigorchuk, 2) : builtin_group(BuiltinKind::GuptaSidki, 3);
    PermGroup Q = level_quotient(G, c.L);
    int mm = c.k * *Q.order_exp(c.p);
    auto R = product_orbit_table(Q, c.p, c.L, c.k, mm);
    EXPECT_EQ(R.witness_orbits, upow(c.p, c.k * c.L));
    EXPECT_TRUE(R.witness_tight);
    EXPECT_TRUE(R.index_bound_ok);
    EXPECT_EQ(R.table.rows[R.witness_m].o_max, static_cast<int>(upow(c.p, c.k * c.L)));
  }
}

TEST(ProductOrbits, ProductOfSubgroupsMultipliesOrbits) {
  auto Q = grig_quotient(2);
  std::vector<PermGroup> subs;
  enumerate(Q, 2, 3, [&](const SubgroupRecord& r) { subs.push_back(r.group(4)); });
  for (const auto& A : subs)
    for (const auto& B : subs) {
      PermGroup P = direct_product(A, B);
      EXPECT_EQ(tuple_orbit_count(P.generators(), {4, 4}),
                static_cast<std::uint64_t>(orbit_count(A)) * orbit_count(B));
    }
}

TEST(ProductOrbits, CapExceeded) {
  auto Q = grig_quotient(3);
  EXPECT_ERRC(product_orbit_table(*Q, 2, 3, 3, 2, -1, EnumMode::Conjugacy, 1, 100), Errc::CapExceeded);
}

TEST(PermutationProduct, FullProductAndDiagonal) {
  for (int p : {2, 3}) {
    std::vector<int> c(p);
    for (int i = 0; i < p; ++i) c[i] = i;
    PermGroup C(p, {Perm::from_cycles(p, {c})});
    PermGroup P = direct_product(C, C);
    ProductSample full{static_cast<std::size_t>(p), static_cast<std::size_t>(p), P.generators()};
    auto R = verify_permutation_product({full});
    EXPECT_TRUE(R.pass());
    EXPECT_EQ(R.max_ratio, 1);
    // diagonal: U ∩ Γ trivial, p orbits on Ω, 1 on Λ, p orbits on pairs
    std::vector<int> d1(p), d2(p);
    for (int i = 0; i < p; ++i) {
      d1[i] = i;
      d2[i] = p + i;
    }
    ProductSample diag{static_cast<std::size_t>(p), static_cast<std::size_t>(p),
                       {Perm::from_cycles(2 * p, {d1, d2})}};
    auto D = verify_permutation_product({diag});
    EXPECT_TRUE(D.pass());
    EXPECT_EQ(tuple_orbit_count(diag.u_gens, {static_cast<std::size_t>(p), static_cast<std::size_t>(p)}),
              static_cast<std::uint64_t>(p));
    EXPECT_EQ(D.max_ratio, 1);
  }
}

TEST(PermutationProduct, RandomGrigorchukSquared) {
  auto Q = grig_quotient(2);
  std::mt19937_64 rng(2024);
  auto samples = random_product_samples(*Q, *Q, 500, rng);
  ASSERT_EQ(samples.size(), 500u);
  auto R = verify_permutation_product(samples);
  EXPECT_EQ(R.checked, 500u);
  EXPECT_EQ(R.violations, 0u);
  // pair orbits recomputed by a plain union-find over Ω × Λ
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& s = samples[i];
    std::vector<Perm> pair_gens;
    for (const auto& g : s.u_gens) {
      std::vector<Point> img(16);
      for (Point x = 0; x < 4; ++x)
        for (Point y = 0; y < 4; ++y) img[x * 4 + y] = static_cast<Point>(g[x] * 4 + (g[4 + y] - 4));
      pair_gens.push_back(Perm::from_images(img));
    }
    EXPECT_EQ(tuple_orbit_count(s.u_gens, {4, 4}), static_cast<std::uint64_t>(oracle::orbits(pair_gens, 16)));
  }
}
