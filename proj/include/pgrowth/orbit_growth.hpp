#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "permgroup.hpp"

namespace pgrowth {

// ---------------------------------------------------------------------------
// Block actions on tree levels

/// Leaf x of level L lies below vertex x / p^(L-j) of level j.
inline std::vector<int> vertex_labels(int p, int L, int j) {
  const std::size_t n = upow(p, L), q = upow(p, L - j);
  std::vector<int> lab(n);
  for (std::size_t x = 0; x < n; ++x) lab[x] = static_cast<int>(x / q);
  return lab;
}

/// g acting on its n points followed by the induced action on the blocks
/// given by label (which g must preserve).
inline Perm extend_by_blocks(const Perm& g, const std::vector<int>& label, int nblocks) {
  const std::size_t n = g.degree();
  std::vector<Point> img(n + nblocks);
  for (std::size_t x = 0; x < n; ++x) {
    img[x] = g[static_cast<Point>(x)];
    img[n + label[x]] = static_cast<Point>(n + label[img[x]]);
  }
  return Perm::from_images_unchecked(std::move(img));
}

inline Perm restrict_to(const Perm& g, std::size_t n) {
  std::vector<Point> img(g.images().begin(), g.images().begin() + static_cast<std::ptrdiff_t>(n));
  return Perm::from_images_unchecked(std::move(img));
}

/// Subgroup of U fixing every block in `blocks` (block ids under label).
inline PermGroup block_stabilizer(const PermGroup& U, const std::vector<int>& label, int nblocks,
                                  const std::vector<int>& blocks) {
  const std::size_t n = U.degree();
  std::vector<Perm> ext;
  for (const auto& g : U.generators()) ext.push_back(extend_by_blocks(g, label, nblocks));
  PermGroup E(n + nblocks, ext);
  std::vector<Point> pts;
  for (int b : blocks) pts.push_back(static_cast<Point>(n + b));
  PermGroup S = E.pointwise_stabilizer(pts);
  std::vector<Perm> gens;
  for (const auto& g : S.generators()) gens.push_back(restrict_to(g, n));
  return PermGroup(n, gens);
}

/// Image of St(j) in the level-L quotient Q.
inline PermGroup level_stabilizer(const PermGroup& Q, int p, int L, int j) {
  if (j <= 0) return Q;
  const int nb = static_cast<int>(upow(p, j));
  std::vector<int> all(nb);
  for (int b = 0; b < nb; ++b) all[b] = b;
  return block_stabilizer(Q, vertex_labels(p, L, j), nb, all);
}

// ---------------------------------------------------------------------------
// Orbit tables

inline int orbits_on_level(const SubgroupHandle& U) { return orbit_count(U.group); }

struct OrbitRow {
  int m = 0;
  int o_max = -1;
  long long bound = -1;   // (p^5-1)m+1; -1 when no bound applies
  long long bound4 = -1;  // (p^4-1)m+1, informational
  SubgroupKey witness;
  bool pass = true;
  bool pass4 = true;
};

struct OrbitTable {
  std::string label;
  int p = 2;
  int level = 0;
  int k = 1;
  std::vector<OrbitRow> rows;

  bool pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
  bool monotone() const {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].o_max < rows[i - 1].o_max) return false;
    return true;
  }
};

inline long long orbit_upper_bound(int p, int m, int exponent = 5) {
  return (static_cast<long long>(upow(p, exponent)) - 1) * m + 1;
}

/// Rows from per-m maxima; k = 1 tables are checked against (p^5-1)m+1.
inline OrbitTable orbit_table(const std::vector<LevelSummary>& levels, int p, int level, int max_m,
                              int k = 1, std::string label = "") {
  require_complete(levels, max_m);
  OrbitTable T;
  T.label = std::move(label);
  T.p = p;
  T.level = level;
  T.k = k;
  for (int m = 0; m <= max_m && m < static_cast<int>(levels.size()); ++m) {
    OrbitRow r;
    r.m = m;
    r.o_max = levels[m].o_max;
    r.witness = levels[m].o_witness;
    if (k == 1) {
      r.bound = orbit_upper_bound(p, m);
      r.bound4 = orbit_upper_bound(p, m, 4);
      r.pass = r.o_max <= r.bound;
      r.pass4 = r.o_max <= r.bound4;
    }
    T.rows.push_back(r);
  }
  return T;
}

inline OrbitTable orbit_table(const std::vector<SubgroupRecord>& records, int p, int level, int max_m) {
  return orbit_table(summarize_records(records, p, max_m), p, level, max_m);
}

/// Raises rows with explicitly supplied subgroups (e.g. level stabilizers)
/// that the enumeration did not reach.
inline void insert_witness(OrbitTable& T, int m, int orbits, const SubgroupKey& key = "explicit") {
  for (auto& r : T.rows)
    if (r.m == m && orbits > r.o_max) {
      r.o_max = orbits;
      r.witness = key;
      if (r.bound >= 0) r.pass = r.o_max <= r.bound;
      if (r.bound4 >= 0) r.pass4 = r.o_max <= r.bound4;
    }
}

// ---------------------------------------------------------------------------
// Lower-bound witnesses

struct StabilizerWitness {
  int j = 0;  // level whose stabilizer defines the blocks
  SubgroupHandle handle;
  int m = 0;
  int orbits = 0;
  long long bound = 1;  // (p-1)m+1
  bool pass() const { return orbits >= bound; }
};

/// For each j ≤ L: the orbits of St(j) form a block system of Q; H is the
/// stabilizer of the block containing leaf 0.  Its orbits on the blocks
/// have p-power sizes summing to the index, one of them of size 1.
inline std::vector<StabilizerWitness> stabilizer_witnesses(std::shared_ptr<const PermGroup> Q, int p, int L) {
  std::vector<StabilizerWitness> out;
  for (int j = 0; j <= L; ++j) {
    PermGroup N = level_stabilizer(*Q, p, L, j);
    Partition B = orbit_partition(N);
    PermGroup H = block_stabilizer(*Q, B.cell, B.count, {B.cell[0]});
    StabilizerWitness w;
    w.j = j;
    w.handle = make_handle(Q, H, p);
    w.m = w.handle.index_exp;
    w.orbits = orbit_count(H);
    w.bound = static_cast<long long>(p - 1) * w.m + 1;
    out.push_back(std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partitions of p^m into powers of p

/// Minimum number of parts in p^m = sum p^{m_i} with some m_i = 0.
inline int partition_min_parts(int p, int m, std::uint64_t cap = std::uint64_t(1) << 20) {
  if (!is_prime(p)) throw Error(Errc::UnsupportedPrime, std::to_string(p) + " is not prime");
  if (m < 1) throw Error(Errc::Usage, "m must be at least 1");
  // p^m ≤ cap, checked without overflow
  std::uint64_t total = 1;
  for (int i = 0; i < m; ++i) {
    if (total > cap / static_cast<std::uint64_t>(p)) throw Error(Errc::CapExceeded, "p^m exceeds " + std::to_string(cap));
    total *= p;
  }
  // best[v]: fewest powers p^i (i < m) summing to v.
  const std::uint64_t V = total - 1;
  std::vector<int> best(V + 1, 0);
  std::vector<std::uint64_t> coins;
  for (std::uint64_t c = 1; c < total; c *= p) coins.push_back(c);
  for (std::uint64_t v = 1; v <= V; ++v) {
    int b = std::numeric_limits<int>::max();
    for (auto c : coins) {
      if (c > v) break;
      b = std::min(b, best[v - c] + 1);
    }
    best[v] = b;
  }
  return 1 + best[V];
}

// ---------------------------------------------------------------------------
// Product actions

/// Orbits on the cartesian product of the blocks (consecutive point ranges
/// of the given sizes), for a group preserving every block.
inline std::uint64_t tuple_orbit_count(const std::vector<Perm>& gens, const std::vector<std::size_t>& sizes,
                                       std::uint64_t cap = std::uint64_t(1) << 24) {
  std::uint64_t total = 1;
  for (auto s : sizes) {
    if (s != 0 && total > cap / s) throw Error(Errc::CapExceeded, "tuple space exceeds cap " + std::to_string(cap));
    total *= s;
  }
  std::vector<std::size_t> off(sizes.size(), 0);
  for (std::size_t i = 1; i < sizes.size(); ++i) off[i] = off[i - 1] + sizes[i - 1];
  std::vector<std::uint32_t> parent(total);
  for (std::uint64_t i = 0; i < total; ++i) parent[i] = static_cast<std::uint32_t>(i);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::uint64_t classes = total;
  // Per generator, the image of each tuple is a mixed-radix recombination.
  for (const auto& g : gens) {
    std::vector<std::vector<std::uint64_t>> contrib(sizes.size());
    std::uint64_t mult = 1;
    for (std::size_t b = sizes.size(); b-- > 0;) {
      contrib[b].resize(sizes[b]);
      for (std::size_t x = 0; x < sizes[b]; ++x)
        contrib[b][x] = (g[static_cast<Point>(off[b] + x)] - off[b]) * mult;
      mult *= sizes[b];
    }
    std::vector<std::size_t> digit(sizes.size(), 0);
    for (std::uint64_t t = 0; t < total; ++t) {
      std::uint64_t img = 0;
      for (std::size_t b = 0; b < sizes.size(); ++b) img += contrib[b][digit[b]];
      auto a = find(static_cast<std::uint32_t>(t)), c = find(static_cast<std::uint32_t>(img));
      if (a != c) {
        parent[a] = c;
        --classes;
      }
      for (std::size_t b = sizes.size(); b-- > 0;) {
        if (++digit[b] < sizes[b]) break;
        digit[b] = 0;
      }
    }
  }
  return classes;
}

/// k-fold direct power on k disjoint copies of the points.
inline PermGroup direct_power(const PermGroup& Q, int k) {
  PermGroup P = Q;
  for (int i = 1; i < k; ++i) P = direct_product(P, Q);
  return P;
}

struct ProductOrbitReport {
  OrbitTable table;
  int witness_m = 0;                 // index exponent of the stabilizer power
  std::uint64_t witness_orbits = 0;  // its orbits on level-L tuples
  std::uint64_t witness_block_orbits = 0;  // its orbits on level-j tuples
  std::uint64_t expected = 0;        // p^{k j}
  bool witness_tight = false;
  bool index_bound_ok = false;       // witness_m ≤ k (p^j - 1)/(p - 1)
};

/// Orbits on k-tuples of level-L vertices for subgroups of Q^k, with the
/// power of St(j)'s image as explicit witness.
inline ProductOrbitReport product_orbit_table(const PermGroup& Q, int p, int L, int k, int max_m, int j = -1,
                                              EnumMode mode = EnumMode::Conjugacy, int jobs = 1,
                                              std::uint64_t cap = std::uint64_t(1) << 24) {
  if (j < 0) j = L;
  const std::size_t n = Q.degree();
  std::vector<std::size_t> sizes(k, n);
  {
    std::uint64_t t = 1;
    for (int i = 0; i < k; ++i) {
      if (t > cap / n) throw Error(Errc::CapExceeded, "tuple space exceeds cap " + std::to_string(cap));
      t *= n;
    }
  }
  auto P = std::make_shared<const PermGroup>(direct_power(Q, k));
  EnumerationJob job;
  job.group = P;
  job.p = p;
  job.max_m = max_m;
  job.mode = mode;
  job.parallelism = jobs;
  std::vector<LevelSummary> levels;
  auto S = enumerate_subgroups(job, [&](const SubgroupRecord& R) {
    if (static_cast<int>(levels.size()) <= R.m) levels.resize(R.m + 1);
    auto& L = levels[R.m];
    L.m = R.m;
    ++L.classes;
    if (R.size_exp == 0) L.has_trivial = true;
    int o = static_cast<int>(tuple_orbit_count(R.generators, sizes, cap));
    if (o > L.o_max) {
      L.o_max = o;
      L.o_witness = R.canonical_key;
    }
  });
  (void)S;
  ProductOrbitReport rep;
  rep.table = orbit_table(levels, p, L, max_m, k);
  PermGroup St = level_stabilizer(Q, p, L, j);
  PermGroup W = direct_power(St, k);
  rep.witness_m = *log_exact(P->order() / W.order(), p);
  rep.witness_orbits = tuple_orbit_count(W.generators(), sizes, cap);
  // Orbits on level-j tuples: map each level-L tuple orbit to its blocks.
  {
    const int nb = static_cast<int>(upow(p, j));
    auto lab = vertex_labels(p, L, j);
    std::vector<Perm> blk;
    for (const auto& g : W.generators()) {
      std::vector<Point> img(static_cast<std::size_t>(k) * nb);
      for (int c = 0; c < k; ++c)
        for (std::size_t x = 0; x < n; ++x) img[c * nb + lab[x]] = static_cast<Point>(c * nb + lab[g[static_cast<Point>(c * n + x)] - c * n]);
      blk.push_back(Perm::from_images_unchecked(std::move(img)));
    }
    rep.witness_block_orbits = tuple_orbit_count(blk, std::vector<std::size_t>(k, nb), cap);
  }
  rep.expected = upow(p, k * j);
  rep.witness_tight = rep.witness_block_orbits == rep.expected && rep.witness_orbits >= rep.expected;
  rep.index_bound_ok = rep.witness_m <= k * static_cast<long long>((upow(p, j) - 1) / (p - 1));
  insert_witness(rep.table, rep.witness_m, static_cast<int>(rep.witness_orbits), "stabilizer power");
  return rep;
}

// ---------------------------------------------------------------------------
// Orbits of subgroups of Gamma x Delta on Omega x Lambda

struct ProductSample {
  std::size_t omega = 0;   // points 0..omega-1
  std::size_t lambda = 0;  // points omega..omega+lambda-1
  std::vector<Perm> u_gens;
};

struct PermutationProductReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  Rational max_ratio = 0;
  std::vector<std::string> details;
  bool pass() const { return checked > 0 && violations == 0; }
};

inline PermutationProductReport verify_permutation_product(const std::vector<ProductSample>& samples) {
  PermutationProductReport rep;
  for (const auto& s : samples) {
    const std::size_t n = s.omega + s.lambda;
    PermGroup U(n, s.u_gens);
    std::vector<Point> lam;
    for (std::size_t x = s.omega; x < n; ++x) lam.push_back(static_cast<Point>(x));
    PermGroup UG = U.pointwise_stabilizer(lam);  // U ∩ Gamma
    std::vector<Perm> on_omega, on_lambda;
    for (const auto& g : UG.generators()) on_omega.push_back(restrict_to(g, s.omega));
    for (const auto& g : U.generators()) {
      std::vector<Point> img(s.lambda);
      for (std::size_t x = 0; x < s.lambda; ++x) img[x] = static_cast<Point>(g[static_cast<Point>(s.omega + x)] - s.omega);
      on_lambda.push_back(Perm::from_images_unchecked(std::move(img)));
    }
    int mo = orbit_partition(on_omega, s.omega).count;
    int no = orbit_partition(on_lambda, s.lambda).count;
    auto pairs = tuple_orbit_count(U.generators(), {s.omega, s.lambda});
    ++rep.checked;
    Rational ratio(BigInt(pairs), BigInt(static_cast<long long>(mo) * no));
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (pairs > static_cast<std::uint64_t>(mo) * no) {
      ++rep.violations;
      if (rep.details.size() < 20)
        rep.details.push_back(std::to_string(pairs) + " > " + std::to_string(mo) + "*" + std::to_string(no));
    }
  }
  return rep;
}

/// Subgroups of Gamma x Delta generated by 1-3 random elements.
inline std::vector<ProductSample> random_product_samples(const PermGroup& Gamma, const PermGroup& Delta,
                                                         std::size_t count, std::mt19937_64& rng) {
  PermGroup P = direct_product(Gamma, Delta);
  std::vector<ProductSample> out;
  std::uniform_int_distribution<int> ng(1, 3);
  for (std::size_t i = 0; i < count; ++i) {
    ProductSample s;
    s.omega = Gamma.degree();
    s.lambda = Delta.degree();
    int k = ng(rng);
    for (int j = 0; j < k; ++j) s.u_gens.push_back(P.random_element(rng));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pgrowth
