#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "orbit_growth.hpp"
#include "permgroup.hpp"
#include "selfsim.hpp"

namespace pgrowth {

// ---------------------------------------------------------------------------
// Vertices of levels 0..L as points

/// Vertex (level j, index i) is point (p^j - 1)/(p - 1) + i.
struct VertexSpace {
  int p = 2;
  int L = 0;

  std::size_t offset(int j) const { return (upow(p, j) - 1) / (p - 1); }
  std::size_t size() const { return offset(L + 1); }
  std::size_t id(const Vertex& v) const { return offset(v.level()) + v.index(p); }
  Vertex vertex(std::size_t id) const {
    int j = 0;
    while (offset(j + 1) <= id) ++j;
    return Vertex::from_index(id - offset(j), j, p);
  }

  /// Action on all vertices induced by a permutation of the level-L leaves.
  Perm extend(const Perm& leaf_perm) const {
    std::vector<Point> img(size());
    for (int j = 0; j <= L; ++j) {
      const std::size_t q = upow(p, L - j), n = upow(p, j);
      for (std::size_t i = 0; i < n; ++i)
        img[offset(j) + i] = static_cast<Point>(offset(j) + leaf_perm[static_cast<Point>(i * q)] / q);
    }
    return Perm::from_images_unchecked(std::move(img));
  }
};

// ---------------------------------------------------------------------------
// Trees

/// Finite parent-closed vertex set containing the root; colours are the
/// vertex positions themselves.
class ColouredSubtree {
 public:
  ColouredSubtree() : ColouredSubtree(2) {}
  explicit ColouredSubtree(int p) : p_(p) { v_.insert(Vertex{}); }

  static ColouredSubtree from_vertices(int p, const std::vector<Vertex>& vs) {
    ColouredSubtree S(p);
    for (const auto& v : vs) S.add_with_ancestors(v);
    return S;
  }

  static ColouredSubtree from_strings(int p, const std::vector<std::string>& ws) {
    std::vector<Vertex> vs;
    for (const auto& w : ws) vs.push_back(Vertex::parse(w, p));
    return from_vertices(p, vs);
  }

  /// Path 0^len together with all its prefixes.
  static ColouredSubtree path(int p, int len) {
    Vertex v;
    v.word.assign(len, 0);
    return from_vertices(p, {v});
  }

  void add_with_ancestors(Vertex v) {
    for (int d : v.word)
      if (d < 0 || d >= p_) throw Error(Errc::ParseError, "vertex letter out of range");
    while (true) {
      v_.insert(v);
      if (v.word.empty()) break;
      v.word.pop_back();
    }
  }

  int p() const { return p_; }
  std::size_t size() const { return v_.size(); }
  const std::set<Vertex>& vertices() const { return v_; }
  bool contains(const Vertex& v) const { return v_.count(v) > 0; }

  int max_level() const {
    int l = 0;
    for (const auto& v : v_) l = std::max(l, v.level());
    return l;
  }

  bool is_complete() const {
    for (const auto& v : v_) {
      if (v.word.empty()) continue;
      Vertex s = v;
      for (int x = 0; x < p_; ++x) {
        s.word.back() = x;
        if (!v_.count(s)) return false;
      }
    }
    return true;
  }

  /// Vertices of level at most j.
  ColouredSubtree truncate(int j) const {
    ColouredSubtree T(p_);
    for (const auto& v : v_)
      if (v.level() <= j) T.v_.insert(v);
    return T;
  }

  std::vector<std::string> to_strings() const {
    std::vector<std::string> out;
    for (const auto& v : v_) out.push_back(v.to_string());
    return out;
  }

  friend bool operator==(const ColouredSubtree& a, const ColouredSubtree& b) { return a.p_ == b.p_ && a.v_ == b.v_; }
  friend bool operator<(const ColouredSubtree& a, const ColouredSubtree& b) {
    return std::lexicographical_compare(a.v_.begin(), a.v_.end(), b.v_.begin(), b.v_.end());
  }

 private:
  friend ColouredSubtree complete(const ColouredSubtree& S);
  int p_;
  std::set<Vertex> v_;
};

/// Smallest complete tree containing S.
inline ColouredSubtree complete(const ColouredSubtree& S) {
  ColouredSubtree T = S;
  for (const auto& v : S.vertices()) {
    if (v.word.empty()) continue;
    Vertex s = v;
    for (int x = 0; x < S.p(); ++x) {
      s.word.back() = x;
      T.v_.insert(s);
    }
  }
  return T;
}

struct AntiChain {
  std::vector<Vertex> vertices;

  bool is_antichain() const {
    for (std::size_t i = 0; i < vertices.size(); ++i)
      for (std::size_t j = 0; j < vertices.size(); ++j) {
        if (i == j) continue;
        const auto& a = vertices[i].word;
        const auto& b = vertices[j].word;
        if (a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin())) return false;
      }
    return true;
  }

  /// Every path meets the set: the leaf weights p^-level sum to 1.
  bool is_maximal(int p) const {
    if (!is_antichain()) return false;
    int L = 0;
    for (const auto& v : vertices) L = std::max(L, v.level());
    std::uint64_t total = 0;
    for (const auto& v : vertices) total += upow(p, L - v.level());
    return total == upow(p, L);
  }

  static AntiChain level(int p, int j) {
    AntiChain A;
    for (std::size_t i = 0; i < upow(p, j); ++i) A.vertices.push_back(Vertex::from_index(i, j, p));
    return A;
  }
};

/// Placement of a tree by a group element: source vertex -> image vertex.
struct Embedding {
  ColouredSubtree source;
  std::vector<std::pair<Vertex, Vertex>> placement;

  ColouredSubtree image() const {
    std::vector<Vertex> vs;
    for (const auto& [a, b] : placement) vs.push_back(b);
    return ColouredSubtree::from_vertices(source.p(), vs);
  }
};

inline Vertex apply_vertex(const Perm& leaf_perm, int p, int L, const Vertex& v) {
  if (v.level() > L) throw Error(Errc::LevelTooLarge, "vertex below the evaluation level");
  const std::size_t q = upow(p, L - v.level());
  return Vertex::from_index(leaf_perm[static_cast<Point>(v.index(p) * q)] / q, v.level(), p);
}

/// S^g for g given by its level-L permutation.
inline Embedding apply(const Perm& g, int L, const ColouredSubtree& S) {
  if (S.max_level() > L) throw Error(Errc::LevelTooLarge, "tree deeper than the evaluation level");
  Embedding E;
  E.source = S;
  for (const auto& v : S.vertices()) E.placement.emplace_back(v, apply_vertex(g, S.p(), L, v));
  return E;
}

/// (S^h)^g as an embedding of the original source.
inline Embedding apply(const Perm& g, int L, const Embedding& E) {
  Embedding F;
  F.source = E.source;
  for (const auto& [a, b] : E.placement) F.placement.emplace_back(a, apply_vertex(g, E.source.p(), L, b));
  return F;
}

// ---------------------------------------------------------------------------
// Stabilizers and orbit counts

/// Pointwise stabilizer in Q (on level-L leaves) of a set of vertices.
inline PermGroup vertex_set_stabilizer(const PermGroup& Q, int p, int L, const std::vector<Vertex>& vs) {
  VertexSpace V{p, L};
  std::vector<Perm> ext;
  for (const auto& g : Q.generators()) ext.push_back(V.extend(g));
  PermGroup E(V.size(), ext);
  std::vector<Point> pts;
  for (const auto& v : vs) {
    if (v.level() > L) throw Error(Errc::LevelTooLarge, "vertex " + v.to_string() + " below level " + std::to_string(L));
    pts.push_back(static_cast<Point>(V.id(v)));
  }
  PermGroup S = E.pointwise_stabilizer(pts);
  // Leaves are the last p^L vertex points.
  const std::size_t off = V.offset(L), n = Q.degree();
  std::vector<Perm> gens;
  for (const auto& g : S.generators()) {
    std::vector<Point> img(n);
    for (std::size_t x = 0; x < n; ++x) img[x] = static_cast<Point>(g[static_cast<Point>(off + x)] - off);
    gens.push_back(Perm::from_images_unchecked(std::move(img)));
  }
  return PermGroup(n, gens);
}

inline PermGroup embedding_stabilizer(const PermGroup& Q, int p, int L, const ColouredSubtree& S) {
  return vertex_set_stabilizer(Q, p, L, {S.vertices().begin(), S.vertices().end()});
}

inline PermGroup antichain_stabilizer(const PermGroup& Q, int p, int L, const AntiChain& A) {
  return vertex_set_stabilizer(Q, p, L, A.vertices);
}

/// Number of U-orbits on S^Q, as |U \ Q / Q_S|.
inline BigInt orbit_count_on_embeddings(const PermGroup& Q, const PermGroup& U, int p, int L,
                                        const ColouredSubtree& S, std::size_t cap = std::size_t(1) << 20) {
  return double_coset_count(Q, U, embedding_stabilizer(Q, p, L, S), cap);
}

/// Oracle: materialize S^Q as vertex-image tuples and count U-orbits directly.
inline std::size_t orbit_count_materialized(const PermGroup& Q, const PermGroup& U, int p, int L,
                                            const ColouredSubtree& S, std::size_t cap = std::size_t(1) << 20) {
  VertexSpace V{p, L};
  std::vector<Point> src;
  for (const auto& v : S.vertices()) src.push_back(static_cast<Point>(V.id(v)));
  auto ext = [&](const std::vector<Perm>& gs) {
    std::vector<Perm> out;
    for (const auto& g : gs) out.push_back(V.extend(g));
    return out;
  };
  auto qg = ext(Q.generators());
  auto ug = ext(U.generators());
  std::map<std::vector<Point>, std::size_t> id;
  std::vector<std::vector<Point>> emb{src};
  id.emplace(src, 0);
  for (std::size_t i = 0; i < emb.size(); ++i) {
    for (const auto& g : qg) {
      std::vector<Point> t(emb[i].size());
      for (std::size_t k = 0; k < t.size(); ++k) t[k] = g[emb[i][k]];
      if (id.emplace(t, emb.size()).second) {
        emb.push_back(std::move(t));
        if (emb.size() > cap) throw Error(Errc::CosetSpaceTooLarge, "embedding set exceeds cap");
      }
    }
  }
  std::vector<std::size_t> parent(emb.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t classes = emb.size();
  for (std::size_t i = 0; i < emb.size(); ++i)
    for (const auto& g : ug) {
      std::vector<Point> t(emb[i].size());
      for (std::size_t k = 0; k < t.size(); ++k) t[k] = g[emb[i][k]];
      auto a = find(i), b = find(id.at(t));
      if (a != b) {
        parent[a] = b;
        --classes;
      }
    }
  return classes;
}

/// Largest-level children sets that can be removed from a complete tree:
/// vertices all of whose p children are leaves of S.
inline std::vector<Vertex> removable_parents(const ColouredSubtree& S) {
  std::vector<Vertex> out;
  for (const auto& v : S.vertices()) {
    Vertex c = v;
    c.word.push_back(0);
    if (!S.contains(c)) continue;
    bool leaves = true;
    for (int x = 0; x < S.p() && leaves; ++x) {
      c.word.back() = x;
      Vertex g = c;
      g.word.push_back(0);
      if (S.contains(g)) leaves = false;
    }
    if (leaves) out.push_back(v);
  }
  return out;
}

inline ColouredSubtree remove_children(const ColouredSubtree& S, const Vertex& v) {
  std::vector<Vertex> keep;
  for (const auto& w : S.vertices()) {
    if (w.level() == v.level() + 1 && std::equal(v.word.begin(), v.word.end(), w.word.begin())) continue;
    keep.push_back(w);
  }
  return ColouredSubtree::from_vertices(S.p(), keep);
}

inline ColouredSubtree add_children(const ColouredSubtree& S, const Vertex& v) {
  std::vector<Vertex> vs(S.vertices().begin(), S.vertices().end());
  for (int x = 0; x < S.p(); ++x) {
    Vertex c = v;
    c.word.push_back(x);
    vs.push_back(c);
  }
  return ColouredSubtree::from_vertices(S.p(), vs);
}

// ---------------------------------------------------------------------------
// Orbit bound for subgroups of a given level

/// Smallest j with St(j) ≤ U inside the level-L quotient.
inline int subgroup_level(const PermGroup& Q, const PermGroup& U, int p, int L) {
  for (int j = 0; j <= L; ++j)
    if (level_stabilizer(Q, p, L, j).is_subgroup_of(U)) return j;
  return L;
}

struct AntichainCheck {
  int n = 0;       // index exponent of U
  int lambda = 0;  // level of U
  int k = 0;       // |S truncated at lambda|
  BigInt orbits = 0;
  bool applicable = true;  // the bound needs U proper (n >= 1)
  bool pass = true;
};

/// orbits ≤ n p^{(k - p lambda - 1)/p + 5}, compared after raising to the p-th power.
inline AntichainCheck antichain_bound_check(const PermGroup& Q, const PermGroup& U, int p, int L,
                                            const ColouredSubtree& S, std::size_t cap = std::size_t(1) << 20) {
  AntichainCheck c;
  c.n = *log_exact(Q.order() / U.order(), p);
  c.lambda = subgroup_level(Q, U, p, L);
  ColouredSubtree T = S.truncate(c.lambda);
  c.k = static_cast<int>(T.size());
  c.orbits = orbit_count_on_embeddings(Q, U, p, L, T, cap);
  if (c.n == 0) {
    c.applicable = false;
    return c;
  }
  const long long e = static_cast<long long>(c.k) - static_cast<long long>(p) * c.lambda - 1 + 5LL * p;
  BigInt lhs = boost::multiprecision::pow(c.orbits, p);
  BigInt rhs = boost::multiprecision::pow(BigInt(c.n), p);
  if (e >= 0) {
    rhs *= big_pow(p, e);
    c.pass = lhs <= rhs;
  } else {
    c.pass = lhs * big_pow(p, -e) <= rhs;
  }
  return c;
}

// ---------------------------------------------------------------------------
// One finite stage of the small/large tree search (p-regular tree, path 0^inf)

struct StageCandidate {
  ColouredSubtree tree;
  std::vector<BigInt> o_cum;  // o_cum[n]: max orbits over subgroups of index ≤ p^n
  std::vector<BigInt> o_at;   // max orbits at index exactly p^n
  std::vector<SubgroupKey> witness;  // subgroup achieving o_at[n]
  bool large = false;
  int first_exceed = -1;  // smallest n ≥ n1 with o_cum[n] > f(n)
};

struct StageReport {
  int p = 2;
  int ell = 0;
  int ell_prime = 0;
  int n1 = 1;
  std::vector<StageCandidate> candidates;  // sorted by vertex lists
  bool found = false;
  int small_index = -1;
  int large_index = -1;
  int m_i = -1;
  SubgroupKey witness_key;
  BigInt witness_orbits = 0;
  // S_max check: orbits of G_A on S_max^Q against (Q:G_A)/(Q:St(ell)).
  BigInt smax_orbits = 0;
  Rational smax_bound = 0;
  bool smax_pass = false;
  // Distinct colourings of Delta over S_max^St(ell): elements of St(ell) moving
  // v_i leave Delta uncoloured, so this is (St(ell)_{v_i}:G_A) + [St(ell) moves v_i].
  BigInt smax_colourings = 0;
  bool smax_colouring_pass = false;
  int subgroups_examined = 0;
};

/// Complete trees under v with all vertices of level ≤ depth below it, as
/// sets of added vertices (v itself excluded).
inline void complete_extensions(const Vertex& v, int p, int depth, std::vector<std::vector<Vertex>>& out) {
  // Each option: either no children, or all p children each with an independent option.
  if (depth <= 0) {
    out.push_back({});
    return;
  }
  std::vector<std::vector<std::vector<Vertex>>> per_child(p);
  for (int x = 0; x < p; ++x) {
    Vertex c = v;
    c.word.push_back(x);
    complete_extensions(c, p, depth - 1, per_child[x]);
  }
  out.push_back({});
  std::vector<std::size_t> idx(p, 0);
  while (true) {
    std::vector<Vertex> vs;
    for (int x = 0; x < p; ++x) {
      Vertex c = v;
      c.word.push_back(x);
      vs.push_back(c);
      const auto& sub = per_child[x][idx[x]];
      vs.insert(vs.end(), sub.begin(), sub.end());
    }
    out.push_back(std::move(vs));
    int x = p - 1;
    while (x >= 0 && ++idx[x] == per_child[x].size()) idx[x--] = 0;
    if (x < 0) break;
  }
}

/// The previous tree is the completed path to v_i = 0^{ell+1}; candidates add
/// complete trees below v_i with vertices of level ell+2..ell'.  A candidate
/// is large when some subgroup of the level-ell' quotient of index p^n,
/// n ≥ n1, has more than f(n) orbits on its embeddings.
inline StageReport stage_classify(const PermGroup& Q, int p, int ell, int ell_prime,
                                  const std::function<long long(int)>& f, int n1 = 1,
                                  std::size_t budget = std::size_t(1) << 30, int jobs = 1,
                                  std::size_t cap = std::size_t(1) << 20) {
  if (ell < 0 || ell_prime < ell + 2) throw Error(Errc::Usage, "stage search needs ell' ≥ ell + 2");
  if (upow(p, ell_prime) != Q.degree()) throw Error(Errc::DegreeMismatch, "quotient is not of level ell'");
  StageReport R;
  R.p = p;
  R.ell = ell;
  R.ell_prime = ell_prime;
  R.n1 = n1;
  ColouredSubtree prev = complete(ColouredSubtree::path(p, ell + 1));
  Vertex vi;
  vi.word.assign(ell + 1, 0);
  std::vector<std::vector<Vertex>> ext;
  complete_extensions(vi, p, ell_prime - ell - 1, ext);
  for (const auto& e : ext) {
    std::vector<Vertex> vs(prev.vertices().begin(), prev.vertices().end());
    vs.insert(vs.end(), e.begin(), e.end());
    StageCandidate c;
    c.tree = ColouredSubtree::from_vertices(p, vs);
    R.candidates.push_back(std::move(c));
  }
  std::sort(R.candidates.begin(), R.candidates.end(),
            [](const StageCandidate& a, const StageCandidate& b) { return a.tree < b.tree; });
  const int r = *Q.order_exp(p);
  std::vector<PermGroup> stabs;
  for (auto& c : R.candidates) {
    c.o_at.assign(r + 1, 0);
    c.witness.assign(r + 1, "");
    stabs.push_back(embedding_stabilizer(Q, p, ell_prime, c.tree));
  }
  // Orbit counts are conjugation invariant, so class representatives suffice.
  auto Qp = std::make_shared<const PermGroup>(Q);
  EnumerationJob job;
  job.group = Qp;
  job.p = p;
  job.max_m = r;
  job.mode = EnumMode::Conjugacy;
  job.memory_budget = budget;
  job.parallelism = jobs;
  enumerate_subgroups(job, [&](const SubgroupRecord& rec) {
    ++R.subgroups_examined;
    PermGroup U(Q.degree(), rec.generators);
    for (std::size_t i = 0; i < R.candidates.size(); ++i) {
      BigInt o = double_coset_count(Q, U, stabs[i], cap);
      auto& c = R.candidates[i];
      if (o > c.o_at[rec.m]) {
        c.o_at[rec.m] = o;
        c.witness[rec.m] = rec.canonical_key;
      }
    }
  });
  for (auto& c : R.candidates) {
    c.o_cum.assign(r + 1, 0);
    BigInt best = 0;
    for (int n = 0; n <= r; ++n) {
      best = std::max(best, c.o_at[n]);
      c.o_cum[n] = best;
      if (n >= n1 && c.first_exceed < 0 && best > f(n)) c.first_exceed = n;
    }
    c.large = c.first_exceed >= 0;
  }
  // First small tree (canonical order) adjacent to a large one.
  for (std::size_t i = 0; i < R.candidates.size() && !R.found; ++i) {
    if (R.candidates[i].large) continue;
    for (std::size_t j = 0; j < R.candidates.size(); ++j) {
      if (!R.candidates[j].large) continue;
      const auto& a = R.candidates[i].tree;
      const auto& b = R.candidates[j].tree;
      const auto& big = a.size() > b.size() ? a : b;
      const auto& small = a.size() > b.size() ? b : a;
      if (big.size() != small.size() + static_cast<std::size_t>(p)) continue;
      bool adjacent = false;
      for (const auto& v : removable_parents(big))
        if (remove_children(big, v) == small) adjacent = true;
      if (!adjacent) continue;
      R.found = true;
      R.small_index = static_cast<int>(i);
      R.large_index = static_cast<int>(j);
      const auto& L = R.candidates[j];
      // The witness sits at the exact index where the cumulative maximum was set.
      int n = L.first_exceed;
      while (n > 0 && L.o_cum[n - 1] == L.o_cum[n]) --n;
      R.m_i = n;
      R.witness_key = L.witness[n];
      R.witness_orbits = L.o_at[n];
      break;
    }
  }
  // S_max: all descendants of v_i down to ell'.  A: level-ell vertices other
  // than the parent of v_i, the siblings of v_i, and the level-ell' vertices below v_i.
  {
    ColouredSubtree big = R.candidates.front().tree;
    for (const auto& c : R.candidates)
      if (c.tree.size() > big.size()) big = c.tree;
    AntiChain A;
    Vertex parent;
    parent.word.assign(ell, 0);
    for (std::size_t i = 0; i < upow(p, ell); ++i) {
      Vertex v = Vertex::from_index(i, ell, p);
      if (v == parent) continue;
      A.vertices.push_back(v);
    }
    for (int x = 1; x < p; ++x) {
      Vertex s = parent;
      s.word.push_back(x);
      A.vertices.push_back(s);
    }
    const int dl = ell_prime - ell - 1;
    for (std::size_t i = 0; i < upow(p, dl); ++i) {
      Vertex d = Vertex::from_index(i, dl, p);
      Vertex w = vi;
      w.word.insert(w.word.end(), d.word.begin(), d.word.end());
      A.vertices.push_back(w);
    }
    PermGroup GA = antichain_stabilizer(Q, p, ell_prime, A);
    PermGroup St = level_stabilizer(Q, p, ell_prime, ell);
    R.smax_orbits = double_coset_count(Q, GA, embedding_stabilizer(Q, p, ell_prime, big), cap);
    R.smax_bound = Rational(Q.order() / GA.order(), Q.order() / St.order());
    R.smax_pass = Rational(R.smax_orbits) >= R.smax_bound;
    PermGroup St_vi = vertex_set_stabilizer(St, p, ell_prime, {vi});
    R.smax_colourings = St_vi.order() / GA.order() + (St_vi.order() == St.order() ? 0 : 1);
    R.smax_colouring_pass = R.smax_orbits >= R.smax_colourings;
  }
  return R;
}

inline StageReport stage_search(const PermGroup& Q, int p, int ell, int ell_prime,
                                const std::function<long long(int)>& f, int n1 = 1,
                                std::size_t budget = std::size_t(1) << 30, int jobs = 1) {
  StageReport R = stage_classify(Q, p, ell, ell_prime, f, n1, budget, jobs);
  if (!R.found) throw Error(Errc::NotFound, "every candidate tree is small at this scale");
  return R;
}

}  // namespace pgrowth
