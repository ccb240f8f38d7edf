#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "perm.hpp"

namespace pgrowth {

/// One level of a stabilizer chain.  reps[i] maps base to orbit[i].
struct ChainLevel {
  Point base = 0;
  std::vector<Point> orbit;
  std::vector<std::int32_t> slot;  // point -> index into orbit, or -1
  std::vector<Perm> reps;
  std::vector<Perm> rep_invs;
  std::vector<std::uint32_t> gens;  // indices into the strong generating set
};

/// Permutation group with a deterministic stabilizer chain.  The base is the
/// sorted list of points that are the smallest moved point of some strong
/// generator, so the stabilizer of the first i base points fixes every point
/// below base[i].
class PermGroup {
 public:
  PermGroup() : PermGroup(0, {}) {}

  PermGroup(std::size_t degree, std::vector<Perm> gens,
            const std::vector<Perm>* strong_seed = nullptr)
      : degree_(degree) {
    if (degree > 65535) throw Error(Errc::CapExceeded, "degree exceeds 65535");
    for (const auto& g : gens)
      if (g.degree() != degree) throw Error(Errc::DegreeMismatch, "generator degree differs");
    for (auto& g : gens)
      if (!g.is_identity()) gens_.push_back(std::move(g));
    build(strong_seed);
  }

  static PermGroup trivial(std::size_t degree) { return PermGroup(degree, {}); }

  std::size_t degree() const { return degree_; }
  const std::vector<Perm>& generators() const { return gens_; }
  const std::vector<Perm>& strong_generators() const { return strong_; }
  const std::vector<ChainLevel>& chain() const { return levels_; }
  const BigInt& order() const { return order_; }
  bool is_trivial() const { return levels_.empty(); }
  Perm identity() const { return Perm(degree_); }

  std::optional<int> order_exp(int p) const { return log_exact(order_, p); }

  bool is_p_group(int p) const { return order_exp(p).has_value(); }

  bool contains(const Perm& g) const {
    if (g.degree() != degree_) return false;
    Perm h = g;
    return strip(h, 0);
  }

  /// Order equality plus one-sided generator membership.
  bool same_as(const PermGroup& other) const {
    if (degree_ != other.degree_ || order_ != other.order_) return false;
    for (const auto& g : other.gens_)
      if (!contains(g)) return false;
    return true;
  }

  bool is_subgroup_of(const PermGroup& G) const {
    if (degree_ != G.degree_) return false;
    for (const auto& g : gens_)
      if (!G.contains(g)) return false;
    return true;
  }

  std::vector<Point> base() const {
    std::vector<Point> b;
    for (const auto& L : levels_) b.push_back(L.base);
    return b;
  }

  Perm random_element(std::mt19937_64& rng) const {
    Perm r(degree_);
    for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
      std::uniform_int_distribution<std::size_t> pick(0, it->orbit.size() - 1);
      r = r * it->reps[pick(rng)];
    }
    return r;
  }

  /// Lexicographically least element of the right coset (this group) * g.
  Perm coset_min(const Perm& g) const {
    Perm r = g;
    for (const auto& L : levels_) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < L.orbit.size(); ++i)
        if (r[L.orbit[i]] < r[L.orbit[best]]) best = i;
      if (best != 0) r = L.reps[best] * r;
    }
    return r;
  }

  /// Canonical description of the group: for every level and every orbit
  /// point (sorted), the least element mapping the base point there.
  std::vector<Point> canonical_form() const {
    std::vector<Point> out;
    out.push_back(static_cast<Point>(levels_.size()));
    for (std::size_t j = 0; j < levels_.size(); ++j) {
      const auto& L = levels_[j];
      std::vector<std::size_t> idx(L.orbit.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return L.orbit[a] < L.orbit[b]; });
      out.push_back(L.base);
      out.push_back(static_cast<Point>(L.orbit.size()));
      for (auto i : idx) {
        Perm r = L.reps[i];
        for (std::size_t k = j + 1; k < levels_.size(); ++k) {
          const auto& M = levels_[k];
          std::size_t best = 0;
          for (std::size_t t = 1; t < M.orbit.size(); ++t)
            if (r[M.orbit[t]] < r[M.orbit[best]]) best = t;
          if (best != 0) r = M.reps[best] * r;
        }
        out.insert(out.end(), r.images().begin() + L.base, r.images().end());
      }
    }
    return out;
  }

  /// Subgroup fixing every point of pts.
  PermGroup pointwise_stabilizer(const std::vector<Point>& pts) const {
    std::vector<Point> order;
    std::vector<char> in(degree_, 0);
    for (Point x : pts) {
      if (x >= degree_) throw Error(Errc::DegreeMismatch, "point out of range");
      if (!in[x]) {
        in[x] = 1;
        order.push_back(x);
      }
    }
    const std::size_t t = order.size();
    for (std::size_t x = 0; x < degree_; ++x)
      if (!in[x]) order.push_back(static_cast<Point>(x));
    std::vector<Point> pi(degree_);  // old -> new
    for (std::size_t i = 0; i < degree_; ++i) pi[order[i]] = static_cast<Point>(i);
    auto relabel = [&](const Perm& g) {
      std::vector<Point> img(degree_);
      for (std::size_t x = 0; x < degree_; ++x) img[pi[x]] = pi[g[x]];
      return Perm::from_images_unchecked(std::move(img));
    };
    std::vector<Perm> rg;
    for (const auto& g : strong_) rg.push_back(relabel(g));
    PermGroup R(degree_, rg, &rg);
    std::vector<Perm> back;
    for (std::size_t i = 0; i < R.strong_.size(); ++i) {
      if (R.strong_smp_[i] < t) continue;
      const Perm& h = R.strong_[i];
      std::vector<Point> img(degree_);
      for (std::size_t x = 0; x < degree_; ++x) img[x] = order[h[pi[x]]];
      back.push_back(Perm::from_images_unchecked(std::move(img)));
    }
    return PermGroup(degree_, back, &back);
  }

  /// Sift g through the chain, assuming it already fixes every point below
  /// from_point; returns true when g reduces to the identity.  g is
  /// overwritten with the residue.
  bool strip(Perm& g, std::size_t from_point) const {
    std::vector<Point> tmp(degree_);
    std::size_t pos = from_point;
    while (true) {
      auto q = g.smallest_moved(pos);
      if (!q) return true;
      int j = level_of_[*q];
      if (j < 0) return false;
      const auto& L = levels_[j];
      int s = L.slot[g[*q]];
      if (s < 0) return false;
      const auto& inv = L.rep_invs[s].images();
      const auto& gi = g.images();
      for (std::size_t x = 0; x < degree_; ++x) tmp[x] = inv[gi[x]];
      g = Perm::from_images_unchecked(tmp);
      pos = *q;
    }
  }

 private:
  void build(const std::vector<Perm>* strong_seed) {
    level_of_.assign(degree_, -1);
    for (const auto& g : gens_) add_strong(g);
    if (strong_seed)
      for (const auto& g : *strong_seed)
        if (!g.is_identity() && g.degree() == degree_) add_strong(g);
    int i = static_cast<int>(levels_.size()) - 1;
    while (i >= 0) {
      compute_orbit(i);
      const ChainLevel& L = levels_[i];
      bool ok = true;
      for (std::size_t a = 0; ok && a < L.orbit.size(); ++a) {
        for (auto si : L.gens) {
          const Perm& s = strong_[si];
          Point gamma = s[L.orbit[a]];
          Perm h = L.reps[a] * s * L.rep_invs[L.slot[gamma]];
          if (strip(h, L.base + 1u)) continue;
          Point q = *h.smallest_moved(L.base + 1u);
          add_strong(h);
          int j = level_of_[q];
          for (int k = i + 1; k <= j; ++k) compute_orbit(k);
          i = j;
          ok = false;
          break;
        }
      }
      if (ok) --i;
    }
    order_ = 1;
    for (const auto& L : levels_) order_ *= L.orbit.size();
  }

  void add_strong(const Perm& g) {
    Point q = *g.smallest_moved();
    strong_.push_back(g);
    strong_smp_.push_back(q);
    if (level_of_[q] < 0) {
      ChainLevel L;
      L.base = q;
      auto it = std::lower_bound(levels_.begin(), levels_.end(), q,
                                 [](const ChainLevel& a, Point b) { return a.base < b; });
      levels_.insert(it, std::move(L));
      for (std::size_t k = 0; k < levels_.size(); ++k) level_of_[levels_[k].base] = static_cast<int>(k);
    }
  }

  void compute_orbit(std::size_t i) {
    ChainLevel& L = levels_[i];
    L.gens.clear();
    for (std::size_t s = 0; s < strong_.size(); ++s)
      if (strong_smp_[s] >= L.base) L.gens.push_back(static_cast<std::uint32_t>(s));
    L.slot.assign(degree_, -1);
    L.orbit.assign(1, L.base);
    L.reps.assign(1, Perm(degree_));
    L.slot[L.base] = 0;
    for (std::size_t a = 0; a < L.orbit.size(); ++a) {
      for (auto si : L.gens) {
        Point y = strong_[si][L.orbit[a]];
        if (L.slot[y] >= 0) continue;
        L.slot[y] = static_cast<std::int32_t>(L.orbit.size());
        L.orbit.push_back(y);
        L.reps.push_back(L.reps[a] * strong_[si]);
      }
    }
    L.rep_invs.clear();
    for (const auto& r : L.reps) L.rep_invs.push_back(r.inverse());
  }

  std::size_t degree_ = 0;
  std::vector<Perm> gens_;
  std::vector<Perm> strong_;
  std::vector<Point> strong_smp_;
  std::vector<ChainLevel> levels_;
  std::vector<int> level_of_;
  BigInt order_ = 1;
};

inline PermGroup sgs_build(const std::vector<Perm>& gens) {
  if (gens.empty()) return PermGroup::trivial(0);
  return PermGroup(gens.front().degree(), gens);
}

inline BigInt index(const PermGroup& G, const PermGroup& U) {
  if (!U.is_subgroup_of(G)) throw Error(Errc::NotASubgroup, "index of a non-subgroup");
  return G.order() / U.order();
}

/// Smallest subgroup containing N that is normalized by every element of conj.
inline PermGroup normal_closure_under(const std::vector<Perm>& conj, PermGroup N) {
  const std::size_t n = N.degree();
  std::vector<Perm> gens = N.generators();
  std::deque<Perm> queue(gens.begin(), gens.end());
  while (!queue.empty()) {
    Perm x = std::move(queue.front());
    queue.pop_front();
    for (const auto& g : conj) {
      Perm y = x.conj(g);
      if (N.contains(y)) continue;
      gens.push_back(y);
      N = PermGroup(n, gens, &N.strong_generators());
      queue.push_back(std::move(y));
    }
  }
  return N;
}

inline PermGroup normal_closure(const PermGroup& G, const std::vector<Perm>& seeds) {
  for (const auto& s : seeds)
    if (!G.contains(s)) throw Error(Errc::NotAMember, "seed not in group");
  return normal_closure_under(G.generators(), PermGroup(G.degree(), seeds));
}

inline PermGroup derived_subgroup(const PermGroup& G) {
  std::vector<Perm> comms;
  const auto& g = G.generators();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) comms.push_back(commutator(g[i], g[j]));
  return normal_closure_under(g, PermGroup(G.degree(), comms));
}

inline PermGroup frattini_p(const PermGroup& G, int p) {
  if (!G.is_p_group(p)) throw Error(Errc::NotAPGroup, "order is not a power of p");
  std::vector<Perm> seeds;
  const auto& g = G.generators();
  for (std::size_t i = 0; i < g.size(); ++i) {
    seeds.push_back(g[i].pow(p));
    for (std::size_t j = i + 1; j < g.size(); ++j) seeds.push_back(commutator(g[i], g[j]));
  }
  return normal_closure_under(g, PermGroup(G.degree(), seeds));
}

inline int dp(const PermGroup& G, int p) {
  PermGroup F = frattini_p(G, p);
  return *log_exact(G.order() / F.order(), p);
}

struct Partition {
  std::vector<int> cell;  // point -> cell id, cells numbered by least point
  int count = 0;
};

inline Partition orbit_partition(const std::vector<Perm>& gens, std::size_t degree) {
  Partition P;
  P.cell.assign(degree, -1);
  std::vector<Point> stack;
  for (std::size_t x = 0; x < degree; ++x) {
    if (P.cell[x] >= 0) continue;
    int c = P.count++;
    P.cell[x] = c;
    stack.assign(1, static_cast<Point>(x));
    while (!stack.empty()) {
      Point y = stack.back();
      stack.pop_back();
      for (const auto& g : gens) {
        Point z = g[y];
        if (P.cell[z] < 0) {
          P.cell[z] = c;
          stack.push_back(z);
        }
      }
    }
  }
  return P;
}

inline Partition orbit_partition(const PermGroup& U) {
  return orbit_partition(U.generators(), U.degree());
}

inline int orbit_count(const PermGroup& U) { return orbit_partition(U).count; }

struct CanonicalFormHash {
  std::size_t operator()(const std::vector<Point>& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Point x : v) h = (h ^ x) * 1099511628211ull;
    return h;
  }
};

/// N_G(U) from the conjugation orbit of U and its Schreier generators.
/// Intended for p-groups, where the orbit (G : N_G(U)) is small.
inline PermGroup normalizer(const PermGroup& G, const PermGroup& U) {
  if (!U.is_subgroup_of(G)) throw Error(Errc::NotASubgroup, "normalizer of a non-subgroup");
  const std::size_t n = G.degree();
  std::unordered_map<std::vector<Point>, std::size_t, CanonicalFormHash> seen;
  std::vector<Perm> transversal{G.identity()};
  std::vector<PermGroup> members{U};
  seen.emplace(U.canonical_form(), 0);
  std::vector<Perm> schreier = U.generators();
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (const auto& g : G.generators()) {
      std::vector<Perm> conj;
      for (const auto& u : members[i].generators()) conj.push_back(u.conj(g));
      PermGroup V(n, conj);
      auto key = V.canonical_form();
      Perm t = transversal[i] * g;
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(std::move(key), members.size());
        members.push_back(std::move(V));
        transversal.push_back(std::move(t));
      } else {
        Perm s = t * transversal[it->second].inverse();
        if (!s.is_identity()) schreier.push_back(std::move(s));
      }
    }
  }
  return PermGroup(n, schreier);
}

/// |U \ G / V| as the number of U-orbits on the right cosets of V.
inline BigInt double_coset_count(const PermGroup& G, const PermGroup& U, const PermGroup& V,
                                 std::size_t cap = std::size_t(1) << 20) {
  if (!U.is_subgroup_of(G) || !V.is_subgroup_of(G))
    throw Error(Errc::NotASubgroup, "double cosets need subgroups of G");
  BigInt idx = G.order() / V.order();
  if (idx > cap)
    throw Error(Errc::CosetSpaceTooLarge,
                "coset space of size " + idx.str() + " exceeds cap " + std::to_string(cap));
  // Coset V g is identified by the least element of V g.
  std::unordered_map<Perm, std::uint32_t, PermHash> id;
  std::vector<Perm> reps{V.coset_min(G.identity())};
  id.emplace(reps[0], 0);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (const auto& g : G.generators()) {
      Perm c = V.coset_min(reps[i] * g);
      if (id.emplace(c, static_cast<std::uint32_t>(reps.size())).second) reps.push_back(std::move(c));
    }
  }
  std::vector<std::uint32_t> parent(reps.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t classes = reps.size();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (const auto& u : U.generators()) {
      // Right multiplication; orbits of U on V\G match double cosets.
      std::uint32_t j = id.at(V.coset_min(reps[i] * u));
      auto a = find(static_cast<std::uint32_t>(i)), b = find(j);
      if (a != b) {
        parent[a] = b;
        --classes;
      }
    }
  }
  return classes;
}

/// A subgroup of a fixed parent group together with its index exponent.
struct SubgroupHandle {
  std::shared_ptr<const PermGroup> parent;
  PermGroup group;
  int index_exp = 0;
};

inline SubgroupHandle make_handle(std::shared_ptr<const PermGroup> parent, PermGroup group, int p) {
  if (!group.is_subgroup_of(*parent)) throw Error(Errc::NotASubgroup, "handle group not in parent");
  auto m = log_exact(parent->order() / group.order(), p);
  if (!m) throw Error(Errc::NotAPGroup, "index is not a power of p");
  return SubgroupHandle{std::move(parent), std::move(group), *m};
}

}  // namespace pgrowth
