#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "perm.hpp"
#include "permgroup.hpp"

namespace pgrowth {

/// Composition series with cyclic factors of order p for a permutation
/// p-group, read off from its stabilizer chain.  Inside each fundamental
/// orbit a flag of block systems (blocks of size p, p^2, ...) refines the
/// point stabilizer series; position k of the series is the stabilizer of
/// one block of that flag.  The exponent of an element at position k is the
/// sub-block its base-point image lands in, so it is a table lookup.
class PcContext {
 public:
  PcContext(const PermGroup& P, int p) : group_(P), p_(p), n_(P.degree()) {
    if (!P.is_p_group(p)) throw Error(Errc::NotAPGroup, "pc series needs a p-group");
    const auto& strong = P.strong_generators();
    for (const auto& L : P.chain()) build_level(L, strong);
    if (pos_.size() > 255) throw Error(Errc::CapExceeded, "group order exceeds p^255");
  }

  int prime() const { return p_; }
  int length() const { return static_cast<int>(pos_.size()); }
  std::size_t degree() const { return n_; }
  const PermGroup& group() const { return group_; }
  const Perm& gen(int k) const { return pos_[k].g; }

  /// Exponent at position k of an element of the k-th series term; -1 when
  /// the element is not in that term.
  int lead(int k, const Point* img) const {
    const auto& P = pos_[k];
    int b = P.block[img[P.alpha]];
    return b < 0 ? -1 : P.exp[b];
  }
  int lead(int k, const Perm& x) const { return lead(k, x.images().data()); }

  /// g_k^-e as a permutation (e in 0..p-1).
  const Perm& gen_inv_pow(int k, int e) const { return pos_[k].inv_pows[e]; }
  const Perm& gen_pow(int k, int e) const { return pos_[k].pows[e]; }

  /// Normal-form exponents: x = g_0^e_0 g_1^e_1 ... g_{r-1}^e_{r-1}.
  std::vector<std::uint8_t> exponents(const Perm& x) const {
    std::vector<std::uint8_t> e(pos_.size());
    std::vector<Point> t = x.images(), tmp(n_);
    for (int k = 0; k < length(); ++k) {
      int v = lead(k, t.data());
      if (v < 0) throw Error(Errc::NotAMember, "element outside the pc group");
      e[k] = static_cast<std::uint8_t>(v);
      if (v) left_mul(gen_inv_pow(k, v), t, tmp);
    }
    for (std::size_t i = 0; i < n_; ++i)
      if (t[i] != i) throw Error(Errc::NotAMember, "element outside the pc group");
    return e;
  }

  Perm element(const std::vector<std::uint8_t>& e) const {
    Perm r(n_);
    for (int k = 0; k < length(); ++k)
      if (e[k]) r *= gen_pow(k, e[k]);
    return r;
  }

  /// t := a * t
  static void left_mul(const Perm& a, std::vector<Point>& t, std::vector<Point>& tmp) {
    const auto& ai = a.images();
    for (std::size_t i = 0; i < t.size(); ++i) tmp[i] = t[ai[i]];
    t.swap(tmp);
  }

 private:
  struct Position {
    Point alpha = 0;
    std::vector<std::int32_t> block;  // point -> sub-block id, -1 outside the orbit
    std::vector<std::int8_t> exp;     // sub-block id -> exponent, -1 outside the split block
    Perm g;
    std::vector<Perm> pows, inv_pows;
  };

  void build_level(const ChainLevel& L, const std::vector<Perm>& strong) {
    const std::size_t m = L.orbit.size();
    std::vector<const Perm*> gens;
    for (auto si : L.gens) gens.push_back(&strong[si]);
    // systems[j]: point -> block id for blocks of size p^j
    std::vector<std::vector<std::int32_t>> systems;
    std::vector<std::int32_t> cur(n_, -1);
    for (std::size_t i = 0; i < m; ++i) cur[L.orbit[i]] = static_cast<std::int32_t>(i);
    std::size_t nb = m;
    systems.push_back(cur);
    while (nb > 1) {
      std::vector<Point> rep(nb);
      for (std::size_t i = 0; i < m; ++i) rep[cur[L.orbit[i]]] = L.orbit[i];
      const std::int32_t a0 = cur[L.base];
      std::vector<std::int32_t> parent;
      bool found = false;
      for (std::size_t b = 0; b < nb && !found; ++b) {
        if (static_cast<std::int32_t>(b) == a0) continue;
        parent.resize(nb);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::int32_t x) {
          while (parent[x] != x) x = parent[x] = parent[parent[x]];
          return x;
        };
        std::vector<std::pair<std::int32_t, std::int32_t>> pairs{{a0, static_cast<std::int32_t>(b)}};
        parent[find(static_cast<std::int32_t>(b))] = find(a0);
        while (!pairs.empty()) {
          auto [x, y] = pairs.back();
          pairs.pop_back();
          for (const Perm* s : gens) {
            std::int32_t xs = cur[(*s)[rep[x]]], ys = cur[(*s)[rep[y]]];
            std::int32_t fx = find(xs), fy = find(ys);
            if (fx != fy) {
              parent[fy] = fx;
              pairs.emplace_back(xs, ys);
            }
          }
        }
        std::int32_t ra = find(a0);
        std::size_t sz = 0;
        for (std::size_t c = 0; c < nb; ++c)
          if (find(static_cast<std::int32_t>(c)) == ra) ++sz;
        if (sz == static_cast<std::size_t>(p_)) {
          for (auto& x : parent) x = find(x);
          found = true;
        }
      }
      if (!found) throw Error(Errc::NotAPGroup, "no block of size p in fundamental orbit");
      std::vector<std::int32_t> dense(nb, -1);
      std::int32_t next = 0;
      for (std::size_t c = 0; c < nb; ++c)
        if (dense[parent[c]] < 0) dense[parent[c]] = next++;
      for (std::size_t i = 0; i < m; ++i) cur[L.orbit[i]] = dense[parent[cur[L.orbit[i]]]];
      nb = static_cast<std::size_t>(next);
      systems.push_back(cur);
    }
    const std::size_t a = systems.size() - 1;
    for (std::size_t t = 0; t < a; ++t) {
      const auto& upper = systems[a - t];
      const auto& lower = systems[a - t - 1];
      Position P;
      P.alpha = L.base;
      P.block = lower;
      std::int32_t nlow = 0;
      for (auto v : lower) nlow = std::max(nlow, v + 1);
      P.exp.assign(nlow, -1);
      std::size_t pick = m;
      for (std::size_t i = 0; i < m && pick == m; ++i) {
        Point x = L.orbit[i];
        if (upper[x] == upper[L.base] && lower[x] != lower[L.base]) pick = i;
      }
      P.g = L.reps[pick];
      Point y = L.base;
      for (int e = 0; e < p_; ++e) {
        P.exp[lower[y]] = static_cast<std::int8_t>(e);
        y = P.g[y];
      }
      P.pows.push_back(Perm(n_));
      for (int e = 1; e < p_; ++e) P.pows.push_back(P.pows.back() * P.g);
      for (int e = 0; e < p_; ++e) P.inv_pows.push_back(P.pows[e].inverse());
      pos_.push_back(std::move(P));
    }
  }

  PermGroup group_;
  int p_;
  std::size_t n_;
  std::vector<Position> pos_;
};

/// Canonical key of a subgroup: its depth set plus, for each depth, the
/// normal-form exponents of the unique element with exponent 1 there and 0
/// at every other depth.  Keys compare as byte strings.
using SubgroupKey = std::string;

class PcSubgroup;

/// Incremental induced-pcgs construction: sifts elements, inserts new
/// depths and closes under p-th powers, commutators and (optionally)
/// conjugation by a fixed list.
class PcBuilder {
 public:
  explicit PcBuilder(const PcContext& ctx)
      : ctx_(&ctx), slot_(ctx.length(), -1), tmp_(ctx.degree()) {}

  void set_conjugators(std::vector<Perm> c) { conj_ = std::move(c); }

  /// Install elements already known to form an induced pcgs of a subgroup.
  void seed(const std::vector<int>& depths, const std::vector<Perm>& elems) {
    for (std::size_t i = 0; i < depths.size(); ++i) insert(depths[i], elems[i], false);
  }

  int size() const { return static_cast<int>(elems_.size()); }

  /// Sift x; if it is not yet in the span, insert it and queue closure work.
  bool add(const Perm& x) {
    std::vector<Point> t = x.images();
    int v = 0;
    int k = sift(t, v);
    if (k < 0) return false;
    Perm y = Perm::from_images_unchecked(std::move(t));
    if (v != 1) y = y.pow(mod_inverse(v, ctx_->prime()));
    insert(k, y, true);
    return true;
  }

  /// Process queued closure work; stops early once `target` elements exist.
  void close(int target = -1) {
    while (!queue_.empty()) {
      if (target >= 0 && size() >= target) break;
      Perm x = std::move(queue_.front());
      queue_.pop_front();
      add(x);
    }
    queue_.clear();
  }

  /// Exponents of x relative to the current sequence, indexed by depth.
  /// Throws NotAMember if x is not in the generated subgroup.
  std::vector<std::uint8_t> coordinates(const Perm& x) const {
    std::vector<std::uint8_t> e(ctx_->length(), 0);
    std::vector<Point> t = x.images(), tmp(ctx_->degree());
    for (int k = 0; k < ctx_->length(); ++k) {
      int v = ctx_->lead(k, t.data());
      if (v < 0 || (v && slot_[k] < 0)) throw Error(Errc::NotAMember, "element outside subgroup");
      if (!v) continue;
      e[k] = static_cast<std::uint8_t>(v);
      PcContext::left_mul(inv_pows_[slot_[k]][v], t, tmp);
    }
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] != i) throw Error(Errc::NotAMember, "element outside subgroup");
    return e;
  }

  PcSubgroup result() const;

 private:
  int sift(std::vector<Point>& t, int& lead) {
    for (int k = 0; k < ctx_->length(); ++k) {
      int v = ctx_->lead(k, t.data());
      if (v == 0) continue;
      if (v < 0) throw Error(Errc::NotAMember, "element outside the pc group");
      if (slot_[k] < 0) {
        lead = v;
        return k;
      }
      PcContext::left_mul(inv_pows_[slot_[k]][v], t, tmp_);
    }
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] != i) throw Error(Errc::NotAMember, "element outside the pc group");
    return -1;
  }

  void insert(int k, const Perm& x, bool obligations) {
    const int p = ctx_->prime();
    if (obligations) {
      queue_.push_back(x.pow(p));
      for (const auto& y : elems_) queue_.push_back(commutator(x, y));
      for (const auto& c : conj_) queue_.push_back(x.conj(c));
    }
    slot_[k] = static_cast<int>(elems_.size());
    depth_.push_back(k);
    elems_.push_back(x);
    std::vector<Perm> ip{Perm(ctx_->degree())};
    Perm xi = x.inverse();
    for (int e = 1; e < p; ++e) ip.push_back(ip.back() * xi);
    inv_pows_.push_back(std::move(ip));
  }

  const PcContext* ctx_;
  std::vector<int> slot_;
  std::vector<int> depth_;
  std::vector<Perm> elems_;
  std::vector<std::vector<Perm>> inv_pows_;
  std::vector<Perm> conj_;
  std::deque<Perm> queue_;
  std::vector<Point> tmp_;
};

/// Subgroup of a PcContext group held by a canonical induced pcgs.
class PcSubgroup {
 public:
  PcSubgroup() = default;

  PcSubgroup(const PcContext& ctx, std::vector<int> depths, std::vector<Perm> elems)
      : ctx_(&ctx) {
    std::vector<std::size_t> idx(depths.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return depths[a] < depths[b]; });
    for (auto i : idx) {
      depth_.push_back(depths[i]);
      elem_.push_back(std::move(elems[i]));
    }
    canonicalize();
  }

  static PcSubgroup whole(const PcContext& ctx) {
    std::vector<int> d(ctx.length());
    std::vector<Perm> e;
    for (int k = 0; k < ctx.length(); ++k) {
      d[k] = k;
      e.push_back(ctx.gen(k));
    }
    return PcSubgroup(ctx, d, e);
  }

  static PcSubgroup generated(const PcContext& ctx, const std::vector<Perm>& gens, int target = -1) {
    PcBuilder b(ctx);
    for (const auto& g : gens) {
      b.add(g);
      if (target >= 0 && b.size() >= target) break;
    }
    b.close(target);
    return b.result();
  }

  /// Normal closure of seeds under conjugation by conj.
  static PcSubgroup normal_closure(const PcContext& ctx, const std::vector<Perm>& seeds,
                                   const std::vector<Perm>& conj) {
    PcBuilder b(ctx);
    b.set_conjugators(conj);
    for (const auto& g : seeds) b.add(g);
    b.close();
    return b.result();
  }

  static PcSubgroup from_key(const PcContext& ctx, const SubgroupKey& key) {
    const int r = ctx.length();
    const int bits = digit_bits(ctx.prime());
    std::size_t pos = 1;
    std::vector<char> in(r, 0);
    std::vector<int> depths;
    for (int k = 0; k < r; ++k)
      if (static_cast<unsigned char>(key[pos + k / 8]) >> (k % 8) & 1) {
        in[k] = 1;
        depths.push_back(k);
      }
    std::size_t bitpos = 8 * (1 + (r + 7) / 8);
    std::vector<Perm> elems;
    for (int d : depths) {
      Perm x = ctx.gen(d);
      for (int k = d + 1; k < r; ++k) {
        if (in[k]) continue;
        int v = 0;
        for (int b = 0; b < bits; ++b, ++bitpos)
          v |= (static_cast<unsigned char>(key[bitpos / 8]) >> (bitpos % 8) & 1) << b;
        if (v) x *= ctx.gen_pow(k, v);
      }
      elems.push_back(std::move(x));
    }
    PcSubgroup U;
    U.ctx_ = &ctx;
    U.depth_ = std::move(depths);
    U.elem_ = std::move(elems);
    U.key_ = key;
    return U;
  }

  const PcContext& context() const { return *ctx_; }
  int size_exp() const { return static_cast<int>(depth_.size()); }
  int index_exp() const { return ctx_->length() - size_exp(); }
  const std::vector<int>& depths() const { return depth_; }
  const std::vector<Perm>& elements() const { return elem_; }
  const SubgroupKey& key() const { return key_; }

  bool contains(const Perm& x) const {
    try {
      builder().coordinates(x);
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  PcBuilder builder() const {
    PcBuilder b(*ctx_);
    b.seed(depth_, elem_);
    return b;
  }

  PermGroup to_perm_group() const { return PermGroup(ctx_->degree(), elem_); }

  /// Phi(U) = [U,U]U^p.
  PcSubgroup frattini() const {
    std::vector<Perm> seeds;
    for (std::size_t i = 0; i < elem_.size(); ++i) {
      seeds.push_back(elem_[i].pow(ctx_->prime()));
      for (std::size_t j = i + 1; j < elem_.size(); ++j) seeds.push_back(commutator(elem_[i], elem_[j]));
    }
    return normal_closure(*ctx_, seeds, elem_);
  }

  PcSubgroup conjugate(const Perm& g) const {
    std::vector<Perm> c;
    for (const auto& x : elem_) c.push_back(x.conj(g));
    return generated(*ctx_, c, size_exp());
  }

  bool is_subgroup_of(const PcSubgroup& V) const {
    auto b = V.builder();
    try {
      for (const auto& x : elem_) b.coordinates(x);
    } catch (const Error&) {
      return false;
    }
    return true;
  }

  static int digit_bits(int p) {
    int b = 0;
    while ((1 << b) < p) ++b;
    return b;
  }

 private:
  friend class PcBuilder;

  /// Rewrite each element to the unique one with exponent 1 at its own depth
  /// and 0 at all other depths, then encode the key.
  void canonicalize() {
    const int r = ctx_->length();
    const int p = ctx_->prime();
    const int bits = digit_bits(p);
    std::vector<int> slot(r, -1);
    for (std::size_t i = 0; i < depth_.size(); ++i) slot[depth_[i]] = static_cast<int>(i);
    // Bottom-up, so every element used for clearing is already canonical.
    std::vector<std::vector<std::uint8_t>> digits(depth_.size());
    std::vector<Point> tmp(ctx_->degree());
    for (int i = static_cast<int>(depth_.size()) - 1; i >= 0; --i) {
      const int d = depth_[i];
      Perm x = elem_[i];
      int lead = ctx_->lead(d, x);
      if (lead != 1) x = x.pow(mod_inverse(lead, p));
      std::vector<Point> t = x.images();
      PcContext::left_mul(ctx_->gen_inv_pow(d, 1), t, tmp);
      for (int k = d + 1; k < r; ++k) {
        int v = ctx_->lead(k, t.data());
        if (v && slot[k] >= 0) {
          const Perm& c = elem_[slot[k]].pow(p - v);
          x *= c;
          const auto& ci = c.images();
          for (std::size_t j = 0; j < t.size(); ++j) tmp[j] = ci[t[j]];
          t.swap(tmp);
          v = 0;
        }
        if (slot[k] < 0) digits[i].push_back(static_cast<std::uint8_t>(v));
        if (v) PcContext::left_mul(ctx_->gen_inv_pow(k, v), t, tmp);
      }
      elem_[i] = std::move(x);
    }
    std::string key(1 + (r + 7) / 8, '\0');
    key[0] = static_cast<char>(depth_.size());
    for (int d : depth_) key[1 + d / 8] = static_cast<char>(key[1 + d / 8] | (1 << (d % 8)));
    std::size_t bitpos = 8 * key.size();
    for (const auto& dv : digits)
      for (auto v : dv)
        for (int b = 0; b < bits; ++b, ++bitpos) {
          if (bitpos / 8 >= key.size()) key.push_back('\0');
          if (v >> b & 1) key[bitpos / 8] = static_cast<char>(key[bitpos / 8] | (1 << (bitpos % 8)));
        }
    key_ = std::move(key);
  }

  const PcContext* ctx_ = nullptr;
  std::vector<int> depth_;
  std::vector<Perm> elem_;
  SubgroupKey key_;
};

inline PcSubgroup PcBuilder::result() const { return PcSubgroup(*ctx_, depth_, elems_); }

}  // namespace pgrowth
