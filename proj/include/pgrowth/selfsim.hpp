#pragma once

#include <cctype>
#include <map>
#include <numeric>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "pc.hpp"
#include "perm.hpp"
#include "permgroup.hpp"

namespace pgrowth {

struct TreeParams {
  int p = 2;
  int max_level = 7;

  static int default_max_level(int p) {
    if (p == 2) return 7;
    if (p == 3) return 4;
    if (p == 5) return 3;
    int l = 1;
    while (upow(p, l + 1) <= 128) ++l;
    return l;
  }

  void validate() const {
    if (!is_prime(p)) throw Error(Errc::UnsupportedPrime, std::to_string(p) + " is not prime");
    if (max_level < 1) throw Error(Errc::LevelTooLarge, "max_level must be positive");
    if (leaves(max_level) > 65535)
      throw Error(Errc::LevelTooLarge, "p^max_level exceeds the point index range");
  }

  std::size_t leaves(int level) const {
    std::size_t n = 1;
    for (int i = 0; i < level; ++i) {
      n *= static_cast<std::size_t>(p);
      if (n > (std::size_t(1) << 32)) return n;
    }
    return n;
  }
};

/// Vertex of the rooted p-regular tree, as a word over {0..p-1}.
struct Vertex {
  std::vector<int> word;

  int level() const { return static_cast<int>(word.size()); }

  /// Big-endian base-p value of the word.
  std::size_t index(int p) const {
    std::size_t x = 0;
    for (int d : word) x = x * p + d;
    return x;
  }

  static Vertex from_index(std::size_t idx, int level, int p) {
    Vertex v;
    v.word.assign(level, 0);
    for (int i = level - 1; i >= 0; --i) {
      v.word[i] = static_cast<int>(idx % p);
      idx /= p;
    }
    return v;
  }

  static Vertex parse(const std::string& s, int p) {
    Vertex v;
    for (char c : s) {
      if (c < '0' || c - '0' >= p) throw Error(Errc::ParseError, "bad vertex letter in '" + s + "'");
      v.word.push_back(c - '0');
    }
    return v;
  }

  std::string to_string() const {
    std::string s;
    for (int d : word) s.push_back(static_cast<char>('0' + d));
    return s;
  }

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend auto operator<=>(const Vertex& a, const Vertex& b) {
    if (a.word.size() != b.word.size()) return a.word.size() <=> b.word.size();
    return a.word <=> b.word;
  }
};

struct Letter {
  int gen = 0;
  bool inv = false;
  friend bool operator==(const Letter&, const Letter&) = default;
};

/// Free word over generator indices; the empty word is the identity.
using ElementWord = std::vector<Letter>;

inline ElementWord reduce(const ElementWord& w) {
  ElementWord out;
  for (const auto& l : w) {
    if (!out.empty() && out.back().gen == l.gen && out.back().inv != l.inv)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

inline ElementWord inverse(const ElementWord& w) {
  ElementWord out(w.rbegin(), w.rend());
  for (auto& l : out) l.inv = !l.inv;
  return out;
}

inline ElementWord concat(const ElementWord& a, const ElementWord& b) {
  ElementWord out = a;
  out.insert(out.end(), b.begin(), b.end());
  return reduce(out);
}

inline ElementWord commutator_word(const ElementWord& a, const ElementWord& b) {
  return concat(concat(inverse(a), inverse(b)), concat(a, b));
}

inline ElementWord conjugate_word(const ElementWord& w, const ElementWord& g) {
  return concat(concat(inverse(g), w), g);
}

/// Words are whitespace-separated tokens; a token is split greedily into
/// declared names, each optionally followed by ^-1.  "1" is the identity.
/// On failure, *err_pos receives the offending offset.
inline ElementWord parse_word_names(const std::map<std::string, int>& names, const std::string& text,
                                    std::size_t* err_pos = nullptr) {
  ElementWord w;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    if (text[i] == '1' && (i + 1 == text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 1])))) {
      ++i;
      continue;
    }
    std::size_t best = 0;
    int idx = -1;
    for (const auto& [name, k] : names)
      if (name.size() > best && text.compare(i, name.size(), name) == 0) {
        best = name.size();
        idx = k;
      }
    if (idx < 0) {
      if (err_pos) *err_pos = i;
      std::size_t j = i;
      while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
      throw Error(Errc::UnknownGenerator,
                  "unknown generator '" + text.substr(i, std::max<std::size_t>(1, j - i)) + "'");
    }
    i += best;
    bool inv = false;
    if (text.compare(i, 3, "^-1") == 0) {
      inv = true;
      i += 3;
    }
    w.push_back({idx, inv});
  }
  return reduce(w);
}

struct GeneratorDef {
  std::string name;
  std::vector<int> root_perm;  // image of each letter
  std::vector<ElementWord> sections;
};

/// Named constants for the self-replicating subgroup K used in bound checks.
struct GroupMetadata {
  std::optional<int> k, ell, d, d_K;
  enum class KKind { None, NormalClosure, Derived } k_kind = KKind::None;
  std::vector<ElementWord> k_seed;
};

struct LevelPermutation {
  int level = 0;
  Perm perm;
};

/// Self-similar group given by wreath recursion.  Generator actions are
/// tabulated for every level up to max_level at construction; afterwards
/// the object is immutable.
class SelfSimilarGroup {
 public:
  SelfSimilarGroup(TreeParams params, std::vector<GeneratorDef> gens, GroupMetadata meta = {},
                   std::string id = "custom")
      : params_(params), gens_(std::move(gens)), meta_(std::move(meta)), id_(std::move(id)) {
    params_.validate();
    const int p = params_.p;
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      const auto& g = gens_[i];
      if (g.name.empty()) throw Error(Errc::ParseError, "empty generator name");
      if (!name_index_.emplace(g.name, static_cast<int>(i)).second)
        throw Error(Errc::ParseError, "duplicate generator " + g.name);
    }
    for (const auto& g : gens_) {
      if (static_cast<int>(g.root_perm.size()) != p)
        throw Error(Errc::BadPermutation, "root permutation of " + g.name + " has wrong size");
      std::vector<char> seen(p, 0);
      for (int x : g.root_perm) {
        if (x < 0 || x >= p || seen[x])
          throw Error(Errc::BadPermutation, "root permutation of " + g.name + " is not a bijection");
        seen[x] = 1;
      }
      if (static_cast<int>(g.sections.size()) != p)
        throw Error(Errc::ArityMismatch, "generator " + g.name + " needs " + std::to_string(p) + " sections");
      for (const auto& w : g.sections)
        for (const auto& l : w)
          if (l.gen < 0 || l.gen >= static_cast<int>(gens_.size()))
            throw Error(Errc::UnknownGenerator, "section of " + g.name + " uses an undeclared generator");
    }
    for (const auto& w : meta_.k_seed)
      for (const auto& l : w)
        if (l.gen < 0 || l.gen >= static_cast<int>(gens_.size()))
          throw Error(Errc::UnknownGenerator, "seed word uses an undeclared generator");
    for (auto c : {meta_.k, meta_.ell, meta_.d, meta_.d_K})
      if (c && *c <= 0) throw Error(Errc::ParseError, "metadata constants must be positive");
    tabulate();
  }

  int p() const { return params_.p; }
  int max_level() const { return params_.max_level; }
  const TreeParams& params() const { return params_; }
  const std::vector<GeneratorDef>& generators() const { return gens_; }
  const GroupMetadata& metadata() const { return meta_; }
  const std::string& id() const { return id_; }
  std::size_t num_generators() const { return gens_.size(); }

  int generator_index(const std::string& name) const {
    auto it = name_index_.find(name);
    if (it == name_index_.end()) throw Error(Errc::UnknownGenerator, "unknown generator " + name);
    return it->second;
  }

  ElementWord parse_word(const std::string& text) const { return parse_word_names(name_index_, text); }

  std::string format_word(const ElementWord& w) const {
    if (w.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) s += ' ';
      s += gens_[w[i].gen].name;
      if (w[i].inv) s += "^-1";
    }
    return s;
  }

  const Perm& generator_perm(int gen, int level, bool inv = false) const {
    check_level(level);
    return inv ? inv_[level][gen] : perm_[level][gen];
  }

  std::vector<Perm> generator_perms(int level) const {
    check_level(level);
    return perm_[level];
  }

  Perm word_perm(const ElementWord& w, int level) const {
    check_level(level);
    Perm r(params_.leaves(level));
    for (const auto& l : w) r *= l.inv ? inv_[level][l.gen] : perm_[level][l.gen];
    return r;
  }

  void check_level(int level) const {
    if (level < 0 || level > params_.max_level)
      throw Error(Errc::LevelTooLarge, "level " + std::to_string(level) + " exceeds max_level " +
                                           std::to_string(params_.max_level));
  }

  /// Image letter and section word of w at a level-1 letter x.
  std::pair<int, ElementWord> section1(const ElementWord& w, int x) const {
    ElementWord out;
    int cur = x;
    for (const auto& l : w) {
      const auto& g = gens_[l.gen];
      if (!l.inv) {
        const auto& s = g.sections[cur];
        out.insert(out.end(), s.begin(), s.end());
        cur = g.root_perm[cur];
      } else {
        int pre = root_inv_[l.gen][cur];
        auto s = inverse(g.sections[pre]);
        out.insert(out.end(), s.begin(), s.end());
        cur = pre;
      }
    }
    return {cur, reduce(out)};
  }

 private:
  void tabulate() {
    const int p = params_.p;
    root_inv_.assign(gens_.size(), std::vector<int>(p));
    for (std::size_t g = 0; g < gens_.size(); ++g)
      for (int x = 0; x < p; ++x) root_inv_[g][gens_[g].root_perm[x]] = x;
    perm_.resize(params_.max_level + 1);
    inv_.resize(params_.max_level + 1);
    perm_[0].assign(gens_.size(), Perm(1));
    inv_[0].assign(gens_.size(), Perm(1));
    for (int lev = 1; lev <= params_.max_level; ++lev) {
      const std::size_t sub = params_.leaves(lev - 1);
      for (const auto& g : gens_) {
        std::vector<Perm> sec;
        for (const auto& w : g.sections) {
          Perm r(sub);
          for (const auto& l : w) r *= l.inv ? inv_[lev - 1][l.gen] : perm_[lev - 1][l.gen];
          sec.push_back(std::move(r));
        }
        std::vector<Point> img(sub * p);
        for (int x = 0; x < p; ++x)
          for (std::size_t y = 0; y < sub; ++y)
            img[x * sub + y] = static_cast<Point>(g.root_perm[x] * sub + sec[x][y]);
        Perm gp = Perm::from_images_unchecked(std::move(img));
        inv_[lev].push_back(gp.inverse());
        perm_[lev].push_back(std::move(gp));
      }
    }
  }

  TreeParams params_;
  std::vector<GeneratorDef> gens_;
  GroupMetadata meta_;
  std::string id_;
  std::map<std::string, int> name_index_;
  std::vector<std::vector<int>> root_inv_;
  std::vector<std::vector<Perm>> perm_, inv_;
};

inline LevelPermutation eval_level(const SelfSimilarGroup& G, const ElementWord& w, int level) {
  return {level, G.word_perm(w, level)};
}

/// Image of v under w together with the section of w at v.
inline std::pair<Vertex, ElementWord> section(const SelfSimilarGroup& G, const ElementWord& w,
                                              const Vertex& v) {
  Vertex img;
  ElementWord cur = reduce(w);
  for (int x : v.word) {
    if (x < 0 || x >= G.p()) throw Error(Errc::ParseError, "vertex letter out of range");
    auto [y, s] = G.section1(cur, x);
    img.word.push_back(y);
    cur = std::move(s);
  }
  return {img, cur};
}

/// Acts as w on the subtree below v and trivially elsewhere.
inline LevelPermutation embed_at_vertex(const SelfSimilarGroup& G, const ElementWord& w,
                                        const Vertex& v, int level) {
  G.check_level(level);
  if (v.level() >= level) throw Error(Errc::LevelTooLarge, "vertex must lie above the level");
  const int depth = level - v.level();
  Perm sub = G.word_perm(w, depth);
  const std::size_t block = G.params().leaves(depth);
  const std::size_t off = v.index(G.p()) * block;
  Perm r(G.params().leaves(level));
  std::vector<Point> img = r.images();
  for (std::size_t y = 0; y < block; ++y) img[off + y] = static_cast<Point>(off + sub[y]);
  return {level, Perm::from_images_unchecked(std::move(img))};
}

inline PermGroup generator_image(const SelfSimilarGroup& G, int level) {
  return PermGroup(G.params().leaves(level), G.generator_perms(level));
}

/// Which subgroup of the level quotient to build.
struct SeedSubgroup {
  enum class Kind { Whole, NormalClosure, Derived } kind = Kind::Whole;
  std::vector<ElementWord> words;

  static SeedSubgroup whole() { return {}; }
  static SeedSubgroup normal_closure(std::vector<ElementWord> w) { return {Kind::NormalClosure, std::move(w)}; }
  static SeedSubgroup derived() { return {Kind::Derived, {}}; }

  /// The distinguished subgroup K recorded in the metadata.
  static SeedSubgroup k_of(const SelfSimilarGroup& G) {
    using K = GroupMetadata::KKind;
    switch (G.metadata().k_kind) {
      case K::NormalClosure: return normal_closure(G.metadata().k_seed);
      case K::Derived: return derived();
      case K::None: break;
    }
    throw Error(Errc::Usage, "group " + G.id() + " has no distinguished subgroup K");
  }
};

inline PermGroup level_quotient(const SelfSimilarGroup& G, int level,
                                const SeedSubgroup& seed = SeedSubgroup::whole()) {
  G.check_level(level);
  PermGroup Q = generator_image(G, level);
  if (seed.kind == SeedSubgroup::Kind::Whole) return Q;
  std::vector<Perm> seeds;
  const auto gens = G.generator_perms(level);
  if (seed.kind == SeedSubgroup::Kind::NormalClosure) {
    for (const auto& w : seed.words) seeds.push_back(G.word_perm(w, level));
  } else {
    for (std::size_t i = 0; i < gens.size(); ++i)
      for (std::size_t j = i + 1; j < gens.size(); ++j) seeds.push_back(commutator(gens[i], gens[j]));
  }
  if (Q.is_p_group(G.p())) {
    PcContext ctx(Q, G.p());
    return PcSubgroup::normal_closure(ctx, seeds, gens).to_perm_group();
  }
  return normal_closure_under(gens, PermGroup(Q.degree(), seeds));
}

/// Words whose level-`level` images generate the normal closure of seeds.
inline std::vector<ElementWord> normal_closure_words(const SelfSimilarGroup& G,
                                                     const std::vector<ElementWord>& seeds,
                                                     int level) {
  PermGroup Q = generator_image(G, level);
  PcContext ctx(Q, G.p());
  PcBuilder b(ctx);
  std::vector<ElementWord> out;
  std::vector<ElementWord> queue(seeds.begin(), seeds.end());
  for (std::size_t i = 0; i < queue.size(); ++i) {
    Perm x = G.word_perm(queue[i], level);
    if (!b.add(x)) continue;
    b.close();
    out.push_back(queue[i]);
    for (std::size_t g = 0; g < G.num_generators(); ++g)
      queue.push_back(conjugate_word(queue[i], ElementWord{{static_cast<int>(g), false}}));
  }
  return out;
}

inline std::vector<ElementWord> derived_words(const SelfSimilarGroup& G, int level) {
  std::vector<ElementWord> comms;
  const int n = static_cast<int>(G.num_generators());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      comms.push_back(commutator_word({{i, false}}, {{j, false}}));
  return normal_closure_words(G, comms, level);
}

/// Group generated by copies of the words placed at every vertex of the
/// given depth (the geometric power K^(p^depth) inside the level quotient).
inline PermGroup geometric_power_image(const SelfSimilarGroup& G, const std::vector<ElementWord>& words,
                                       int depth, int level) {
  std::vector<Perm> gens;
  const std::size_t nv = G.params().leaves(depth);
  for (std::size_t v = 0; v < nv; ++v)
    for (const auto& w : words)
      gens.push_back(embed_at_vertex(G, w, Vertex::from_index(v, depth, G.p()), level).perm);
  return PermGroup(G.params().leaves(level), gens);
}

inline GeneratorDef make_generator(std::string name, std::vector<int> root, std::vector<ElementWord> sections) {
  return GeneratorDef{std::move(name), std::move(root), std::move(sections)};
}

enum class BuiltinKind { Grigorchuk, GuptaSidki };

inline SelfSimilarGroup builtin_group(BuiltinKind kind, int p, std::optional<int> max_level = std::nullopt) {
  std::vector<GeneratorDef> gens;
  GroupMetadata meta;
  std::string id;
  auto ident = [](int q) {
    std::vector<int> r(q);
    std::iota(r.begin(), r.end(), 0);
    return r;
  };
  if (kind == BuiltinKind::Grigorchuk) {
    if (p != 2) throw Error(Errc::UnsupportedPrime, "the Grigorchuk group is defined for p = 2");
    // a swaps the two subtrees; b = (a, c), c = (a, d), d = (1, b)
    gens.push_back(make_generator("a", {1, 0}, {{}, {}}));
    gens.push_back(make_generator("b", ident(2), {{{0, false}}, {{2, false}}}));
    gens.push_back(make_generator("c", ident(2), {{{0, false}}, {{3, false}}}));
    gens.push_back(make_generator("d", ident(2), {{}, {{1, false}}}));
    meta.k = 4;
    meta.ell = 6;
    meta.d = 3;
    meta.d_K = 3;
    meta.k_kind = GroupMetadata::KKind::NormalClosure;
    meta.k_seed = {{{0, false}, {1, false}, {0, false}, {1, false}}};
    id = "grigorchuk";
  } else {
    if (p < 3 || !is_prime(p))
      throw Error(Errc::UnsupportedPrime, "Gupta-Sidki groups need an odd prime");
    std::vector<int> cyc(p);
    for (int x = 0; x < p; ++x) cyc[x] = (x + 1) % p;
    gens.push_back(make_generator("a", cyc, std::vector<ElementWord>(p)));
    std::vector<ElementWord> bs(p);
    bs[0] = {{0, false}};
    bs[1] = {{0, true}};
    bs[p - 1] = {{1, false}};
    gens.push_back(make_generator("b", ident(p), bs));
    meta.k = p;
    meta.ell = p * p - 1;
    meta.d = p * (p - 1);
    meta.d_K = p - 1;
    meta.k_kind = GroupMetadata::KKind::Derived;
    id = "gupta_sidki_" + std::to_string(p);
  }
  TreeParams params{p, max_level.value_or(TreeParams::default_max_level(p))};
  return SelfSimilarGroup(params, std::move(gens), std::move(meta), id);
}

inline BuiltinKind parse_builtin_kind(const std::string& s) {
  if (s == "grigorchuk") return BuiltinKind::Grigorchuk;
  if (s == "gupta_sidki" || s == "gupta-sidki") return BuiltinKind::GuptaSidki;
  throw Error(Errc::Usage, "unknown builtin group " + s);
}

}  // namespace pgrowth
