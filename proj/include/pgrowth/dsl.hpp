#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "selfsim.hpp"

namespace pgrowth {

namespace dsl_detail {

struct Line {
  int number;
  std::string text;  // comment stripped
};

struct Cursor {
  const Line& line;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line.number, static_cast<int>(pos) + 1, msg);
  }
  void skip_ws() {
    while (pos < line.text.size() && std::isspace(static_cast<unsigned char>(line.text[pos]))) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= line.text.size();
  }
  bool accept(const std::string& tok) {
    skip_ws();
    if (line.text.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& tok) {
    if (!accept(tok)) fail("expected '" + tok + "'");
  }
  std::string ident() {
    skip_ws();
    std::size_t s = pos;
    if (pos >= line.text.size() || !(std::isalpha(static_cast<unsigned char>(line.text[pos])) || line.text[pos] == '_'))
      fail("expected identifier");
    while (pos < line.text.size() &&
           (std::isalnum(static_cast<unsigned char>(line.text[pos])) || line.text[pos] == '_'))
      ++pos;
    return line.text.substr(s, pos - s);
  }
  long long integer() {
    skip_ws();
    std::size_t s = pos;
    while (pos < line.text.size() && std::isdigit(static_cast<unsigned char>(line.text[pos]))) ++pos;
    if (s == pos) fail("expected integer");
    return std::stoll(line.text.substr(s, pos - s));
  }
  std::string rest() {
    skip_ws();
    std::string r = line.text.substr(pos);
    pos = line.text.size();
    while (!r.empty() && std::isspace(static_cast<unsigned char>(r.back()))) r.pop_back();
    return r;
  }
};

struct PendingGen {
  std::string name;
  std::vector<std::vector<int>> cycles;
  std::vector<std::pair<std::string, std::size_t>> sections;  // text, column offset
  int line = 0;
};

inline std::string format_cycles(const std::vector<int>& perm) {
  std::string out;
  std::vector<char> seen(perm.size(), 0);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i] || perm[i] == static_cast<int>(i)) continue;
    out += '(';
    std::size_t j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = 1;
      if (!first) out += ' ';
      out += std::to_string(j);
      first = false;
      j = perm[j];
    }
    out += ')';
  }
  return out.empty() ? "()" : out;
}

}  // namespace dsl_detail

/// Parses the group-definition language:
///
///   p = 2
///   gen a = perm (0 1) sections [1, 1]
///   gen b = sections [a, c]
///
/// Optional extra lines: `max_level = N`, `id = name`, and `meta KEY = VALUE`
/// with KEY in {k, ell, d, dK, ksubgroup, kseed}.
inline SelfSimilarGroup parse_group_def(const std::string& text,
                                        std::optional<int> max_level_override = std::nullopt) {
  using namespace dsl_detail;
  std::vector<Line> lines;
  {
    std::istringstream in(text);
    std::string raw;
    int n = 0;
    while (std::getline(in, raw)) {
      ++n;
      auto h = raw.find('#');
      if (h != std::string::npos) raw.erase(h);
      lines.push_back({n, raw});
    }
  }
  std::optional<int> p;
  std::optional<int> max_level;
  std::string id = "custom";
  std::vector<PendingGen> pending;
  GroupMetadata meta;
  std::vector<std::pair<std::string, int>> seed_texts;
  for (const auto& L : lines) {
    Cursor c{L};
    if (c.at_end()) continue;
    std::size_t kw_pos = c.pos;
    std::string kw = c.ident();
    if (kw == "p") {
      c.expect("=");
      long long v = c.integer();
      if (!is_prime(v)) throw Error(Errc::UnsupportedPrime, "p = " + std::to_string(v) + " is not prime");
      p = static_cast<int>(v);
    } else if (kw == "max_level") {
      c.expect("=");
      max_level = static_cast<int>(c.integer());
    } else if (kw == "id") {
      c.expect("=");
      id = c.ident();
    } else if (kw == "gen") {
      PendingGen g;
      g.line = L.number;
      g.name = c.ident();
      c.expect("=");
      if (c.accept("perm")) {
        c.expect("(");
        c.pos -= 1;
        while (c.accept("(")) {
          std::vector<int> cyc;
          while (!c.accept(")")) {
            if (c.at_end()) c.fail("unterminated cycle");
            cyc.push_back(static_cast<int>(c.integer()));
          }
          if (!cyc.empty()) g.cycles.push_back(cyc);
        }
      }
      c.expect("sections");
      c.expect("[");
      while (true) {
        c.skip_ws();
        std::size_t s = c.pos;
        while (c.pos < L.text.size() && L.text[c.pos] != ',' && L.text[c.pos] != ']') ++c.pos;
        if (c.pos >= L.text.size()) c.fail("unterminated section list");
        g.sections.emplace_back(L.text.substr(s, c.pos - s), s);
        if (L.text[c.pos++] == ']') break;
      }
      if (!c.at_end()) c.fail("trailing characters");
      pending.push_back(std::move(g));
      continue;
    } else if (kw == "meta") {
      std::string key = c.ident();
      c.expect("=");
      if (key == "k") meta.k = static_cast<int>(c.integer());
      else if (key == "ell") meta.ell = static_cast<int>(c.integer());
      else if (key == "d") meta.d = static_cast<int>(c.integer());
      else if (key == "dK") meta.d_K = static_cast<int>(c.integer());
      else if (key == "ksubgroup") {
        std::string v = c.ident();
        if (v == "normal_closure") meta.k_kind = GroupMetadata::KKind::NormalClosure;
        else if (v == "derived") meta.k_kind = GroupMetadata::KKind::Derived;
        else c.fail("ksubgroup must be normal_closure or derived");
      } else if (key == "kseed") {
        seed_texts.emplace_back(c.rest(), L.number);
      } else {
        c.pos = kw_pos;
        c.fail("unknown meta key '" + key + "'");
      }
    } else {
      c.pos = kw_pos;
      c.fail("unknown statement '" + kw + "'");
    }
    if (!c.at_end()) c.fail("trailing characters");
  }
  if (!p) throw ParseError(1, 1, "missing 'p = <prime>' line");
  std::map<std::string, int> names;
  for (std::size_t i = 0; i < pending.size(); ++i) names.emplace(pending[i].name, static_cast<int>(i));
  std::vector<GeneratorDef> gens;
  for (const auto& g : pending) {
    GeneratorDef def;
    def.name = g.name;
    def.root_perm.resize(*p);
    for (int x = 0; x < *p; ++x) def.root_perm[x] = x;
    std::vector<char> used(*p, 0);
    for (const auto& cyc : g.cycles) {
      for (int x : cyc) {
        if (x < 0 || x >= *p || used[x])
          throw Error(Errc::BadPermutation, "line " + std::to_string(g.line) + ": root permutation of " +
                                                g.name + " is not a bijection of 0.." + std::to_string(*p - 1));
        used[x] = 1;
      }
      for (std::size_t i = 0; i < cyc.size(); ++i) def.root_perm[cyc[i]] = cyc[(i + 1) % cyc.size()];
    }
    if (static_cast<int>(g.sections.size()) != *p)
      throw Error(Errc::ArityMismatch, "line " + std::to_string(g.line) + ": generator " + g.name + " has " +
                                           std::to_string(g.sections.size()) + " sections, expected " +
                                           std::to_string(*p));
    for (const auto& [txt, col] : g.sections) {
      std::size_t bad = 0;
      try {
        def.sections.push_back(parse_word_names(names, txt, &bad));
      } catch (const Error& e) {
        throw Error(Errc::UnknownGenerator, "line " + std::to_string(g.line) + ", column " +
                                                std::to_string(col + bad + 1) + ": " + e.what());
      }
    }
    gens.push_back(std::move(def));
  }
  for (const auto& [txt, line] : seed_texts) {
    try {
      meta.k_seed.push_back(parse_word_names(names, txt));
    } catch (const Error& e) {
      throw Error(Errc::UnknownGenerator, "line " + std::to_string(line) + ": " + e.what());
    }
  }
  TreeParams params{*p, max_level_override.value_or(max_level.value_or(TreeParams::default_max_level(*p)))};
  return SelfSimilarGroup(params, std::move(gens), std::move(meta), id);
}

/// Deterministic rendering in the same grammar (generators in declaration
/// order, root permutation always written out).
inline std::string print_group_def(const SelfSimilarGroup& G) {
  std::ostringstream os;
  os << "p = " << G.p() << "\n";
  for (const auto& g : G.generators()) {
    os << "gen " << g.name << " = perm " << dsl_detail::format_cycles(g.root_perm) << " sections [";
    for (std::size_t i = 0; i < g.sections.size(); ++i) os << (i ? ", " : "") << G.format_word(g.sections[i]);
    os << "]\n";
  }
  const auto& m = G.metadata();
  if (m.k) os << "meta k = " << *m.k << "\n";
  if (m.ell) os << "meta ell = " << *m.ell << "\n";
  if (m.d) os << "meta d = " << *m.d << "\n";
  if (m.d_K) os << "meta dK = " << *m.d_K << "\n";
  if (m.k_kind == GroupMetadata::KKind::NormalClosure) os << "meta ksubgroup = normal_closure\n";
  if (m.k_kind == GroupMetadata::KKind::Derived) os << "meta ksubgroup = derived\n";
  for (const auto& w : m.k_seed) os << "meta kseed = " << G.format_word(w) << "\n";
  return os.str();
}

}  // namespace pgrowth
