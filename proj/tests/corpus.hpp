#pragma once

// Shared fixtures: a corpus of small p-groups and random trees/subgroups.

#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <pgrowth/modgen.hpp>
#include <pgrowth/selfsim.hpp>
#include <pgrowth/subtree.hpp>

namespace pgrowth::fixtures {

struct CorpusGroup {
  std::string name;
  int p;
  std::size_t degree;
  std::vector<Perm> gens;
};

// keeps parameterised test names readable
inline void PrintTo(const CorpusGroup& c, std::ostream* os) { *os << c.name; }

inline Perm cyc(std::size_t n, std::vector<std::vector<int>> c) { return Perm::from_cycles(n, c); }

inline std::vector<CorpusGroup> corpus() {
  auto grig = builtin_group(BuiltinKind::Grigorchuk, 2);
  auto gs = builtin_group(BuiltinKind::GuptaSidki, 3);
  return {
      {"grigorchuk_l2", 2, 4, grig.generator_perms(2)},
      {"grigorchuk_l3", 2, 8, grig.generator_perms(3)},
      {"c2", 2, 2, {cyc(2, {{0, 1}})}},
      {"c4", 2, 4, {cyc(4, {{0, 1, 2, 3}})}},
      {"klein", 2, 4, {cyc(4, {{0, 1}, {2, 3}}), cyc(4, {{0, 2}, {1, 3}})}},
      {"c2_cubed", 2, 6, {cyc(6, {{0, 1}}), cyc(6, {{2, 3}}), cyc(6, {{4, 5}})}},
      {"quaternion", 2, 8, {cyc(8, {{0, 1, 2, 3}, {4, 5, 6, 7}}), cyc(8, {{0, 4, 2, 6}, {1, 7, 3, 5}})}},
      {"c8", 2, 8, {cyc(8, {{0, 1, 2, 3, 4, 5, 6, 7}})}},
      {"c4_c2", 2, 6, {cyc(6, {{0, 1, 2, 3}}), cyc(6, {{4, 5}})}},
      {"c2_fourth", 2, 8, {cyc(8, {{0, 1}}), cyc(8, {{2, 3}}), cyc(8, {{4, 5}}), cyc(8, {{6, 7}})}},
      {"c2_wr_c2_wr_c2", 2, 8, iterated_wreath_generators(2, 3)},
      {"c3_c3", 3, 6, {cyc(6, {{0, 1, 2}}), cyc(6, {{3, 4, 5}})}},
      {"c9", 3, 9, {cyc(9, {{0, 1, 2, 3, 4, 5, 6, 7, 8}})}},
      {"gupta_sidki3_l2", 3, 9, gs.generator_perms(2)},
  };
}

inline std::shared_ptr<const PermGroup> make_group(const CorpusGroup& c) {
  return std::make_shared<const PermGroup>(c.degree, c.gens);
}

inline ColouredSubtree random_tree(int p, int L, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nv(1, 4), lv(0, L);
  std::vector<Vertex> vs;
  int k = nv(rng);
  for (int i = 0; i < k; ++i) {
    int l = lv(rng);
    std::uniform_int_distribution<std::size_t> idx(0, upow(p, l) - 1);
    vs.push_back(Vertex::from_index(idx(rng), l, p));
  }
  return ColouredSubtree::from_vertices(p, vs);
}

inline PermGroup random_subgroup(const PermGroup& Q, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ng(0, 2);
  std::vector<Perm> gens;
  int k = ng(rng);
  for (int i = 0; i < k; ++i) gens.push_back(Q.random_element(rng));
  return PermGroup(Q.degree(), gens);
}

}  // namespace pgrowth::fixtures
