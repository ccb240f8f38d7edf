#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "perm.hpp"
#include "permgroup.hpp"

namespace pgrowth {

using FpVec = std::vector<int>;

/// Dense square or rectangular matrix over F_p, row-major.  Row vectors act
/// on the right: v^g = v * A_g.
struct FpMat {
  int rows = 0;
  int cols = 0;
  std::vector<int> a;

  FpMat() = default;
  FpMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0) {}

  static FpMat identity(int n) {
    FpMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  int& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  int operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  FpMat mul(const FpMat& o, int p) const {
    if (cols != o.rows) throw Error(Errc::DegreeMismatch, "matrix shapes differ");
    FpMat r(rows, o.cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) {
        int x = (*this)(i, k);
        if (!x) continue;
        for (int j = 0; j < o.cols; ++j) r(i, j) = (r(i, j) + x * o(k, j)) % p;
      }
    return r;
  }

  std::string to_string() const {
    std::string s;
    for (int i = 0; i < rows; ++i) {
      if (i) s += '/';
      for (int j = 0; j < cols; ++j) s += static_cast<char>('0' + (*this)(i, j));
    }
    return s;
  }

  friend bool operator==(const FpMat&, const FpMat&) = default;
};

inline int fp_norm(long long x, int p) {
  x %= p;
  return static_cast<int>(x < 0 ? x + p : x);
}

inline FpVec vec_mul(const FpVec& v, const FpMat& A, int p) {
  FpVec r(A.cols, 0);
  for (int k = 0; k < A.rows; ++k) {
    if (!v[k]) continue;
    for (int j = 0; j < A.cols; ++j) r[j] = (r[j] + v[k] * A(k, j)) % p;
  }
  return r;
}

inline FpVec vec_axpy(const FpVec& x, int a, const FpVec& y, int b, int p) {
  FpVec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = fp_norm(static_cast<long long>(a) * x[i] + b * y[i], p);
  return r;
}

inline bool is_zero(const FpVec& v) {
  return std::all_of(v.begin(), v.end(), [](int x) { return x == 0; });
}

/// Reduced row echelon basis of the span of rows.
inline std::vector<FpVec> echelon(std::vector<FpVec> rows, int p) {
  std::vector<FpVec> out;
  if (rows.empty()) return out;
  const int n = static_cast<int>(rows.front().size());
  int r = 0;
  for (int c = 0; c < n && r < static_cast<int>(rows.size()); ++c) {
    int piv = -1;
    for (int i = r; i < static_cast<int>(rows.size()); ++i)
      if (rows[i][c]) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[r], rows[piv]);
    int inv = static_cast<int>(mod_inverse(rows[r][c], p));
    for (auto& x : rows[r]) x = x * inv % p;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      if (i == r || !rows[i][c]) continue;
      int f = rows[i][c];
      for (int j = 0; j < n; ++j) rows[i][j] = fp_norm(rows[i][j] - f * rows[r][j], p);
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

inline int rank(const std::vector<FpVec>& rows, int p) { return static_cast<int>(echelon(rows, p).size()); }

/// Reduce v against an echelon basis; zero iff v is in the span.
inline FpVec reduce_against(FpVec v, const std::vector<FpVec>& basis, int p) {
  for (const auto& b : basis) {
    int c = 0;
    while (!b[c]) ++c;
    if (v[c]) {
      int f = v[c];
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = fp_norm(v[j] - f * b[j], p);
    }
  }
  return v;
}

inline bool same_span(const std::vector<FpVec>& a, const std::vector<FpVec>& b, int p) {
  return echelon(a, p) == echelon(b, p);
}

inline bool invertible(const FpMat& A, int p) {
  if (A.rows != A.cols) return false;
  std::vector<FpVec> rows(A.rows);
  for (int i = 0; i < A.rows; ++i) rows[i].assign(A.a.begin() + i * A.cols, A.a.begin() + (i + 1) * A.cols);
  return rank(rows, p) == A.rows;
}

/// Finite-dimensional F_pG-module given by one matrix per group generator.
struct FpGModule {
  int p = 2;
  int dim = 0;
  std::vector<FpMat> action;
  std::vector<Perm> group_gens;  // optional; same order as action

  FpVec act(const FpVec& v, std::size_t g) const { return vec_mul(v, action[g], p); }

  /// Invertibility and, when generators are known, A^{ord g} = 1.
  bool valid() const {
    for (std::size_t i = 0; i < action.size(); ++i) {
      const auto& A = action[i];
      if (A.rows != dim || A.cols != dim || !invertible(A, p)) return false;
      if (i < group_gens.size()) {
        FpMat P = FpMat::identity(dim);
        for (std::size_t k = 0; k < group_gens[i].order(); ++k) P = P.mul(A, p);
        if (!(P == FpMat::identity(dim))) return false;
      }
    }
    return true;
  }
};

inline FpMat permutation_matrix(const Perm& g) {
  int n = static_cast<int>(g.degree());
  FpMat A(n, n);
  for (int x = 0; x < n; ++x) A(x, g[x]) = 1;
  return A;
}

inline FpGModule permutation_module(const std::vector<Perm>& gens, std::size_t degree, int p) {
  FpGModule M;
  M.p = p;
  M.dim = static_cast<int>(degree);
  for (const auto& g : gens) {
    M.action.push_back(permutation_matrix(g));
    M.group_gens.push_back(g);
  }
  return M;
}

inline FpGModule permutation_module(const PermGroup& Q, int p) {
  return permutation_module(Q.generators(), Q.degree(), p);
}

inline FpGModule direct_sum(const FpGModule& A, const FpGModule& B) {
  if (A.p != B.p || A.action.size() != B.action.size())
    throw Error(Errc::DegreeMismatch, "modules over different groups");
  FpGModule M;
  M.p = A.p;
  M.dim = A.dim + B.dim;
  M.group_gens = A.group_gens;
  for (std::size_t g = 0; g < A.action.size(); ++g) {
    FpMat S(M.dim, M.dim);
    for (int i = 0; i < A.dim; ++i)
      for (int j = 0; j < A.dim; ++j) S(i, j) = A.action[g](i, j);
    for (int i = 0; i < B.dim; ++i)
      for (int j = 0; j < B.dim; ++j) S(A.dim + i, A.dim + j) = B.action[g](i, j);
    M.action.push_back(std::move(S));
  }
  return M;
}

/// Echelon basis of the smallest invariant subspace containing vectors.
inline std::vector<FpVec> submodule_span(const FpGModule& M, const std::vector<FpVec>& vectors) {
  std::vector<FpVec> basis;
  std::vector<FpVec> queue;
  auto add = [&](const FpVec& v) {
    FpVec r = reduce_against(v, basis, M.p);
    if (is_zero(r)) return;
    basis = echelon([&] {
      auto b = basis;
      b.push_back(r);
      return b;
    }(), M.p);
    queue.push_back(v);
  };
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != M.dim) throw Error(Errc::DegreeMismatch, "vector length differs from module dimension");
    add(v);
  }
  while (!queue.empty()) {
    FpVec v = queue.back();
    queue.pop_back();
    for (std::size_t g = 0; g < M.action.size(); ++g) add(M.act(v, g));
  }
  return basis;
}

/// Functional to the trivial one-dimensional module.
struct ModuleHom {
  FpVec row;

  int operator()(const FpVec& v, int p) const {
    long long s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<long long>(row[i]) * v[i];
    return fp_norm(s, p);
  }

  /// phi(v^g) = phi(v) for every generator: A_g phi^T = phi^T.
  bool is_invariant(const FpGModule& M) const {
    for (const auto& A : M.action)
      for (int i = 0; i < M.dim; ++i) {
        long long s = 0;
        for (int j = 0; j < M.dim; ++j) s += static_cast<long long>(A(i, j)) * row[j];
        if (fp_norm(s, M.p) != row[i]) return false;
      }
    return true;
  }
};

/// Basis of ker phi, computed directly from the row.
inline std::vector<FpVec> kernel_basis(const ModuleHom& phi, int dim, int p) {
  int c = -1;
  for (int i = 0; i < dim; ++i)
    if (phi.row[i]) {
      c = i;
      break;
    }
  std::vector<FpVec> out;
  for (int i = 0; i < dim; ++i) {
    if (i == c) continue;
    FpVec v(dim, 0);
    v[i] = 1;
    if (c >= 0) v[c] = fp_norm(-static_cast<long long>(phi.row[i]) * mod_inverse(phi.row[c], p), p);
    out.push_back(std::move(v));
  }
  return out;
}

struct Codim1Result {
  std::vector<FpVec> generators;
  std::size_t first = 0;  // index of the module generator used as v_1
};

/// Module generators of ker phi: v1 - v1^{g_i} for each group generator and
/// phi(v_i) v1 - phi(v1) v_i for the other module generators.
inline Codim1Result codim1_generators(const FpGModule& M, const std::vector<FpVec>& vs, const ModuleHom& phi) {
  const int p = M.p;
  if (static_cast<int>(submodule_span(M, vs).size()) != M.dim)
    throw Error(Errc::NotGenerating, "vectors do not generate the module");
  if (!phi.is_invariant(M)) throw Error(Errc::NotGenerating, "functional is not a module homomorphism");
  std::size_t first = vs.size();
  for (std::size_t i = 0; i < vs.size(); ++i)
    if (phi(vs[i], p)) {
      first = i;
      break;
    }
  if (first == vs.size()) throw Error(Errc::PhiVanishesOnGenerators, "phi is zero on every generator");
  Codim1Result R;
  R.first = first;
  const FpVec& v1 = vs[first];
  const int a1 = phi(v1, p);
  for (std::size_t g = 0; g < M.action.size(); ++g) R.generators.push_back(vec_axpy(v1, 1, M.act(v1, g), -1, p));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i == first) continue;
    R.generators.push_back(vec_axpy(v1, phi(vs[i], p), vs[i], -a1, p));
  }
  return R;
}

struct ModgenInstance {
  FpGModule module;
  std::vector<FpVec> gens;
  ModuleHom phi;
  BigInt group_order = 0;
};

struct ModgenCheck {
  int d = 0;
  int m = 0;
  std::size_t output_size = 0;
  bool in_kernel = false;
  bool span_ok = false;
  bool bound_ok = false;
  bool pass() const { return in_kernel && span_ok && bound_ok; }
};

inline ModgenCheck check_modgen(const ModgenInstance& I) {
  const auto& M = I.module;
  ModgenCheck C;
  C.d = static_cast<int>(I.gens.size());
  C.m = static_cast<int>(M.action.size());
  auto R = codim1_generators(M, I.gens, I.phi);
  C.output_size = R.generators.size();
  C.in_kernel = std::all_of(R.generators.begin(), R.generators.end(),
                            [&](const FpVec& v) { return I.phi(v, M.p) == 0; });
  C.span_ok = same_span(submodule_span(M, R.generators), kernel_basis(I.phi, M.dim, M.p), M.p);
  C.bound_ok = static_cast<int>(C.output_size) <= C.d + C.m - 1;
  return C;
}

/// Generators of a Sylow p-subgroup of Sym(p^k): one p-cycle of blocks per level.
inline std::vector<Perm> iterated_wreath_generators(int p, int k) {
  std::size_t n = upow(p, k);
  std::vector<Perm> gens;
  for (int j = 0; j < k; ++j) {
    std::size_t block = upow(p, k - 1 - j);
    std::vector<Point> img(n);
    for (std::size_t x = 0; x < n; ++x) img[x] = static_cast<Point>(x);
    for (std::size_t x = 0; x < block * p; ++x) img[x] = static_cast<Point>((x + block) % (block * p));
    gens.push_back(Perm::from_images_unchecked(std::move(img)));
  }
  return gens;
}

/// Random p-group of order at most max_order acting on p^k points, with a
/// module that is the permutation module, optionally plus the module on the
/// first block system.
inline ModgenInstance random_modgen_instance(int p, std::mt19937_64& rng, int max_dim = 12,
                                             long long max_order = 64) {
  int k = 1;
  while (static_cast<int>(upow(p, k + 1)) <= max_dim) ++k;
  const std::size_t n = upow(p, k);
  PermGroup S(n, iterated_wreath_generators(p, k));
  std::vector<Perm> gens;
  PermGroup G = PermGroup::trivial(n);
  std::uniform_int_distribution<int> ng(1, 3);
  for (int tries = 0; tries < 100; ++tries) {
    gens.clear();
    int c = ng(rng);
    for (int i = 0; i < c; ++i) gens.push_back(S.random_element(rng));
    G = PermGroup(n, gens);
    if (G.order() <= max_order && !G.is_trivial()) break;
  }
  gens = G.generators();
  FpGModule M = permutation_module(gens, n, p);
  std::size_t blocks = n / p;
  if (static_cast<int>(n + blocks) <= max_dim && (rng() & 1)) {
    std::vector<Perm> bg;
    for (const auto& g : gens) {
      std::vector<Point> img(blocks);
      for (std::size_t b = 0; b < blocks; ++b) img[b] = static_cast<Point>(g[b * p] / p);
      bg.push_back(Perm::from_images_unchecked(std::move(img)));
    }
    M = direct_sum(M, permutation_module(bg, blocks, p));
  }
  // Invariant functionals are constant on each orbit of every summand.
  ModgenInstance I;
  I.group_order = G.order();
  std::uniform_int_distribution<int> coef(0, p - 1);
  std::vector<int> orbit_of(M.dim);
  {
    std::vector<int> parent(M.dim);
    for (int i = 0; i < M.dim; ++i) parent[i] = i;
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& A : M.action)
      for (int i = 0; i < M.dim; ++i)
        for (int j = 0; j < M.dim; ++j)
          if (A(i, j)) parent[find(i)] = find(j);
    for (int i = 0; i < M.dim; ++i) orbit_of[i] = find(i);
  }
  I.phi.row.assign(M.dim, 0);
  while (is_zero(I.phi.row)) {
    std::vector<int> val(M.dim);
    for (auto& v : val) v = coef(rng);
    for (int i = 0; i < M.dim; ++i) I.phi.row[i] = val[orbit_of[i]];
  }
  std::uniform_int_distribution<int> nd(1, 4);
  int d = nd(rng);
  for (int i = 0; i < d; ++i) {
    FpVec v(M.dim);
    for (auto& x : v) x = coef(rng);
    I.gens.push_back(std::move(v));
  }
  // Top up with basis vectors until the vectors generate and phi is nonzero on one.
  for (int i = 0; static_cast<int>(submodule_span(M, I.gens).size()) < M.dim; ++i) {
    FpVec e(M.dim, 0);
    e[i % M.dim] = 1;
    I.gens.push_back(std::move(e));
  }
  if (std::none_of(I.gens.begin(), I.gens.end(), [&](const FpVec& v) { return I.phi(v, p) != 0; })) {
    for (int i = 0; i < M.dim; ++i)
      if (I.phi.row[i]) {
        FpVec e(M.dim, 0);
        e[i] = 1;
        I.gens.push_back(std::move(e));
        break;
      }
  }
  I.module = std::move(M);
  return I;
}

/// F_p wr Q acting imprimitively on degree(Q) blocks of size p.  Point
/// (x, i) is x*p + i.
struct WreathQuotient {
  int p = 2;
  PermGroup top;
  PermGroup whole;
  std::size_t base_dim = 0;

  Perm lift(const Perm& g) const {
    std::vector<Point> img(base_dim * p);
    for (std::size_t x = 0; x < base_dim; ++x)
      for (int i = 0; i < p; ++i) img[x * p + i] = static_cast<Point>(g[x] * p + i);
    return Perm::from_images_unchecked(std::move(img));
  }

  Perm base_element(const FpVec& f) const {
    std::vector<Point> img(base_dim * p);
    for (std::size_t x = 0; x < base_dim; ++x)
      for (int i = 0; i < p; ++i) img[x * p + i] = static_cast<Point>(x * p + (i + f[x]) % p);
    return Perm::from_images_unchecked(std::move(img));
  }

  Perm project(const Perm& w) const {
    std::vector<Point> img(base_dim);
    for (std::size_t x = 0; x < base_dim; ++x) img[x] = static_cast<Point>(w[x * p] / p);
    return Perm::from_images_unchecked(std::move(img));
  }

  /// Shift applied on block x: w maps (x, 0) to (x^pi(w), f(x)).
  FpVec base_part(const Perm& w) const {
    FpVec f(base_dim);
    for (std::size_t x = 0; x < base_dim; ++x) f[x] = w[x * p] % p;
    return f;
  }

  PermGroup preimage(const PermGroup& U) const {
    std::vector<Perm> gens;
    for (std::size_t x = 0; x < base_dim; ++x) {
      FpVec e(base_dim, 0);
      e[x] = 1;
      gens.push_back(base_element(e));
    }
    for (const auto& g : U.generators()) gens.push_back(lift(g));
    return PermGroup(base_dim * p, gens);
  }
};

inline WreathQuotient wreath_quotient(const PermGroup& Q, int p) {
  if (Q.degree() * p > 65535) throw Error(Errc::CapExceeded, "wreath degree exceeds 65535");
  WreathQuotient W;
  W.p = p;
  W.top = Q;
  W.base_dim = Q.degree();
  W.whole = W.preimage(Q);
  return W;
}

struct SandwichCheck {
  int n = 0;             // index exponent of U in the top group
  int orbits = 0;        // N
  bool homomorphism = false;
  bool surjective = false;
  int dp_preimage = -1;  // exact d_p of the preimage
  int upper = -1;        // N + n * max dp, level-relative
  int upper_proof = -1;  // N + n * (max dp - 1) + max dp: keeps the d(pi(U)) lifts
  bool lower_ok() const { return homomorphism && surjective && dp_preimage >= orbits; }
  bool upper_ok() const { return dp_preimage <= upper; }
  bool upper_proof_ok() const { return dp_preimage <= upper_proof; }
  bool pass() const { return lower_ok() && upper_ok(); }
};

/// phi_i(w) = sum of the base part of w over orbit i of U.  Checks the
/// homomorphism identity on generator pairs of the preimage, surjectivity,
/// and the d_p sandwich.  max_dp is max_{m<=n} dp_max(m) of the top group at
/// the same level; pass a negative value to skip the upper bound.
inline SandwichCheck phi_orbit_surjection(const WreathQuotient& W, const PermGroup& U, int index_exp,
                                          int max_dp = -1) {
  const int p = W.p;
  SandwichCheck C;
  C.n = index_exp;
  Partition part = orbit_partition(U.generators(), W.base_dim);
  C.orbits = part.count;
  auto phi = [&](const Perm& w) {
    FpVec f = W.base_part(w);
    FpVec r(C.orbits, 0);
    for (std::size_t x = 0; x < W.base_dim; ++x) r[part.cell[x]] = (r[part.cell[x]] + f[x]) % p;
    return r;
  };
  PermGroup H = W.preimage(U);
  const auto& gens = H.generators();
  C.homomorphism = true;
  std::vector<FpVec> images;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    images.push_back(phi(gens[i]));
    for (std::size_t j = 0; j < gens.size(); ++j) {
      FpVec lhs = phi(gens[i] * gens[j]);
      FpVec rhs = vec_axpy(phi(gens[i]), 1, phi(gens[j]), 1, p);
      if (lhs != rhs) C.homomorphism = false;
    }
  }
  C.surjective = rank(images, p) == C.orbits;
  C.dp_preimage = dp(H, p);
  if (max_dp >= 0) {
    C.upper = C.orbits + C.n * max_dp;
    C.upper_proof = C.orbits + C.n * (max_dp - 1) + max_dp;
  } else {
    C.upper = C.upper_proof = C.dp_preimage;
  }
  return C;
}

}  // namespace pgrowth
