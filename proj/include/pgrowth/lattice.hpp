#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "keystore.hpp"
#include "numeric.hpp"
#include "pc.hpp"
#include "permgroup.hpp"
#include "selfsim.hpp"

namespace pgrowth {

enum class EnumMode { Exact, Conjugacy };

inline const char* mode_name(EnumMode m) { return m == EnumMode::Exact ? "exact" : "conjugacy"; }

inline EnumMode parse_mode(const std::string& s) {
  if (s == "exact") return EnumMode::Exact;
  if (s == "conjugacy") return EnumMode::Conjugacy;
  throw Error(Errc::Usage, "mode must be exact or conjugacy, got '" + s + "'");
}

struct EnumerationJob {
  std::shared_ptr<const PermGroup> group;
  int p = 2;
  int max_m = 0;
  EnumMode mode = EnumMode::Exact;
  std::size_t memory_budget = std::size_t(4) << 30;
  int parallelism = 1;
  // Spill files go here; empty means a fresh directory under the system temp dir.
  std::string spill_dir;
  std::size_t disk_budget = 0;  // 0: 8 * memory_budget
  double time_budget_s = 0;     // 0: unlimited
  // Conjugating elements for conjugacy mode; empty means the group's generators.
  std::vector<Perm> conjugators;
  // Resume an interrupted run from this token file.
  std::string resume_token;
};

struct SubgroupRecord {
  int m = 0;
  int size_exp = 0;
  int dp = 0;
  int orbit_count = 0;
  int normalizer_index_exp = 0;  // class size exponent; 0 in exact mode
  SubgroupKey canonical_key;
  std::vector<Perm> generators;  // induced pcgs

  PermGroup group(std::size_t degree) const { return PermGroup(degree, generators); }
  SubgroupHandle handle(std::shared_ptr<const PermGroup> parent) const {
    PermGroup g(parent->degree(), generators);
    return SubgroupHandle{std::move(parent), std::move(g), m};
  }
};

struct LevelSummary {
  int m = 0;
  BigInt count = 0;          // exact number of subgroups of index p^m
  std::uint64_t classes = 0; // records emitted (classes in conjugacy mode)
  int dp_max = -1;
  int o_max = -1;
  SubgroupKey dp_witness;
  SubgroupKey o_witness;
  bool has_trivial = false;
};

struct BudgetStats {
  std::size_t peak_bytes = 0;
  std::size_t spilled_bytes = 0;
  std::size_t spill_runs = 0;
  std::size_t cache_hits = 0;
  std::size_t orbit_computations = 0;
  double seconds = 0;
};

struct EnumerationSummary {
  std::vector<LevelSummary> levels;  // index m
  int complete_to = -1;              // largest m with a finished level
  BudgetStats budget;
};

/// Thrown when the memory, disk or time budget runs out.  Levels up to
/// complete_to were fully reported; resume_token names a file that lets a
/// later run continue with the next level.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, EnumerationSummary partial, std::string token)
      : Error(Errc::BudgetExceeded, what), partial_(std::move(partial)), token_(std::move(token)) {}
  const EnumerationSummary& partial() const { return partial_; }
  const std::string& resume_token() const { return token_; }

 private:
  EnumerationSummary partial_;
  std::string token_;
};

namespace lattice_detail {

inline std::string hex(std::string_view s) {
  static const char* d = "0123456789abcdef";
  std::string out;
  for (unsigned char c : s) {
    out += d[c >> 4];
    out += d[c & 15];
  }
  return out;
}

inline std::string unhex(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i + 1 < s.size(); i += 2) out += static_cast<char>(std::stoi(s.substr(i, 2), nullptr, 16));
  return out;
}

inline std::string group_fingerprint(const PermGroup& G, int p, EnumMode mode) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& g : G.generators())
    for (Point x : g.images()) h = (h ^ x) * 1099511628211ull;
  std::ostringstream os;
  os << G.degree() << ':' << G.order().str() << ':' << std::hex << h << ':' << p << ':' << mode_name(mode);
  return os.str();
}

/// Projective points of F_p^d, each normalized so its first nonzero entry is 1.
class Projective {
 public:
  Projective(int p, int d) : p_(p), d_(d) {
    std::uint64_t total = upow(p, d);
    if (total > (std::uint64_t(1) << 24)) throw Error(Errc::CapExceeded, "Frattini quotient too large");
    id_.assign(total, -1);
    std::vector<int> v(d, 0);
    for (std::uint64_t code = 1; code < total; ++code) {
      decode(code, v);
      int first = 0;
      while (v[first] == 0) ++first;
      if (v[first] != 1) continue;
      id_[code] = static_cast<std::int32_t>(points_.size());
      points_.push_back(code);
    }
  }

  std::size_t size() const { return points_.size(); }
  std::vector<int> vec(std::size_t i) const {
    std::vector<int> v(d_);
    decode(points_[i], v);
    return v;
  }

  std::size_t id_of(std::vector<int> v) const {
    int first = 0;
    while (v[first] == 0) ++first;
    int s = static_cast<int>(mod_inverse(v[first], p_));
    std::uint64_t code = 0;
    for (int x : v) code = code * p_ + static_cast<std::uint64_t>(x * s % p_);
    return static_cast<std::size_t>(id_[code]);
  }

 private:
  void decode(std::uint64_t code, std::vector<int>& v) const {
    for (int i = d_ - 1; i >= 0; --i) {
      v[i] = static_cast<int>(code % p_);
      code /= p_;
    }
  }
  int p_, d_;
  std::vector<std::int32_t> id_;
  std::vector<std::uint64_t> points_;
};

/// Frattini data of a subgroup U: Phi(U), the quotient basis b_i and a
/// builder adapted to Phi (its first elements span Phi).
struct FrattiniData {
  PcSubgroup phi;
  std::vector<int> b_depths;
  std::vector<Perm> b;
  std::unique_ptr<PcBuilder> builder;

  int dp() const { return static_cast<int>(b.size()); }

  std::vector<int> coords(const Perm& x, int p) const {
    auto e = builder->coordinates(x);
    std::vector<int> c(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) c[i] = e[b_depths[i]] % p;
    return c;
  }
};

inline FrattiniData frattini_data(const PcSubgroup& U) {
  FrattiniData F;
  F.phi = U.frattini();
  std::vector<char> in_phi(U.context().length(), 0);
  for (int d : F.phi.depths()) in_phi[d] = 1;
  // Canonical elements of U at depths outside Phi complete Phi's sequence
  // to an induced sequence of U.
  for (std::size_t i = 0; i < U.depths().size(); ++i)
    if (!in_phi[U.depths()[i]]) {
      F.b_depths.push_back(U.depths()[i]);
      F.b.push_back(U.elements()[i]);
    }
  F.builder = std::make_unique<PcBuilder>(U.context());
  std::vector<int> ds = F.phi.depths();
  std::vector<Perm> es = F.phi.elements();
  ds.insert(ds.end(), F.b_depths.begin(), F.b_depths.end());
  es.insert(es.end(), F.b.begin(), F.b.end());
  F.builder->seed(ds, es);
  return F;
}

/// The maximal subgroup of U that is the kernel of the functional c on U/Phi.
inline PcSubgroup hyperplane_child(const PcSubgroup& U, const FrattiniData& F, const std::vector<int>& c) {
  const int p = U.context().prime();
  int q = 0;
  while (c[q] == 0) ++q;
  int cq_inv = static_cast<int>(mod_inverse(c[q], p));
  PcBuilder B = F.phi.builder();
  for (std::size_t i = 0; i < F.b.size(); ++i) {
    if (static_cast<int>(i) == q) continue;
    int e = (p - c[i] * cq_inv % p) % p;
    B.add(e ? F.b[i] * F.b[q].pow(e) : F.b[i]);
  }
  B.close(U.size_exp() - 1);
  return B.result();
}

struct ClassData {
  SubgroupKey min_key;
  int size_exp = 0;
  std::vector<SubgroupKey> members;
  std::vector<Perm> schreier;
};

/// Conjugacy class of U under the group generated by conj.
inline ClassData conjugacy_class(const PcSubgroup& U, const std::vector<Perm>& conj, bool want_schreier) {
  const int p = U.context().prime();
  ClassData C;
  KeySet seen;
  std::vector<PcSubgroup> members{U};
  std::vector<Perm> trans{Perm(U.context().degree())};
  seen.insert(U.key(), 0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (const auto& g : conj) {
      PcSubgroup V = members[i].conjugate(g);
      auto hit = seen.find(V.key());
      if (!hit) {
        seen.insert(V.key(), static_cast<std::uint32_t>(members.size()));
        if (want_schreier) trans.push_back(trans[i] * g);
        members.push_back(std::move(V));
      } else if (want_schreier) {
        Perm s = trans[i] * g * trans[*hit].inverse();
        if (!s.is_identity()) C.schreier.push_back(std::move(s));
      }
    }
  }
  auto e = log_exact(BigInt(members.size()), p);
  if (!e) throw Error(Errc::NotAPGroup, "conjugacy class size is not a power of p");
  C.size_exp = *e;
  for (auto& M : members) C.members.push_back(M.key());
  std::sort(C.members.begin(), C.members.end());
  C.min_key = C.members.front();
  return C;
}

}  // namespace lattice_detail

/// Enumerates subgroups of a finite p-group by breadth-first maximal
/// subgroup descent.  Records reach the visitor sorted by (m, key) for
/// every worker count.
class SubgroupEnumerator {
 public:
  using Visitor = std::function<void(const SubgroupRecord&)>;
  using LevelHook = std::function<void(const LevelSummary&)>;

  explicit SubgroupEnumerator(EnumerationJob job) : job_(std::move(job)) {
    if (!job_.group) throw Error(Errc::Usage, "enumeration job without group");
    if (job_.max_m < 0) throw Error(Errc::Usage, "max_m must be non-negative");
    if (job_.memory_budget == 0) throw Error(Errc::Usage, "memory budget must be positive");
    if (!job_.group->is_p_group(job_.p)) throw Error(Errc::NotAPGroup, "group order is not a power of p");
    if (job_.parallelism < 1) job_.parallelism = 1;
    if (job_.disk_budget == 0) job_.disk_budget = job_.memory_budget * 8;
    if (job_.conjugators.empty()) job_.conjugators = job_.group->generators();
    ctx_ = std::make_unique<PcContext>(*job_.group, job_.p);
  }

  const PcContext& context() const { return *ctx_; }

  EnumerationSummary run(const Visitor& visit, const LevelHook& on_level = nullptr) {
    using namespace lattice_detail;
    auto t0 = std::chrono::steady_clock::now();
    summary_ = EnumerationSummary{};
    std::vector<std::string> frontier;
    std::optional<std::filesystem::path> frontier_file;
    int start_m = 0;
    if (!job_.resume_token.empty()) {
      start_m = load_token(job_.resume_token, frontier_file);
    } else {
      frontier.push_back(PcSubgroup::whole(*ctx_).key());
    }
    const int r = ctx_->length();
    for (int m = start_m; m <= job_.max_m && m <= r; ++m) {
      const bool last = (m == job_.max_m || m == r);
      LevelSummary L;
      L.m = m;
      next_.clear();
      class_keys_.clear();
      class_key_bytes_ = 0;
      cache_.clear();
      cache_full_ = false;
      runs_.clear();
      std::unique_ptr<KeyReader> reader;
      if (frontier_file) reader = std::make_unique<KeyReader>(*frontier_file);
      std::size_t pos = 0;
      const std::size_t batch = 64 * static_cast<std::size_t>(job_.parallelism);
      while (true) {
        std::vector<std::string> keys;
        if (reader) {
          std::string k;
          while (keys.size() < batch && reader->next(k)) keys.push_back(k);
        } else {
          while (keys.size() < batch && pos < frontier.size()) keys.push_back(frontier[pos++]);
        }
        if (keys.empty()) break;
        auto outs = process_batch(keys, m, !last);
        for (auto& o : outs) {
          absorb(L, o.rec);
          visit(o.rec);
          for (std::size_t i = 0; i < o.children.size(); ++i) {
            if (next_.insert(o.children[i])) {
              if (job_.mode == EnumMode::Conjugacy && !o.members[i].empty()) remember_class(o.children[i], o.members[i]);
            }
          }
          check_budget(m, frontier, frontier_file, t0);
        }
      }
      reader.reset();
      summary_.levels.push_back(L);
      summary_.complete_to = m;
      if (on_level) on_level(L);
      if (last) break;
      // Assemble the next frontier.
      frontier.clear();
      if (frontier_file) std::filesystem::remove(*frontier_file);
      frontier_file.reset();
      if (runs_.empty() && next_.bytes() <= job_.memory_budget / 2) {
        for (auto k : next_.sorted()) frontier.emplace_back(k);
      } else {
        spill();
        auto out = spill_path("frontier_" + std::to_string(m + 1));
        merge_key_files(runs_, out);
        for (auto& f : runs_) std::filesystem::remove(f);
        runs_.clear();
        frontier_file = out;
      }
      next_.clear();
      cache_.clear();
      class_keys_.clear();
      class_key_bytes_ = 0;
    }
    if (frontier_file) std::filesystem::remove(*frontier_file);
    summary_.budget.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cleanup_dir();
    return summary_;
  }

 private:
  struct NodeOut {
    SubgroupRecord rec;
    std::vector<SubgroupKey> children;
    std::vector<std::vector<SubgroupKey>> members;
    std::size_t cache_hits = 0;
    std::size_t orbits = 0;
  };

  std::vector<NodeOut> process_batch(const std::vector<std::string>& keys, int m, bool expand) {
    std::vector<NodeOut> outs(keys.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= keys.size()) break;
        try {
          outs[i] = process_node(keys[i], m, expand);
        } catch (...) {
          std::lock_guard<std::mutex> g(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    };
    int nt = std::min<int>(job_.parallelism, static_cast<int>(keys.size()));
    if (nt <= 1) {
      work();
    } else {
      std::vector<std::thread> ts;
      for (int t = 0; t < nt; ++t) ts.emplace_back(work);
      for (auto& t : ts) t.join();
    }
    if (err) std::rethrow_exception(err);
    for (auto& o : outs) {
      summary_.budget.cache_hits += o.cache_hits;
      summary_.budget.orbit_computations += o.orbits;
    }
    return outs;
  }

  NodeOut process_node(const std::string& key, int m, bool expand) const {
    using namespace lattice_detail;
    const int p = job_.p;
    NodeOut out;
    PcSubgroup U = PcSubgroup::from_key(*ctx_, key);
    FrattiniData F = frattini_data(U);
    SubgroupRecord& R = out.rec;
    R.m = m;
    R.size_exp = U.size_exp();
    R.dp = F.dp();
    R.orbit_count = orbit_partition(U.elements(), ctx_->degree()).count;
    R.canonical_key = key;
    R.generators = U.elements();
    if (job_.mode == EnumMode::Exact) {
      if (expand && R.dp > 0) {
        Projective proj(p, R.dp);
        for (std::size_t i = 0; i < proj.size(); ++i) out.children.push_back(hyperplane_child(U, F, proj.vec(i)).key());
      }
      return out;
    }
    ClassData C = conjugacy_class(U, job_.conjugators, expand && R.dp > 0);
    ++out.orbits;
    R.normalizer_index_exp = C.size_exp;
    if (!expand || R.dp == 0) return out;
    // N_P(U) acts on U/Phi(U); one child per orbit on hyperplanes.
    PcBuilder NB = U.builder();
    const int n_exp = ctx_->length() - C.size_exp;
    for (const auto& s : C.schreier) {
      if (NB.size() >= n_exp) break;
      NB.add(s);
      NB.close(n_exp);
    }
    PcSubgroup N = NB.result();
    std::vector<char> in_u(ctx_->length(), 0);
    for (int d : U.depths()) in_u[d] = 1;
    std::vector<std::vector<std::vector<int>>> mats;
    for (std::size_t i = 0; i < N.depths().size(); ++i) {
      if (in_u[N.depths()[i]]) continue;
      const Perm& g = N.elements()[i];
      std::vector<std::vector<int>> A;
      for (const auto& b : F.b) A.push_back(F.coords(b.conj(g), p));
      mats.push_back(std::move(A));
    }
    Projective proj(p, R.dp);
    std::vector<char> seen(proj.size(), 0);
    const int d = R.dp;
    for (std::size_t i = 0; i < proj.size(); ++i) {
      if (seen[i]) continue;
      seen[i] = 1;
      std::vector<std::size_t> stack{i};
      while (!stack.empty()) {
        auto c = proj.vec(stack.back());
        stack.pop_back();
        for (const auto& A : mats) {
          std::vector<int> c2(d, 0);
          for (int a = 0; a < d; ++a) {
            int s = 0;
            for (int b = 0; b < d; ++b) s += A[a][b] * c[b];
            c2[a] = s % p;
          }
          auto j = proj.id_of(c2);
          if (!seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
      PcSubgroup M = hyperplane_child(U, F, proj.vec(i));
      if (auto hit = cache_.find(M.key())) {
        out.children.push_back(class_keys_[*hit]);
        out.members.emplace_back();
        ++out.cache_hits;
        continue;
      }
      ClassData MC = conjugacy_class(M, job_.conjugators, false);
      ++out.orbits;
      out.children.push_back(MC.min_key);
      out.members.push_back(std::move(MC.members));
    }
    return out;
  }

  void absorb(LevelSummary& L, const SubgroupRecord& R) {
    L.count += big_pow(job_.p, R.normalizer_index_exp);
    ++L.classes;
    if (R.dp > L.dp_max) {
      L.dp_max = R.dp;
      L.dp_witness = R.canonical_key;
    }
    if (R.orbit_count > L.o_max) {
      L.o_max = R.orbit_count;
      L.o_witness = R.canonical_key;
    }
    if (R.size_exp == 0) L.has_trivial = true;
  }

  void remember_class(const SubgroupKey& min_key, const std::vector<SubgroupKey>& members) {
    if (cache_full_) return;
    if (cache_.bytes() > job_.memory_budget / 4) {
      cache_full_ = true;
      return;
    }
    auto id = static_cast<std::uint32_t>(class_keys_.size());
    class_keys_.push_back(min_key);
    class_key_bytes_ += 32 + min_key.size();
    for (const auto& k : members) cache_.insert(k, id);
  }

  std::size_t memory_in_use(const std::vector<std::string>& frontier) const {
    std::size_t b = next_.bytes() + cache_.bytes();
    b += class_key_bytes_;
    b += frontier.size() * 32;
    if (!frontier.empty()) b += frontier.size() * frontier.front().size();
    return b;
  }

  void check_budget(int m, const std::vector<std::string>& frontier,
                    const std::optional<std::filesystem::path>& frontier_file,
                    std::chrono::steady_clock::time_point t0) {
    std::size_t used = memory_in_use(frontier);
    summary_.budget.peak_bytes = std::max(summary_.budget.peak_bytes, used);
    if (job_.time_budget_s > 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > job_.time_budget_s)
      fail(m, frontier, frontier_file, "time budget exhausted");
    if (used <= job_.memory_budget) return;
    // Spill a large dedup table, then drop the class cache, then spill whatever is left.
    if (next_.bytes() > job_.memory_budget / 2) spill();
    if (memory_in_use(frontier) > job_.memory_budget) {
      cache_.clear();
      class_keys_.clear();
      class_key_bytes_ = 0;
      cache_full_ = true;
    }
    if (memory_in_use(frontier) > job_.memory_budget) spill();
    if (summary_.budget.spilled_bytes > job_.disk_budget) fail(m, frontier, frontier_file, "disk budget exhausted");
    if (memory_in_use(frontier) > job_.memory_budget) fail(m, frontier, frontier_file, "memory budget exhausted");
  }

  void spill() {
    if (next_.size() == 0) return;
    auto path = spill_path("run_" + std::to_string(runs_.size()));
    KeyWriter w(path);
    for (auto k : next_.sorted()) w.write(k);
    w.close();
    summary_.budget.spilled_bytes += w.bytes();
    ++summary_.budget.spill_runs;
    runs_.push_back(path);
    next_.clear();
  }

  std::filesystem::path spill_path(const std::string& name) {
    if (dir_.empty()) {
      if (!job_.spill_dir.empty()) {
        dir_ = job_.spill_dir;
      } else {
        std::random_device rd;
        dir_ = std::filesystem::temp_directory_path() /
               ("pgrowth-" + std::to_string(rd()) + std::to_string(rd()));
        owns_dir_ = true;
      }
      std::filesystem::create_directories(dir_);
    }
    return dir_ / name;
  }

  void cleanup_dir() {
    if (owns_dir_ && !dir_.empty()) {
      std::error_code ec;
      std::filesystem::remove_all(dir_, ec);
      dir_.clear();
    }
  }

  // Level m was being processed: levels below m are complete.  The token
  // records level m's frontier so a resumed run redoes level m.
  [[noreturn]] void fail(int m, const std::vector<std::string>& frontier,
                         const std::optional<std::filesystem::path>& frontier_file, const std::string& why) {
    using namespace lattice_detail;
    owns_dir_ = false;  // keep the files for the resume
    auto fpath = spill_path("resume_frontier_" + std::to_string(m));
    if (frontier_file) {
      if (*frontier_file != fpath) std::filesystem::copy_file(*frontier_file, fpath, std::filesystem::copy_options::overwrite_existing);
    } else {
      KeyWriter w(fpath);
      for (const auto& k : frontier) w.write(k);
      w.close();
    }
    for (auto& f : runs_) std::filesystem::remove(f);
    auto tpath = spill_path("resume_token.txt");
    std::ofstream t(tpath);
    t << "fingerprint=" << group_fingerprint(*job_.group, job_.p, job_.mode) << "\n";
    t << "next_m=" << m << "\n";
    t << "frontier=" << fpath.string() << "\n";
    for (const auto& L : summary_.levels) {
      t << "level=" << L.m << ' ' << L.count.str() << ' ' << L.classes << ' ' << L.dp_max << ' ' << L.o_max << ' '
        << (L.has_trivial ? 1 : 0) << ' ' << (L.dp_witness.empty() ? "-" : hex(L.dp_witness)) << ' '
        << (L.o_witness.empty() ? "-" : hex(L.o_witness)) << "\n";
    }
    t.close();
    EnumerationSummary partial = summary_;
    partial.complete_to = m - 1;
    throw BudgetExceeded(why + " while expanding level " + std::to_string(m), std::move(partial), tpath.string());
  }

  int load_token(const std::string& path, std::optional<std::filesystem::path>& frontier_file) {
    using namespace lattice_detail;
    std::ifstream in(path);
    if (!in) throw Error(Errc::Usage, "cannot read resume token " + path);
    std::string line;
    int next_m = -1;
    while (std::getline(in, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string k = line.substr(0, eq), v = line.substr(eq + 1);
      if (k == "fingerprint") {
        if (v != group_fingerprint(*job_.group, job_.p, job_.mode))
          throw Error(Errc::Usage, "resume token belongs to a different job");
      } else if (k == "next_m") {
        next_m = std::stoi(v);
      } else if (k == "frontier") {
        frontier_file = v;
      } else if (k == "level") {
        std::istringstream is(v);
        LevelSummary L;
        std::string cnt, dw, ow;
        int triv = 0;
        is >> L.m >> cnt >> L.classes >> L.dp_max >> L.o_max >> triv >> dw >> ow;
        L.count = BigInt(cnt);
        L.has_trivial = triv != 0;
        if (dw != "-") L.dp_witness = unhex(dw);
        if (ow != "-") L.o_witness = unhex(ow);
        summary_.levels.push_back(L);
        summary_.complete_to = L.m;
      }
    }
    if (next_m < 0 || !frontier_file) throw Error(Errc::Usage, "malformed resume token " + path);
    // Copy so the original frontier survives a second interruption.
    auto copy = spill_path("frontier_resume");
    if (copy != *frontier_file) std::filesystem::copy_file(*frontier_file, copy, std::filesystem::copy_options::overwrite_existing);
    frontier_file = copy;
    return next_m;
  }

  EnumerationJob job_;
  std::unique_ptr<PcContext> ctx_;
  EnumerationSummary summary_;
  KeySet next_;
  KeySet cache_;
  bool cache_full_ = false;
  std::vector<SubgroupKey> class_keys_;
  std::size_t class_key_bytes_ = 0;
  std::vector<std::filesystem::path> runs_;
  std::filesystem::path dir_;
  bool owns_dir_ = false;
};

inline EnumerationSummary enumerate_subgroups(const EnumerationJob& job, const SubgroupEnumerator::Visitor& visit) {
  SubgroupEnumerator E(job);
  return E.run(visit);
}

inline std::vector<SubgroupRecord> collect_subgroups(const EnumerationJob& job, EnumerationSummary* summary = nullptr) {
  std::vector<SubgroupRecord> out;
  auto s = enumerate_subgroups(job, [&](const SubgroupRecord& r) { out.push_back(r); });
  if (summary) *summary = std::move(s);
  return out;
}

// ---------------------------------------------------------------------------
// Tables

struct GrowthRow {
  int m = 0;
  BigInt count = 0;    // subgroups of index exactly p^m
  BigInt s_count = 0;  // subgroups of index at most p^m
  std::uint64_t class_count = 0;
  int dp_max = -1;
  int o_max = -1;
  int level_used = -1;
  bool stabilized = false;
};

struct GrowthTables {
  std::string group_id;
  int p = 2;
  int level = -1;
  EnumMode mode = EnumMode::Exact;
  std::vector<GrowthRow> rows;
};

/// Completeness of per-m data: every m ≤ max_m has data, or the data ends
/// with the trivial subgroup (the group has no smaller subgroups).
inline void require_complete(const std::vector<LevelSummary>& levels, int max_m) {
  for (int m = 0; m <= max_m; ++m) {
    if (m < static_cast<int>(levels.size()) && levels[m].classes > 0) continue;
    if (m > 0 && m - 1 < static_cast<int>(levels.size()) && levels[m - 1].has_trivial) return;
    throw Error(Errc::IncompleteEnumeration, "no subgroups recorded at index exponent " + std::to_string(m));
  }
}

inline GrowthTables tables_from_summary(const EnumerationSummary& S, int max_m, int p, int level = -1,
                                        EnumMode mode = EnumMode::Exact, std::string id = "") {
  if (S.complete_to < std::min<int>(max_m, static_cast<int>(S.levels.size()) - 1) || S.levels.empty())
    throw Error(Errc::IncompleteEnumeration, "enumeration incomplete");
  require_complete(S.levels, max_m);
  GrowthTables T;
  T.group_id = std::move(id);
  T.p = p;
  T.level = level;
  T.mode = mode;
  BigInt acc = 0;
  for (int m = 0; m <= max_m && m < static_cast<int>(S.levels.size()); ++m) {
    const auto& L = S.levels[m];
    GrowthRow r;
    r.m = m;
    r.count = L.count;
    acc += L.count;
    r.s_count = acc;
    r.class_count = L.classes;
    r.dp_max = L.dp_max;
    r.o_max = L.o_max;
    r.level_used = level;
    T.rows.push_back(r);
  }
  return T;
}

inline std::vector<LevelSummary> summarize_records(const std::vector<SubgroupRecord>& records, int p, int max_m) {
  std::vector<LevelSummary> L(max_m + 1);
  for (int m = 0; m <= max_m; ++m) L[m].m = m;
  for (const auto& R : records) {
    if (R.m > max_m) continue;
    auto& S = L[R.m];
    S.count += big_pow(p, R.normalizer_index_exp);
    ++S.classes;
    if (R.dp > S.dp_max) {
      S.dp_max = R.dp;
      S.dp_witness = R.canonical_key;
    }
    if (R.orbit_count > S.o_max) {
      S.o_max = R.orbit_count;
      S.o_witness = R.canonical_key;
    }
    if (R.size_exp == 0) S.has_trivial = true;
  }
  while (!L.empty() && L.back().classes == 0) L.pop_back();
  return L;
}

/// s_{p^m} table from a record list.
inline GrowthTables s_table(const std::vector<SubgroupRecord>& records, int max_m, int p) {
  auto L = summarize_records(records, p, max_m);
  require_complete(L, max_m);
  EnumerationSummary S;
  S.levels = L;
  S.complete_to = static_cast<int>(L.size()) - 1;
  return tables_from_summary(S, max_m, p);
}

/// Same rows; named separately for the d_p(m) view.
inline GrowthTables dp_profile(const std::vector<SubgroupRecord>& records, int max_m, int p) {
  return s_table(records, max_m, p);
}

struct SweepResult {
  GrowthTables table;                      // deepest level, with stabilization flags
  std::vector<GrowthTables> per_level;
};

/// Enumerates the image of a subgroup in each level quotient and marks rows
/// that agree at the last two levels.
inline SweepResult stabilization_sweep(const SelfSimilarGroup& G, const SeedSubgroup& selector, int max_m,
                                       const std::vector<int>& levels, EnumMode mode = EnumMode::Conjugacy,
                                       std::size_t budget = std::size_t(4) << 30, int jobs = 1) {
  if (levels.empty()) throw Error(Errc::Usage, "no levels for sweep");
  SweepResult out;
  for (int lv : levels) {
    G.check_level(lv);
    auto Q = std::make_shared<const PermGroup>(level_quotient(G, lv, selector));
    EnumerationJob job;
    job.group = Q;
    job.p = G.p();
    job.max_m = max_m;
    job.mode = mode;
    job.memory_budget = budget;
    job.parallelism = jobs;
    auto S = enumerate_subgroups(job, [](const SubgroupRecord&) {});
    out.per_level.push_back(tables_from_summary(S, max_m, G.p(), lv, mode, G.id()));
  }
  out.table = out.per_level.back();
  if (out.per_level.size() >= 2) {
    const auto& prev = out.per_level[out.per_level.size() - 2];
    for (auto& r : out.table.rows) {
      if (r.m >= static_cast<int>(prev.rows.size())) continue;
      const auto& q = prev.rows[r.m];
      r.stabilized = (q.count == r.count && q.dp_max == r.dp_max);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generator-bound checks

struct BoundReport {
  std::string name;
  std::size_t checked = 0;
  std::size_t violations = 0;
  int min_slack = std::numeric_limits<int>::max();  // smallest bound - value seen
  Rational max_ratio = 0;                           // largest value / bound seen
  std::vector<std::string> violation_details;
  bool pass() const { return violations == 0 && checked > 0; }

  void observe(int value, int bound, const std::string& where) {
    ++checked;
    min_slack = std::min(min_slack, bound - value);
    if (bound > 0) max_ratio = std::max(max_ratio, Rational(value, bound));
    if (value > bound) {
      ++violations;
      if (violation_details.size() < 20) violation_details.push_back(where);
    }
  }
};

/// Direct product G x H on the disjoint union of the point sets.
inline PermGroup direct_product(const PermGroup& G, const PermGroup& H) {
  const std::size_t n = G.degree(), k = H.degree();
  std::vector<Perm> gens;
  for (const auto& g : G.generators()) {
    std::vector<Point> im(n + k);
    for (std::size_t i = 0; i < n; ++i) im[i] = g[static_cast<Point>(i)];
    for (std::size_t i = 0; i < k; ++i) im[n + i] = static_cast<Point>(n + i);
    gens.push_back(Perm::from_images_unchecked(std::move(im)));
  }
  for (const auto& h : H.generators()) {
    std::vector<Point> im(n + k);
    for (std::size_t i = 0; i < n; ++i) im[i] = static_cast<Point>(i);
    for (std::size_t i = 0; i < k; ++i) im[n + i] = static_cast<Point>(n + h[static_cast<Point>(i)]);
    gens.push_back(Perm::from_images_unchecked(std::move(im)));
  }
  return PermGroup(n + k, gens);
}

/// dp(U) ≤ m + dp(G) + dp(H) for every U ≤ G x H of index p^m ≤ p^max_m.
inline BoundReport verify_lemma_direct(const PermGroup& G, const PermGroup& H, int p, int max_m, int jobs = 1,
                                       std::size_t budget = std::size_t(1) << 30) {
  BoundReport rep;
  rep.name = "direct product";
  const int dg = dp(G, p), dh = dp(H, p);
  EnumerationJob job;
  job.group = std::make_shared<const PermGroup>(direct_product(G, H));
  job.p = p;
  job.max_m = max_m;
  job.parallelism = jobs;
  job.memory_budget = budget;
  enumerate_subgroups(job, [&](const SubgroupRecord& R) {
    rep.observe(R.dp, R.m + dg + dh, "m=" + std::to_string(R.m) + " dp=" + std::to_string(R.dp));
  });
  return rep;
}

/// dp(U) ≤ C m + dp(K) with C = (k-1) dp(K) + d, checked on per-m maxima.
inline BoundReport verify_lemma_inductive(int dp_K, int k, int ell, int d, const GrowthTables& T) {
  (void)ell;
  if (T.rows.empty()) throw Error(Errc::IncompleteEnumeration, "empty table");
  BoundReport rep;
  rep.name = "inductive";
  const int C = (k - 1) * dp_K + d;
  for (const auto& r : T.rows)
    rep.observe(r.dp_max, C * r.m + dp_K, "m=" + std::to_string(r.m) + " dp_max=" + std::to_string(r.dp_max));
  return rep;
}

}  // namespace pgrowth
