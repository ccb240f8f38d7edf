#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pgrowth {

using Point = std::uint16_t;

/// Permutation of {0..n-1} stored as an image array.  Products follow the
/// right-action convention: x^(g*h) = (x^g)^h.
class Perm {
 public:
  Perm() = default;

  explicit Perm(std::size_t degree) : img_(degree) {
    for (std::size_t i = 0; i < degree; ++i) img_[i] = static_cast<Point>(i);
  }

  /// Validating constructor.
  static Perm from_images(std::vector<Point> images) {
    std::vector<char> seen(images.size(), 0);
    for (Point x : images) {
      if (x >= images.size() || seen[x])
        throw Error(Errc::BadPermutation, "image array is not a bijection");
      seen[x] = 1;
    }
    Perm g;
    g.img_ = std::move(images);
    return g;
  }

  static Perm from_images_unchecked(std::vector<Point> images) {
    Perm g;
    g.img_ = std::move(images);
    return g;
  }

  /// Cycles are lists of points; unlisted points are fixed.
  static Perm from_cycles(std::size_t degree, const std::vector<std::vector<int>>& cycles) {
    Perm g(degree);
    std::vector<char> used(degree, 0);
    for (const auto& c : cycles) {
      for (int x : c) {
        if (x < 0 || static_cast<std::size_t>(x) >= degree || used[x])
          throw Error(Errc::BadPermutation, "cycle entry out of range or repeated");
        used[x] = 1;
      }
      for (std::size_t i = 0; i < c.size(); ++i)
        g.img_[c[i]] = static_cast<Point>(c[(i + 1) % c.size()]);
    }
    return g;
  }

  std::size_t degree() const { return img_.size(); }
  Point operator[](std::size_t x) const { return img_[x]; }
  const std::vector<Point>& images() const { return img_; }

  Perm operator*(const Perm& h) const {
    check_degree(h);
    Perm r;
    r.img_.resize(img_.size());
    for (std::size_t i = 0; i < img_.size(); ++i) r.img_[i] = h.img_[img_[i]];
    return r;
  }

  Perm& operator*=(const Perm& h) {
    check_degree(h);
    for (auto& x : img_) x = h.img_[x];
    return *this;
  }

  Perm inverse() const {
    Perm r;
    r.img_.resize(img_.size());
    for (std::size_t i = 0; i < img_.size(); ++i) r.img_[img_[i]] = static_cast<Point>(i);
    return r;
  }

  Perm pow(long long e) const {
    Perm base = e < 0 ? inverse() : *this;
    if (e < 0) e = -e;
    Perm r(degree());
    while (e > 0) {
      if (e & 1) r *= base;
      base = base * base;
      e >>= 1;
    }
    return r;
  }

  bool is_identity() const {
    for (std::size_t i = 0; i < img_.size(); ++i)
      if (img_[i] != i) return false;
    return true;
  }

  std::optional<Point> smallest_moved(std::size_t from = 0) const {
    for (std::size_t i = from; i < img_.size(); ++i)
      if (img_[i] != i) return static_cast<Point>(i);
    return std::nullopt;
  }

  /// Conjugate g^-1 * this * g.
  Perm conj(const Perm& g) const { return g.inverse() * *this * g; }

  std::size_t order() const {
    std::size_t ord = 1;
    std::vector<char> seen(img_.size(), 0);
    for (std::size_t i = 0; i < img_.size(); ++i) {
      if (seen[i]) continue;
      std::size_t len = 0;
      for (std::size_t j = i; !seen[j]; j = img_[j]) {
        seen[j] = 1;
        ++len;
      }
      ord = std::lcm(ord, len);
    }
    return ord;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < img_.size(); ++i) os << (i ? "," : "") << img_[i];
    os << ']';
    return os.str();
  }

  friend bool operator==(const Perm&, const Perm&) = default;
  friend auto operator<=>(const Perm& a, const Perm& b) { return a.img_ <=> b.img_; }

 private:
  void check_degree(const Perm& h) const {
    if (h.img_.size() != img_.size())
      throw Error(Errc::DegreeMismatch, "permutation degrees differ");
  }

  std::vector<Point> img_;
};

inline Perm commutator(const Perm& a, const Perm& b) {
  return a.inverse() * b.inverse() * a * b;
}

struct PermHash {
  std::size_t operator()(const Perm& g) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Point x : g.images()) h = (h ^ x) * 1099511628211ull;
    return h;
  }
};

}  // namespace pgrowth
