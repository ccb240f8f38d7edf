#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace pgrowth {

/// Insert-only hash set of byte strings stored back to back in one arena,
/// each with a 32-bit payload.  Memory use is roughly key bytes + 18 bytes per key.
class KeySet {
 public:
  KeySet() { table_.assign(1024, 0); }

  bool insert(std::string_view k, std::uint32_t value = 0) {
    if ((count_ + 1) * 10 > table_.size() * 7) grow();
    std::uint64_t h = hash(k);
    std::size_t mask = table_.size() - 1;
    for (std::size_t i = h & mask;; i = (i + 1) & mask) {
      if (table_[i] == 0) {
        table_[i] = append(k, value) + 1;
        ++count_;
        return true;
      }
      if (view(table_[i] - 1) == k) return false;
    }
  }

  bool contains(std::string_view k) const { return find(k).has_value(); }

  std::optional<std::uint32_t> find(std::string_view k) const {
    std::uint64_t h = hash(k);
    std::size_t mask = table_.size() - 1;
    for (std::size_t i = h & mask;; i = (i + 1) & mask) {
      if (table_[i] == 0) return std::nullopt;
      if (view(table_[i] - 1) == k) return payload(table_[i] - 1);
    }
  }

  std::size_t size() const { return count_; }
  std::size_t bytes() const { return arena_.capacity() + table_.capacity() * sizeof(std::uint64_t); }

  std::vector<std::string_view> sorted() const {
    std::vector<std::string_view> out;
    out.reserve(count_);
    for (auto s : table_)
      if (s) out.push_back(view(s - 1));
    std::sort(out.begin(), out.end());
    return out;
  }

  void clear() {
    arena_.clear();
    arena_.shrink_to_fit();
    table_.assign(1024, 0);
    count_ = 0;
  }

  static std::uint64_t hash(std::string_view k) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : k) h = (h ^ c) * 1099511628211ull;
    return h ^ (h >> 29);
  }

 private:
  std::uint64_t append(std::string_view k, std::uint32_t value) {
    std::uint64_t off = arena_.size();
    std::uint16_t len = static_cast<std::uint16_t>(k.size());
    arena_.resize(arena_.size() + 6 + k.size());
    std::memcpy(arena_.data() + off, &len, 2);
    std::memcpy(arena_.data() + off + 2, &value, 4);
    std::memcpy(arena_.data() + off + 6, k.data(), k.size());
    return off;
  }

  std::uint32_t payload(std::uint64_t off) const {
    std::uint32_t v;
    std::memcpy(&v, arena_.data() + off + 2, 4);
    return v;
  }

  std::string_view view(std::uint64_t off) const {
    std::uint16_t len;
    std::memcpy(&len, arena_.data() + off, 2);
    return {arena_.data() + off + 6, len};
  }

  void grow() {
    std::vector<std::uint64_t> old;
    old.swap(table_);
    table_.assign(old.size() * 2, 0);
    std::size_t mask = table_.size() - 1;
    for (auto s : old) {
      if (!s) continue;
      for (std::size_t i = hash(view(s - 1)) & mask;; i = (i + 1) & mask)
        if (table_[i] == 0) {
          table_[i] = s;
          break;
        }
    }
  }

  std::vector<char> arena_;
  std::vector<std::uint64_t> table_;
  std::size_t count_ = 0;
};

/// Length-prefixed key file.
class KeyWriter {
 public:
  explicit KeyWriter(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw Error(Errc::BudgetExceeded, "cannot open spill file " + path.string());
  }
  void write(std::string_view k) {
    std::uint16_t len = static_cast<std::uint16_t>(k.size());
    out_.write(reinterpret_cast<const char*>(&len), 2);
    out_.write(k.data(), static_cast<std::streamsize>(k.size()));
    bytes_ += 2 + k.size();
    ++count_;
  }
  std::size_t bytes() const { return bytes_; }
  std::size_t count() const { return count_; }
  void close() { out_.close(); }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t bytes_ = 0;
  std::size_t count_ = 0;
};

class KeyReader {
 public:
  explicit KeyReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error(Errc::BudgetExceeded, "cannot open key file " + path.string());
  }
  bool next(std::string& k) {
    std::uint16_t len;
    if (!in_.read(reinterpret_cast<char*>(&len), 2)) return false;
    k.resize(len);
    in_.read(k.data(), len);
    return static_cast<bool>(in_);
  }

 private:
  std::ifstream in_;
};

/// k-way merge of sorted key files into one sorted duplicate-free file.
inline std::size_t merge_key_files(const std::vector<std::filesystem::path>& runs,
                                   const std::filesystem::path& out) {
  std::vector<std::unique_ptr<KeyReader>> readers;
  using Item = std::pair<std::string, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    readers.push_back(std::make_unique<KeyReader>(runs[i]));
    std::string k;
    if (readers[i]->next(k)) heap.emplace(std::move(k), i);
  }
  KeyWriter w(out);
  std::string last;
  bool have = false;
  while (!heap.empty()) {
    auto [k, i] = heap.top();
    heap.pop();
    if (!have || k != last) {
      w.write(k);
      last = k;
      have = true;
    }
    std::string n;
    if (readers[i]->next(n)) heap.emplace(std::move(n), i);
  }
  w.close();
  return w.count();
}

}  // namespace pgrowth
