#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epimu/errors.hpp"

namespace epimu {

/// Dense bitset over the 1-based index range 1..n. Used both for state sets
/// of a MAS and for node sets of a bounded unfolding.
class StateSet {
public:
  StateSet() : n_(0) {}
  explicit StateSet(int n) : n_(n), bits_((n + 63) / 64, 0) {}

  static StateSet full(int n) {
    StateSet s(n);
    for (int i = 1; i <= n; ++i) s.insert(i);
    return s;
  }
  static StateSet of(int n, std::initializer_list<int> xs) {
    StateSet s(n);
    for (int x : xs) s.insert(x);
    return s;
  }
  static StateSet of(int n, const std::vector<int>& xs) {
    StateSet s(n);
    for (int x : xs) s.insert(x);
    return s;
  }

  int universe_size() const { return n_; }

  bool contains(int i) const {
    check(i);
    return (bits_[(i - 1) >> 6] >> ((i - 1) & 63)) & 1u;
  }
  void insert(int i) {
    check(i);
    bits_[(i - 1) >> 6] |= uint64_t(1) << ((i - 1) & 63);
  }
  void erase(int i) {
    check(i);
    bits_[(i - 1) >> 6] &= ~(uint64_t(1) << ((i - 1) & 63));
  }

  int count() const {
    int c = 0;
    for (uint64_t w : bits_) c += __builtin_popcountll(w);
    return c;
  }
  bool empty() const {
    for (uint64_t w : bits_)
      if (w) return false;
    return true;
  }

  StateSet& operator|=(const StateSet& o) {
    same(o);
    for (size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
    return *this;
  }
  StateSet& operator&=(const StateSet& o) {
    same(o);
    for (size_t i = 0; i < bits_.size(); ++i) bits_[i] &= o.bits_[i];
    return *this;
  }
  StateSet operator|(const StateSet& o) const { StateSet r = *this; r |= o; return r; }
  StateSet operator&(const StateSet& o) const { StateSet r = *this; r &= o; return r; }

  StateSet complement() const {
    StateSet r(n_);
    for (size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = ~bits_[i];
    r.mask_tail();
    return r;
  }

  bool operator==(const StateSet& o) const { return n_ == o.n_ && bits_ == o.bits_; }
  bool operator!=(const StateSet& o) const { return !(*this == o); }

  bool subset_of(const StateSet& o) const {
    same(o);
    for (size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i] & ~o.bits_[i]) return false;
    return true;
  }

  /// Members in increasing order.
  std::vector<int> elements() const {
    std::vector<int> v;
    v.reserve(count());
    for (int i = 1; i <= n_; ++i)
      if (contains(i)) v.push_back(i);
    return v;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int i : elements()) {
      if (!first) s += ",";
      s += std::to_string(i);
      first = false;
    }
    return s + "}";
  }

  bool operator<(const StateSet& o) const {
    if (n_ != o.n_) return n_ < o.n_;
    // Compare as sorted element lists (lowest state first).
    for (size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i] != o.bits_[i]) {
        uint64_t diff = bits_[i] ^ o.bits_[i];
        uint64_t low = diff & (~diff + 1);
        return bits_[i] & low; // owning the lowest differing element sorts first
      }
    }
    return false;
  }

private:
  void check(int i) const {
    if (i < 1 || i > n_)
      throw internal_error("state index " + std::to_string(i) + " outside 1.." + std::to_string(n_));
  }
  void same(const StateSet& o) const {
    if (n_ != o.n_) throw internal_error("state set universe mismatch");
  }
  void mask_tail() {
    int rem = n_ & 63;
    if (rem && !bits_.empty()) bits_.back() &= (uint64_t(1) << rem) - 1;
  }

  int n_;
  std::vector<uint64_t> bits_;
};

} // namespace epimu
