#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <set>
#include <utility>
#include <vector>

namespace plotsmith {

/// Open-ended upper bound for time windows.
inline constexpr int kForever = std::numeric_limits<int>::max();

/// A factor value indexed by time: a time-homogeneous base plus windowed
/// overrides. Values are shared immutably, so copying a Timed never copies
/// tables and untouched factors keep their identity across model copies.
/// When windows overlap the most recently added override wins.
template <class T>
class Timed {
public:
  struct Override {
    int from;
    int to;
    std::shared_ptr<const T> value;
  };

  struct Segment {
    int from;
    int to;
    std::shared_ptr<const T> value;
  };

  Timed() : base_(std::make_shared<const T>()) {}
  explicit Timed(T value) : base_(std::make_shared<const T>(std::move(value))) {}

  const T& at(int t) const { return *ptr_at(t); }

  const std::shared_ptr<const T>& ptr_at(int t) const {
    for (auto it = overrides_.rbegin(); it != overrides_.rend(); ++it) {
      if (it->from <= t && t <= it->to) return it->value;
    }
    return base_;
  }

  const T& base() const { return *base_; }
  const std::shared_ptr<const T>& base_ptr() const { return base_; }
  const std::vector<Override>& overrides() const { return overrides_; }
  bool time_homogeneous() const { return overrides_.empty(); }

  Timed with_override(int from, int to, T value) const {
    return with_override(from, to, std::make_shared<const T>(std::move(value)));
  }

  Timed with_override(int from, int to, std::shared_ptr<const T> value) const {
    Timed out = *this;
    if (from <= to) out.overrides_.push_back({from, to, std::move(value)});
    return out;
  }

  /// Times in (from, to] at which the effective value may change.
  void collect_breakpoints(int from, int to, std::set<int>& out) const {
    for (const auto& o : overrides_) {
      if (o.from > from && o.from <= to) out.insert(o.from);
      if (o.to != kForever && o.to + 1 > from && o.to + 1 <= to) out.insert(o.to + 1);
    }
  }

  /// Maximal runs of [from, to] over which the effective value is one object.
  std::vector<Segment> segments(int from, int to) const {
    std::set<int> cuts{from};
    collect_breakpoints(from, to, cuts);
    std::vector<Segment> out;
    std::vector<int> starts(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i < starts.size(); ++i) {
      int end = i + 1 < starts.size() ? starts[i + 1] - 1 : to;
      const auto& v = ptr_at(starts[i]);
      if (!out.empty() && out.back().value == v) {
        out.back().to = end;
      } else {
        out.push_back({starts[i], end, v});
      }
    }
    return out;
  }

  bool identical_to(const Timed& other) const {
    if (base_ != other.base_ || overrides_.size() != other.overrides_.size()) return false;
    for (std::size_t i = 0; i < overrides_.size(); ++i) {
      const auto& a = overrides_[i];
      const auto& b = other.overrides_[i];
      if (a.from != b.from || a.to != b.to || a.value != b.value) return false;
    }
    return true;
  }

private:
  std::shared_ptr<const T> base_;
  std::vector<Override> overrides_;
};

} // namespace plotsmith
