#pragma once

#include <cstdint>
#include <vector>

#include "twin/time.hpp"

namespace twin {

// Time-ordered event queue. Ties dispatch in insertion order (FIFO), which
// the per-event sequence number enforces. 4-ary implicit heap: the sims push
// hundreds of millions of events, so node fan-out matters more than elegance.
template <typename Payload>
class EventQueue {
 public:
  struct Entry {
    TimePoint t;
    std::uint64_t seq;
    Payload payload;
  };

  void push(TimePoint t, const Payload& p) {
    heap_.push_back(Entry{t, next_seq_++, p});
    sift_up(heap_.size() - 1);
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Entry& top() const { return heap_.front(); }

  Entry pop() {
    Entry out = heap_.front();
    heap_.front() = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) sift_down(0);
    return out;
  }

  void clear() { heap_.clear(); }

 private:
  static bool before(const Entry& a, const Entry& b) {
    return a.t < b.t || (a.t == b.t && a.seq < b.seq);
  }

  void sift_up(std::size_t i) {
    Entry e = heap_[i];
    while (i > 0) {
      std::size_t parent = (i - 1) / 4;
      if (!before(e, heap_[parent])) break;
      heap_[i] = heap_[parent];
      i = parent;
    }
    heap_[i] = e;
  }

  void sift_down(std::size_t i) {
    Entry e = heap_[i];
    const std::size_t n = heap_.size();
    for (;;) {
      std::size_t first = 4 * i + 1;
      if (first >= n) break;
      std::size_t best = first;
      std::size_t last = first + 4 < n ? first + 4 : n;
      for (std::size_t c = first + 1; c < last; ++c)
        if (before(heap_[c], heap_[best])) best = c;
      if (!before(heap_[best], e)) break;
      heap_[i] = heap_[best];
      i = best;
    }
    heap_[i] = e;
  }

  std::vector<Entry> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace twin
