#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

namespace fastaj {

// Bounded FIFO: once full, each push evicts the oldest item.
template <typename T>
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay memory capacity must be positive");
    items_.reserve(capacity);
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  // i = 0 is the oldest retained item.
  T& at(std::size_t i) { return items_.at(physical(i)); }
  const T& at(std::size_t i) const { return items_.at(physical(i)); }

  // Distinct logical indices drawn uniformly (Floyd's algorithm).
  template <typename Rng>
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    const std::size_t n = items_.size();
    if (batch > n) {
      throw std::invalid_argument("cannot sample " + std::to_string(batch) + " items from " +
                                  std::to_string(n));
    }
    std::vector<std::size_t> picked;
    picked.reserve(batch);
    for (std::size_t j = n - batch; j < n; ++j) {
      std::uniform_int_distribution<std::size_t> dist(0, j);
      const std::size_t t = dist(rng);
      if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
        picked.push_back(t);
      } else {
        picked.push_back(j);
      }
    }
    return picked;
  }

 private:
  std::size_t physical(std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("replay memory index out of range");
    return items_.size() < capacity_ ? i : (head_ + i) % capacity_;
  }

  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> items_;
};

}  // namespace fastaj
