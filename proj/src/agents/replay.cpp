#include "isim/agents/replay.hpp"

#include "isim/errors.hpp"

namespace isim::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw config_error("replay: zero capacity");
  store_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (store_.size() < capacity_) {
    store_.push_back(t);
  } else {
    store_[head_] = t;
  }
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
  if (logical >= size_) throw shape_error("replay: index out of range");
  if (size_ < capacity_) return store_[logical];
  return store_[(head_ + logical) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      num::Rng& rng) const {
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.uniform_int(size_);
  return idx;
}

}  // namespace isim::agents
