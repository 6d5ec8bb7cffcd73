#include "aiig/replay.hpp"

#include <stdexcept>

namespace aiig {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer capacity must be positive");
}

ReplayBuffer::ReplayBuffer(const ReplayBuffer& o)
    : capacity_(o.capacity_), storage_(o.storage_), next_(o.next_), inserted_(o.inserted_) {}

ReplayBuffer& ReplayBuffer::operator=(const ReplayBuffer& o) {
  if (this != &o) {
    std::scoped_lock lock(mu_);
    capacity_ = o.capacity_;
    storage_ = o.storage_;
    next_ = o.next_;
    inserted_ = o.inserted_;
  }
  return *this;
}

void ReplayBuffer::append(Transition t) {
  std::scoped_lock lock(mu_);
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
  inserted_ += 1;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      std::mt19937_64& rng) const {
  if (storage_.empty()) throw std::logic_error("sample from an empty ReplayBuffer");
  std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
  std::vector<std::size_t> out(batch);
  for (std::size_t i = 0; i < batch; ++i) out[i] = pick(rng);
  return out;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch,
                                                    std::mt19937_64& rng) const {
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i : sample_indices(batch, rng)) out.push_back(&storage_[i]);
  return out;
}

}  // namespace aiig
