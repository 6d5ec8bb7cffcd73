#pragma once

#include <array>
#include <cstddef>
#include <mutex>
#include <random>
#include <vector>

#include "aiig/tag_game.hpp"

namespace aiig {

enum class Role { Protagonist, Opponent };
enum class TransitionSource { Learner, Mutant };

// Who generated a transition. Census queries over the buffer (tests, metrics)
// depend on this staying accurate.
struct MemberTag {
  Role role = Role::Protagonist;
  AgentType type = AgentType::Ally;  // meaningful for opponent transitions
  int member_id = -1;                // ensemble member, -1 for the protagonist
  TransitionSource source = TransitionSource::Learner;
};

struct Transition {
  std::vector<double> input;
  int action = 0;
  std::vector<double> action_probs;  // noiseless policy distribution at `input`
  double reward = 0;
  std::vector<double> next_input;
  bool done = false;
  MemberTag tag;
};

// Fixed-capacity ring buffer with uniform sampling. Appends are mutex-guarded
// so parallel rollout workers could share one buffer; reads used for training
// assume the single-threaded deterministic mode and take no snapshot.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  ReplayBuffer(const ReplayBuffer&);
  ReplayBuffer& operator=(const ReplayBuffer&);

  void append(Transition t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t total_inserted() const { return inserted_; }
  const Transition& at(std::size_t i) const { return storage_.at(i); }

  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;
  std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t next_ = 0;      // overwrite cursor once full
  std::size_t inserted_ = 0;  // lifetime appends
  mutable std::mutex mu_;
};

// One buffer per trained policy population: the protagonist's, and one per
// opponent type shared across every ensemble member and mutant.
struct SharedReplay {
  ReplayBuffer protagonist;
  std::array<ReplayBuffer, kNumTypes> opponent;

  explicit SharedReplay(std::size_t capacity)
      : protagonist(capacity), opponent{ReplayBuffer(capacity), ReplayBuffer(capacity)} {}

  ReplayBuffer& opponent_buffer(AgentType t) { return opponent[static_cast<int>(t)]; }
  const ReplayBuffer& opponent_buffer(AgentType t) const { return opponent[static_cast<int>(t)]; }
  std::size_t opponent_size() const { return opponent[0].size() + opponent[1].size(); }
};

}  // namespace aiig
