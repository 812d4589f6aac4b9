#pragma once

#include <span>
#include <vector>

#include "cogniplay/features.hpp"
#include "cogniplay/game.hpp"
#include "cogniplay/rng.hpp"

namespace cogniplay {

// System-1 distribution over the legal actions of a state, in legal-action
// (row-major) order.
struct PolicyDist {
  std::vector<Action> actions;
  std::vector<double> probs;

  std::size_t size() const noexcept { return actions.size(); }
  // 0 for actions not listed.
  double prob(Action a) const noexcept;
  // Highest probability, lowest row-major index on ties.
  std::size_t argmax() const noexcept;

  bool operator==(const PolicyDist&) const = default;
};

// Feature scores of `actions`, each the sum of active weights.
std::vector<double> action_scores(const FeatureSet& fs, const GameState& state,
                                  std::span<const Action> actions);

// Softmax with max-score subtraction.
std::vector<double> softmax(std::span<const double> scores);

// Index drawn from softmax(scores). Equal scores draw floor(u * n) so uniform
// and policy sampling consume the stream identically.
std::size_t sample_softmax(std::span<const double> scores, Rng& rng);

// Throws Error("terminal-state").
PolicyDist policy(const FeatureSet& fs, const GameState& state);

struct PartitionParams {
  double tau = 0.1;    // relative threshold against the best action
  int chunk_cap = 7;   // K, most actions kept as intuitively good

  void validate() const;
};

struct Partition {
  // Best first; ties resolved toward the lowest row-major index.
  std::vector<Action> good;
  bool certain = false;
  double tau = 0.1;
  int chunk_cap = 7;
};

// good = {a : p(a) >= tau * max p}, truncated to the K most probable.
// certain iff exactly one action survives.
Partition partition(const PolicyDist& p, double tau, int chunk_cap);
inline Partition partition(const PolicyDist& p, const PartitionParams& params) {
  return partition(p, params.tau, params.chunk_cap);
}

// Action indices of `p` sorted by descending probability, ties by index.
std::vector<std::size_t> rank_by_probability(const PolicyDist& p);

struct TrainingExample {
  GameState state;
  PolicyDist target;
};

// -sum_a target(a) log pi(a). Throws Error("target-mismatch") when the target
// is not over the state's legal actions.
double cross_entropy(const FeatureSet& fs, const TrainingExample& example);

struct BatchGradient {
  std::vector<double> gradient;  // mean over the batch, one entry per feature
  double mean_cross_entropy = 0.0;
};

// Textbook serial accumulation of dL/dw_f = sum_a (pi(a) - target(a)) [f active at a],
// averaged over the batch. Reference for the parallel kernel.
BatchGradient batch_gradient_serial(const FeatureSet& fs, std::span<const TrainingExample> batch);

// One gradient-descent step of size eta on the batch mean cross-entropy.
// Returns the pre-update mean cross-entropy.
double grad_step(FeatureSet& fs, std::span<const TrainingExample> batch, double eta);

struct ErrorSample {
  GameState state;
  PolicyDist target;
  PolicyDist current;
};

// Adds up to `count` conjunctions of feature pairs that co-activate most often
// on the actions with the largest |pi - target| error. New weights are 0.
// Returns the ids inserted.
std::vector<int> grow_features(FeatureSet& fs, std::span<const ErrorSample> samples, int count,
                               int generation);

}  // namespace cogniplay
