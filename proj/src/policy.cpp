#include "cogniplay/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <string>

#include "cogniplay/kernels.hpp"

namespace cogniplay {
namespace {

// Actions with the largest |pi - target| examined per error sample.
constexpr int kErrorActionsPerSample = 3;

void check_target(const GameState& state, const PolicyDist& target,
                  std::span<const Action> legal) {
  if (target.actions.size() != legal.size() || target.probs.size() != legal.size() ||
      !std::equal(legal.begin(), legal.end(), target.actions.begin())) {
    throw Error("target-mismatch", "target is not over the legal actions of " +
                                       state_to_json(state).dump());
  }
}

}  // namespace

double PolicyDist::prob(Action a) const noexcept {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] == a) return probs[i];
  }
  return 0.0;
}

std::size_t PolicyDist::argmax() const noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

std::vector<double> action_scores(const FeatureSet& fs, const GameState& state,
                                  std::span<const Action> actions) {
  std::vector<double> scores(actions.size(), 0.0);
  if (fs.all_weights_zero()) return scores;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    scores[i] = fs.score(fs.pattern(state, actions[i]));
  }
  return scores;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> probs(scores.size());
  if (scores.empty()) return probs;
  const double m = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    probs[i] = std::exp(scores[i] - m);
    total += probs[i];
  }
  for (auto& p : probs) p /= total;
  return probs;
}

std::size_t sample_softmax(std::span<const double> scores, Rng& rng) {
  const double u = uniform01(rng);
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) {
    const auto i = static_cast<std::size_t>(u * static_cast<double>(scores.size()));
    return std::min(i, scores.size() - 1);
  }
  const double m = *hi;
  double total = 0.0;
  for (double s : scores) total += std::exp(s - m);
  const double target = u * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    acc += std::exp(scores[i] - m);
    if (target < acc) return i;
  }
  return scores.size() - 1;
}

PolicyDist policy(const FeatureSet& fs, const GameState& state) {
  PolicyDist dist;
  dist.actions = state.legal_actions();
  dist.probs = softmax(action_scores(fs, state, dist.actions));
  return dist;
}

void PartitionParams::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error("invalid-config", "tau must lie in (0, 1]");
  if (chunk_cap < 1) throw Error("invalid-config", "chunk cap must be at least 1");
}

std::vector<std::size_t> rank_by_probability(const PolicyDist& p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p.probs[a] > p.probs[b]; });
  return order;
}

Partition partition(const PolicyDist& p, double tau, int chunk_cap) {
  PartitionParams{tau, chunk_cap}.validate();
  Partition out;
  out.tau = tau;
  out.chunk_cap = chunk_cap;
  if (p.size() == 0) return out;
  const double threshold = tau * p.probs[p.argmax()];
  for (std::size_t i : rank_by_probability(p)) {
    if (p.probs[i] < threshold || static_cast<int>(out.good.size()) >= chunk_cap) break;
    out.good.push_back(p.actions[i]);
  }
  out.certain = out.good.size() == 1;
  return out;
}

double cross_entropy(const FeatureSet& fs, const TrainingExample& example) {
  const auto legal = example.state.legal_actions();
  check_target(example.state, example.target, legal);
  const auto probs = softmax(action_scores(fs, example.state, legal));
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (example.target.probs[i] > 0.0) loss -= example.target.probs[i] * std::log(probs[i]);
  }
  return loss;
}

BatchGradient batch_gradient_serial(const FeatureSet& fs, std::span<const TrainingExample> batch) {
  BatchGradient out;
  out.gradient.assign(static_cast<std::size_t>(fs.size()), 0.0);
  if (batch.empty()) return out;
  std::vector<int> ids;
  for (const auto& ex : batch) {
    const auto legal = ex.state.legal_actions();
    check_target(ex.state, ex.target, legal);
    const auto probs = softmax(action_scores(fs, ex.state, legal));
    for (std::size_t i = 0; i < legal.size(); ++i) {
      if (ex.target.probs[i] > 0.0) out.mean_cross_entropy -= ex.target.probs[i] * std::log(probs[i]);
      const double coeff = probs[i] - ex.target.probs[i];
      fs.active_ids(fs.pattern(ex.state, legal[i]), ids);
      for (int id : ids) out.gradient[static_cast<std::size_t>(id)] += coeff;
    }
  }
  const double n = static_cast<double>(batch.size());
  for (auto& g : out.gradient) g /= n;
  out.mean_cross_entropy /= n;
  return out;
}

double grad_step(FeatureSet& fs, std::span<const TrainingExample> batch, double eta) {
  if (!(eta > 0.0)) throw Error("invalid-config", "learning rate must be positive");
  const auto grad = kernels::batch_gradient(fs, batch, kernels::Exec::Parallel);
  for (int id = 0; id < fs.size(); ++id) {
    const double g = grad.gradient[static_cast<std::size_t>(id)];
    if (g != 0.0) fs.add_to_weight(id, -eta * g);
  }
  return grad.mean_cross_entropy;
}

std::vector<int> grow_features(FeatureSet& fs, std::span<const ErrorSample> samples, int count,
                               int generation) {
  // Conjunctions are built from the parents' images as they matched at the
  // anchor, so each candidate is active where its parents co-occurred.
  struct Tally {
    int hits = 0;
    std::vector<Constraint> constraints;
    std::pair<int, int> parents;
  };
  std::map<std::string, Tally> tallies;
  std::vector<int> ids;
  std::vector<std::vector<Constraint>> images;
  for (const auto& sample : samples) {
    const auto& target = sample.target;
    const auto& current = sample.current;
    if (target.actions != current.actions) throw Error("target-mismatch", "error sample");
    std::vector<std::size_t> order(target.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto error = [&](std::size_t i) { return std::abs(current.probs[i] - target.probs[i]); };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return error(a) > error(b); });
    const std::size_t take = std::min<std::size_t>(order.size(), kErrorActionsPerSample);
    for (std::size_t r = 0; r < take; ++r) {
      if (error(order[r]) == 0.0) break;
      const Pattern p = fs.pattern(sample.state, target.actions[order[r]]);
      fs.active_ids(p, ids);
      std::erase_if(ids, [&](int id) { return fs[id].is_bias(); });
      images.clear();
      for (int id : ids) images.push_back(*fs.matched_image(id, p));
      for (std::size_t a = 0; a < ids.size(); ++a) {
        for (std::size_t b = a + 1; b < ids.size(); ++b) {
          std::vector<Constraint> merged = images[a];
          merged.insert(merged.end(), images[b].begin(), images[b].end());
          std::sort(merged.begin(), merged.end());
          merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
          auto& t = tallies[orbit_key(merged)];
          if (t.hits++ == 0) {
            t.constraints = std::move(merged);
            t.parents = {ids[a], ids[b]};
          }
        }
      }
    }
  }

  std::vector<const Tally*> ranked;
  for (const auto& [key, t] : tallies) ranked.push_back(&t);
  // Map order breaks ties by key, so the ranking is deterministic.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Tally* a, const Tally* b) { return a->hits > b->hits; });

  std::vector<int> added;
  for (const Tally* t : ranked) {
    if (static_cast<int>(added.size()) >= count || fs.full()) break;
    if (auto id = fs.insert(t->constraints, generation, t->parents)) added.push_back(*id);
  }
  return added;
}

}  // namespace cogniplay
