#include "cogniplay/kernels.hpp"

#include <cmath>

#include <omp.h>

namespace cogniplay::kernels {
namespace {

struct SampleGradient {
  std::vector<std::pair<int, double>> terms;  // (feature id, coefficient), id-sorted
  double cross_entropy = 0.0;
};

SampleGradient sample_gradient(const FeatureSet& fs, const TrainingExample& ex) {
  const auto legal = ex.state.legal_actions();
  if (ex.target.actions != legal || ex.target.probs.size() != legal.size()) {
    throw Error("target-mismatch", "target is not over the legal actions");
  }
  const auto probs = softmax(action_scores(fs, ex.state, legal));
  std::vector<double> dense(static_cast<std::size_t>(fs.size()), 0.0);
  std::vector<char> touched(static_cast<std::size_t>(fs.size()), 0);
  std::vector<int> ids;
  SampleGradient out;
  for (std::size_t i = 0; i < legal.size(); ++i) {
    if (ex.target.probs[i] > 0.0) out.cross_entropy -= ex.target.probs[i] * std::log(probs[i]);
    const double coeff = probs[i] - ex.target.probs[i];
    fs.active_ids(fs.pattern(ex.state, legal[i]), ids);
    for (int id : ids) {
      dense[static_cast<std::size_t>(id)] += coeff;
      touched[static_cast<std::size_t>(id)] = 1;
    }
  }
  for (int id = 0; id < fs.size(); ++id) {
    if (touched[static_cast<std::size_t>(id)]) {
      out.terms.emplace_back(id, dense[static_cast<std::size_t>(id)]);
    }
  }
  return out;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

BatchGradient batch_gradient(const FeatureSet& fs, std::span<const TrainingExample> batch,
                             Exec exec) {
  std::vector<SampleGradient> partials(batch.size());
  for_each_index(batch.size(), exec,
                 [&](std::size_t i) { partials[i] = sample_gradient(fs, batch[i]); });

  BatchGradient out;
  out.gradient.assign(static_cast<std::size_t>(fs.size()), 0.0);
  if (batch.empty()) return out;
  for (const auto& partial : partials) {
    for (const auto& [id, value] : partial.terms) out.gradient[static_cast<std::size_t>(id)] += value;
    out.mean_cross_entropy += partial.cross_entropy;
  }
  const double n = static_cast<double>(batch.size());
  for (auto& g : out.gradient) g /= n;
  out.mean_cross_entropy /= n;
  return out;
}

}  // namespace cogniplay::kernels
