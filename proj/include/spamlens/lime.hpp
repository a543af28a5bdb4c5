#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "spamlens/explain.hpp"

namespace spamlens {

// Black-box text classifier contract: (ham, spam) probabilities summing to 1.
using TextProbaFn =
    std::function<std::array<double, 2>(const std::string& text)>;

struct LimeConfig {
  int num_samples = 1000;
  int num_features = 15;      // K: cap on reported words
  double kernel_width = 25.0; // sigma
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Local linear surrogate around one prediction. Perturbations toggle the
// instance's distinct words (each sample removes k random words, k uniform
// in [1, d]); samples are weighted by exp(-D^2 / sigma^2) with D the cosine
// distance between the presence vector and all-ones. A weighted ridge fit on
// all d features picks the top-K words by |coefficient|, which are refit on
// their own to produce the reported signed coefficients. Each sample's RNG
// stream derives from (seed, sample index), so results do not depend on
// evaluation order.
Explanation lime_explain(const TextProbaFn& model,
                         const std::string& clean_text, Label target_class,
                         const LimeConfig& config);

// Kernel weight for a perturbation keeping `kept` of `total` words.
double lime_proximity(int kept, int total, double kernel_width);

}  // namespace spamlens
