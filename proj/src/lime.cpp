#include "spamlens/lime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spamlens/errors.hpp"
#include "spamlens/ridge.hpp"
#include "spamlens/rng.hpp"

namespace spamlens {

void LimeConfig::validate() const {
  if (num_samples < 10) throw UsageError("lime: num_samples must be >= 10");
  if (num_features < 1) throw UsageError("lime: num_features must be >= 1");
  if (!(kernel_width > 0.0)) throw UsageError("lime: kernel_width must be > 0");
  if (ridge_lambda < 0.0) throw UsageError("lime: ridge_lambda must be >= 0");
}

double lime_proximity(int kept, int total, double kernel_width) {
  // cosine distance between the binary presence vector and all-ones
  const double dist =
      kept == 0 ? 1.0 : 1.0 - std::sqrt(double(kept) / double(total));
  return std::exp(-(dist * dist) / (kernel_width * kernel_width));
}

namespace {

std::vector<std::string> distinct_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  std::string word;
  while (in >> word) {
    if (std::find(words.begin(), words.end(), word) == words.end()) {
      words.push_back(word);
    }
  }
  return words;
}

std::string render(const std::vector<std::string>& words,
                   const std::vector<int>& keep) {
  std::string out;
  for (std::size_t j = 0; j < words.size(); ++j) {
    if (keep[j] == 0) continue;
    if (!out.empty()) out.push_back(' ');
    out += words[j];
  }
  return out;
}

double query(const TextProbaFn& model, const std::string& text, int target) {
  const auto proba = model(text);
  const double sum = proba[0] + proba[1];
  if (!(proba[0] >= 0.0 && proba[1] >= 0.0) || std::abs(sum - 1.0) > 1e-6) {
    throw DataError("lime: model returned invalid probabilities");
  }
  return proba[static_cast<std::size_t>(target)];
}

}  // namespace

Explanation lime_explain(const TextProbaFn& model,
                         const std::string& clean_text, Label target_class,
                         const LimeConfig& config) {
  config.validate();
  const std::vector<std::string> words = distinct_words(clean_text);
  const int d = static_cast<int>(words.size());
  if (d == 0) throw DataError("lime: text has no words");
  const int target = static_cast<int>(target_class);

  // row 0 is the unperturbed instance, then num_samples perturbations
  const int rows = config.num_samples + 1;
  Eigen::MatrixXd features(rows, d);
  Eigen::VectorXd targets(rows);
  Eigen::VectorXd weights(rows);

  features.row(0).setOnes();
  targets(0) = query(model, render(words, std::vector<int>(words.size(), 1)),
                     target);
  weights(0) = 1.0;

  std::vector<int> positions(words.size());
  for (int s = 0; s < config.num_samples; ++s) {
    Rng rng(Rng::derive(config.seed, 0x11E0 + static_cast<std::uint64_t>(s)));
    const int n_remove = 1 + static_cast<int>(rng.bounded(
                                 static_cast<std::uint64_t>(d)));
    std::iota(positions.begin(), positions.end(), 0);
    // partial Fisher-Yates: first n_remove entries are the removed words
    for (int i = 0; i < n_remove; ++i) {
      const auto j = i + static_cast<int>(rng.bounded(
                             static_cast<std::uint64_t>(d - i)));
      std::swap(positions[static_cast<std::size_t>(i)],
                positions[static_cast<std::size_t>(j)]);
    }
    std::vector<int> keep(words.size(), 1);
    for (int i = 0; i < n_remove; ++i) {
      keep[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] = 0;
    }
    for (int j = 0; j < d; ++j) {
      features(s + 1, j) = keep[static_cast<std::size_t>(j)];
    }
    targets(s + 1) = query(model, render(words, keep), target);
    weights(s + 1) = lime_proximity(d - n_remove, d, config.kernel_width);
  }

  // fit on all words, select top-K by |coefficient|, then refit on those
  const RidgeFit full = weighted_ridge(features, targets, weights,
                                       config.ridge_lambda);
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(full.coef(a)) > std::abs(full.coef(b));
  });
  const int k = std::min(config.num_features, d);
  std::vector<int> selected(order.begin(), order.begin() + k);
  std::sort(selected.begin(), selected.end());

  Eigen::MatrixXd sub(rows, k);
  for (int j = 0; j < k; ++j) {
    sub.col(j) = features.col(selected[static_cast<std::size_t>(j)]);
  }
  const RidgeFit refit = weighted_ridge(sub, targets, weights,
                                        config.ridge_lambda);

  Explanation explanation;
  explanation.method = "lime";
  explanation.target_class = target_class;
  explanation.prediction = targets(0);
  for (int j = 0; j < k; ++j) {
    explanation.attributions.push_back(
        {words[static_cast<std::size_t>(selected[static_cast<std::size_t>(j)])],
         refit.coef(j)});
  }
  sort_by_magnitude(explanation.attributions);
  return explanation;
}

}  // namespace spamlens
