#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spamlens/corpus.hpp"

namespace spamlens {

struct WordAttribution {
  std::string word;
  double coefficient = 0.0;
};

// Per-word signed attribution, sorted by descending |coefficient|.
struct Explanation {
  std::string method;  // "lime" or "intgrad"
  Label target_class = Label::spam;
  double prediction = 0.0;  // model probability of target_class on the input
  std::vector<WordAttribution> attributions;
  double raw_sum = 0.0;  // intgrad only: sum of unnormalized attributions
  bool has_raw_sum = false;
};

// Adds each "##" continuation piece's attribution onto the preceding word
// and drops the structural specials ([PAD]/[CLS]/[SEP]).
std::vector<WordAttribution> merge_subwords(
    const std::vector<std::pair<std::string, double>>& piece_attributions);

void sort_by_magnitude(std::vector<WordAttribution>& attributions);

nlohmann::json explanation_to_json(const Explanation& explanation);

// Standalone page highlighting positive words green and negative words red,
// intensity scaled by |coefficient|.
std::string explanation_to_html(const Explanation& explanation);

}  // namespace spamlens
