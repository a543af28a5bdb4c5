#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spamlens/corpus.hpp"
#include "spamlens/rng.hpp"
#include "spamlens/translate.hpp"

namespace spamlens {

struct AugmentConfig {
  std::vector<std::string> languages = {"de", "fr", "es"};
  std::uint64_t seed = 0;
  int max_rounds = 8;
  // When rounds run out before parity, fill the remainder by seeded
  // duplication of minority originals. Disabling this makes an exhausted
  // round budget an error.
  bool duplicate_fill = true;

  void validate(const std::string& source_lang = "en") const;
};

// Round trip en -> target_lang -> en through the provider.
std::string back_translate(const std::string& text,
                           const TranslationProvider& provider,
                           const std::string& target_lang);

// Target language drawn by seeded RNG from config.languages.
std::string back_translate(const std::string& text,
                           const TranslationProvider& provider,
                           const AugmentConfig& config, Rng& rng);

// Oversamples the minority class to exact parity: seeded shuffled rounds of
// back translation (one variant per original per round, cycling through
// config.languages), then seeded duplication for any remaining deficit.
// Originals are preserved untouched; appended messages carry
// origin=augmented and ids continuing from the input.
Corpus balance(const Corpus& corpus, const TranslationProvider& provider,
               const AugmentConfig& config);

}  // namespace spamlens
