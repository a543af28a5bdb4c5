#include "spamlens/augment.hpp"

#include <algorithm>
#include <unordered_set>

#include "spamlens/errors.hpp"

namespace spamlens {

void AugmentConfig::validate(const std::string& source_lang) const {
  if (languages.empty()) {
    throw UsageError("augment: language list must not be empty");
  }
  std::unordered_set<std::string> seen;
  for (const auto& lang : languages) {
    if (lang == source_lang) {
      throw UsageError("augment: language list must not contain the source");
    }
    if (!seen.insert(lang).second) {
      throw UsageError("augment: duplicate language '" + lang + "'");
    }
  }
  if (max_rounds < 1) throw UsageError("augment: max_rounds must be >= 1");
}

std::string back_translate(const std::string& text,
                           const TranslationProvider& provider,
                           const std::string& target_lang) {
  if (text.empty()) throw DataError("back_translate: empty text");
  std::string foreign;
  try {
    foreign = provider.translate(text, "en", target_lang);
  } catch (const ProviderError& e) {
    throw ProviderError(std::string(e.what()) + " [lang=" + target_lang + "]");
  }
  try {
    return provider.translate(foreign, target_lang, "en");
  } catch (const ProviderError& e) {
    throw ProviderError(std::string(e.what()) + " [lang=" + target_lang + "]");
  }
}

std::string back_translate(const std::string& text,
                           const TranslationProvider& provider,
                           const AugmentConfig& config, Rng& rng) {
  config.validate();
  const auto& lang = config.languages[rng.bounded(config.languages.size())];
  return back_translate(text, provider, lang);
}

Corpus balance(const Corpus& corpus, const TranslationProvider& provider,
               const AugmentConfig& config) {
  config.validate();
  const auto [ham, spam] = class_counts(corpus);
  Corpus out = corpus;
  if (ham == spam) return out;

  const Label minority = ham < spam ? Label::ham : Label::spam;
  std::size_t deficit = ham < spam ? spam - ham : ham - spam;

  std::vector<std::size_t> minority_idx;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.messages[i].label == minority) minority_idx.push_back(i);
  }
  if (minority_idx.empty()) {
    throw DataError("balance: minority class has no messages");
  }

  auto append = [&](std::string text) {
    Message msg;
    msg.id = static_cast<int>(out.messages.size());
    msg.text = std::move(text);
    msg.label = minority;
    msg.origin = Origin::augmented;
    out.messages.push_back(std::move(msg));
    --deficit;
  };

  std::size_t lang_cursor = 0;
  for (int round = 0; round < config.max_rounds && deficit > 0; ++round) {
    std::vector<std::size_t> order = minority_idx;
    Rng round_rng(Rng::derive(config.seed, static_cast<std::uint64_t>(round)));
    round_rng.shuffle(order);
    for (std::size_t idx : order) {
      if (deficit == 0) break;
      const auto& lang = config.languages[lang_cursor % config.languages.size()];
      ++lang_cursor;
      append(back_translate(corpus.messages[idx].text, provider, lang));
    }
  }

  if (deficit > 0) {
    if (!config.duplicate_fill) {
      throw DataError("balance: max_rounds exhausted before parity");
    }
    Rng dup_rng(Rng::derive(config.seed, 0xD00D));
    while (deficit > 0) {
      const auto pick = minority_idx[dup_rng.bounded(minority_idx.size())];
      append(corpus.messages[pick].text);
    }
  }
  return out;
}

}  // namespace spamlens
