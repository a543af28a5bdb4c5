#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace spamlens {

// Text-to-text translation contract used by the augmentation stage.
class TranslationProvider {
 public:
  virtual ~TranslationProvider() = default;

  // Translates `text` from `source_lang` to `target_lang`. Implementations
  // throw ProviderError on failure.
  virtual std::string translate(const std::string& text,
                                const std::string& source_lang,
                                const std::string& target_lang) const = 0;
};

// Deterministic in-tree provider backed by fixed bilingual word tables.
// Round trips (en -> L -> en) substitute synonyms for covered words and
// leave everything else untouched, which mimics the paraphrasing effect of
// a real translation service without any network access.
class OfflineProvider : public TranslationProvider {
 public:
  OfflineProvider();

  std::string translate(const std::string& text,
                        const std::string& source_lang,
                        const std::string& target_lang) const override;

  std::vector<std::string> supported_languages() const;

 private:
  struct LangTable {
    std::unordered_map<std::string, std::string> to_foreign;
    std::unordered_map<std::string, std::string> to_english;
  };
  std::unordered_map<std::string, LangTable> tables_;
};

struct RestProviderConfig {
  std::string endpoint;  // e.g. http://localhost:5000/translate
  std::string api_key;   // optional, sent as the `api_key` body field
  int timeout_ms = 5000;
  int retries = 2;  // additional attempts after the first failure
};

// HTTP client for a generic translation REST endpoint. The request is a POST
// with JSON body {"q": text, "source": code, "target": code} and the response
// must carry {"translatedText": string}.
class RestProvider : public TranslationProvider {
 public:
  explicit RestProvider(RestProviderConfig config);

  std::string translate(const std::string& text,
                        const std::string& source_lang,
                        const std::string& target_lang) const override;

 private:
  RestProviderConfig config_;
  std::string host_;
  std::string path_;
  int port_ = 80;
};

}  // namespace spamlens
