#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spamlens {

enum class Label : int { ham = 0, spam = 1 };

enum class Origin : int { original = 0, augmented = 1 };

const char* label_name(Label label);
Label label_from_name(const std::string& name);

struct Message {
  int id = 0;  // 0-based load order
  std::string text;
  Label label = Label::ham;
  Origin origin = Origin::original;
};

struct Corpus {
  std::vector<Message> messages;

  std::size_t size() const { return messages.size(); }
  bool empty() const { return messages.empty(); }
};

// Reads a `label<TAB>text` file, one record per line. Invalid UTF-8 byte
// sequences are replaced with U+FFFD. Unknown labels and empty texts are
// errors naming the offending line.
Corpus load_tsv(const std::string& path);

// Writes messages back in the same `label<TAB>text` format.
void save_tsv(const Corpus& corpus, const std::string& path);

// (ham count, spam count)
std::pair<std::size_t, std::size_t> class_counts(const Corpus& corpus);

struct SplitResult {
  Corpus train;
  Corpus test;
};

// Seeded shuffle then cut at floor(train_fraction * N). Messages keep their
// original ids so the two sides partition the input exactly. With
// `stratified` the cut is applied per class before the final seeded shuffle.
SplitResult split(const Corpus& corpus, double train_fraction,
                  std::uint64_t seed, bool stratified = false);

}  // namespace spamlens
