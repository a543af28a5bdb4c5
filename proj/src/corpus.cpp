#include "spamlens/corpus.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spamlens/errors.hpp"
#include "spamlens/rng.hpp"

namespace spamlens {

namespace {

// Replaces invalid UTF-8 sequences with U+FFFD and leaves valid text alone.
std::string sanitize_utf8(const std::string& in) {
  static const char kReplacement[] = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    unsigned char c = static_cast<unsigned char>(in[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      len = 4;
    }
    bool ok = len > 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      ok = (static_cast<unsigned char>(in[i + k]) & 0xC0) == 0x80;
    }
    if (ok) {
      out.append(in, i, len);
      i += len;
    } else {
      out.append(kReplacement, 3);
      ++i;
    }
  }
  return out;
}

}  // namespace

const char* label_name(Label label) {
  return label == Label::ham ? "ham" : "spam";
}

Label label_from_name(const std::string& name) {
  if (name == "ham") return Label::ham;
  if (name == "spam") return Label::spam;
  throw DataError("unknown label '" + name + "'");
}

Corpus load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path);

  Corpus corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;  // blank lines carry no record
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("missing tab separator at line " +
                      std::to_string(line_no));
    }
    const std::string label_str = line.substr(0, tab);
    if (label_str != "ham" && label_str != "spam") {
      throw DataError("unknown label at line " + std::to_string(line_no));
    }
    std::string text = sanitize_utf8(line.substr(tab + 1));
    if (text.empty()) {
      throw DataError("empty text at line " + std::to_string(line_no));
    }
    Message msg;
    msg.id = static_cast<int>(corpus.messages.size());
    msg.text = std::move(text);
    msg.label = label_from_name(label_str);
    msg.origin = Origin::original;
    corpus.messages.push_back(std::move(msg));
  }
  return corpus;
}

void save_tsv(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const Message& msg : corpus.messages) {
    out << label_name(msg.label) << '\t' << msg.text << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::pair<std::size_t, std::size_t> class_counts(const Corpus& corpus) {
  std::size_t ham = 0;
  std::size_t spam = 0;
  for (const Message& msg : corpus.messages) {
    (msg.label == Label::ham ? ham : spam) += 1;
  }
  return {ham, spam};
}

SplitResult split(const Corpus& corpus, double train_fraction,
                  std::uint64_t seed, bool stratified) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw UsageError("train_fraction must be in (0, 1]");
  }
  if (corpus.empty()) throw DataError("cannot split an empty corpus");

  Rng rng(Rng::derive(seed, 0xC0'FFEE));
  SplitResult result;

  auto cut = [&](std::vector<std::size_t>& order, std::size_t n_train) {
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Message& msg = corpus.messages[order[k]];
      (k < n_train ? result.train : result.test).messages.push_back(msg);
    }
  };

  if (!stratified) {
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(corpus.size())));
    cut(order, n_train);
    return result;
  }

  for (Label label : {Label::ham, Label::spam}) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus.messages[i].label == label) order.push_back(i);
    }
    rng.shuffle(order);
    const auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(order.size())));
    cut(order, n_train);
  }
  // per-class blocks are concatenated; mix the train side once more
  rng.shuffle(result.train.messages);
  rng.shuffle(result.test.messages);
  return result;
}

}  // namespace spamlens
