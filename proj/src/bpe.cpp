#include "spamlens/bpe.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "spamlens/errors.hpp"

namespace spamlens {

namespace {

const char* kSpecials[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
const char* kVocabHeader = "# spamlens-vocab v1";
const char* kMergesHeader = "# merges";

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

// Initial segmentation: first character plain, the rest "##"-prefixed.
std::vector<std::string> seed_pieces(const std::string& word) {
  std::vector<std::string> pieces;
  for (std::size_t i = 0; i < word.size(); ++i) {
    pieces.push_back(i == 0 ? std::string(1, word[i])
                            : "##" + std::string(1, word[i]));
  }
  return pieces;
}

std::string merge_strings(const std::string& left, const std::string& right) {
  std::string tail = right.rfind("##", 0) == 0 ? right.substr(2) : right;
  return left + tail;
}

}  // namespace

int Vocab::piece_id(const std::string& piece) const {
  auto it = index_.find(piece);
  return it == index_.end() ? -1 : it->second;
}

void Vocab::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    index_.emplace(pieces[i], static_cast<int>(i));
  }
}

Vocab train_bpe(const Corpus& corpus, std::size_t vocab_size) {
  if (corpus.empty()) throw DataError("train_bpe: empty corpus");

  // word type -> frequency, in deterministic first-seen order
  std::vector<std::pair<std::string, long>> word_freq;
  std::unordered_map<std::string, std::size_t> word_slot;
  for (const Message& msg : corpus.messages) {
    for (auto& word : split_words(msg.text)) {
      auto [it, inserted] = word_slot.try_emplace(word, word_freq.size());
      if (inserted) {
        word_freq.emplace_back(word, 1);
      } else {
        ++word_freq[it->second].second;
      }
    }
  }
  if (word_freq.empty()) throw DataError("train_bpe: corpus has no words");

  // current segmentation per word type
  std::vector<std::vector<std::string>> segs(word_freq.size());
  std::set<std::string> alphabet;  // ordered -> deterministic piece ids
  for (std::size_t w = 0; w < word_freq.size(); ++w) {
    segs[w] = seed_pieces(word_freq[w].first);
    for (const auto& p : segs[w]) alphabet.insert(p);
  }

  Vocab vocab;
  for (const char* s : kSpecials) vocab.pieces.emplace_back(s);
  for (const auto& p : alphabet) vocab.pieces.push_back(p);
  if (vocab_size <= vocab.pieces.size()) {
    throw UsageError("train_bpe: vocab_size " + std::to_string(vocab_size) +
                     " too small; need > " +
                     std::to_string(vocab.pieces.size()));
  }
  std::set<std::string> known(vocab.pieces.begin(), vocab.pieces.end());

  while (vocab.pieces.size() < vocab_size) {
    // count adjacent pairs across all word types
    std::map<std::pair<std::string, std::string>, long> pair_freq;
    for (std::size_t w = 0; w < word_freq.size(); ++w) {
      const long freq = word_freq[w].second;
      const auto& seg = segs[w];
      for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
        pair_freq[{seg[i], seg[i + 1]}] += freq;
      }
    }
    // best = highest frequency, ties to the lexicographically smallest pair;
    // std::map iteration order hands us tie-breaking for free
    std::pair<std::string, std::string> best;
    long best_freq = 0;
    for (const auto& [pair, freq] : pair_freq) {
      if (freq > best_freq) {
        best = pair;
        best_freq = freq;
      }
    }
    if (best_freq < 2) break;  // no pair repeats

    MergeRule rule{best.first, best.second,
                   merge_strings(best.first, best.second)};
    for (auto& seg : segs) {
      std::vector<std::string> next;
      next.reserve(seg.size());
      for (std::size_t i = 0; i < seg.size(); ++i) {
        if (i + 1 < seg.size() && seg[i] == rule.left &&
            seg[i + 1] == rule.right) {
          next.push_back(rule.output);
          ++i;
        } else {
          next.push_back(seg[i]);
        }
      }
      seg = std::move(next);
    }
    if (known.insert(rule.output).second) vocab.pieces.push_back(rule.output);
    vocab.merges.push_back(std::move(rule));
  }

  vocab.rebuild_index();
  return vocab;
}

std::vector<int> word_piece_ids(const Vocab& vocab, const std::string& word) {
  std::vector<std::string> seg = seed_pieces(word);
  std::map<std::pair<std::string, std::string>, std::size_t> rank;
  for (std::size_t r = 0; r < vocab.merges.size(); ++r) {
    rank.emplace(std::make_pair(vocab.merges[r].left, vocab.merges[r].right),
                 r);
  }
  // repeatedly apply the earliest-learned applicable merge
  while (seg.size() > 1) {
    std::size_t best_rank = vocab.merges.size();
    std::size_t best_pos = 0;
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
      auto it = rank.find({seg[i], seg[i + 1]});
      if (it != rank.end() && it->second < best_rank) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank == vocab.merges.size()) break;
    seg[best_pos] = merge_strings(seg[best_pos], seg[best_pos + 1]);
    seg.erase(seg.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
  }
  std::vector<int> ids;
  ids.reserve(seg.size());
  for (const auto& piece : seg) {
    const int id = vocab.piece_id(piece);
    ids.push_back(id < 0 ? kUnkId : id);
  }
  return ids;
}

TokenSeq encode(const Vocab& vocab, const std::string& text, int max_len) {
  if (max_len < 3) throw UsageError("encode: max_len must be >= 3");

  std::vector<int> content;
  for (const auto& word : split_words(text)) {
    // per-character unk fallback happens inside word_piece_ids; characters
    // never seen at training time cannot merge and become [UNK]
    for (int id : word_piece_ids(vocab, word)) content.push_back(id);
  }

  TokenSeq seq;
  seq.ids = Eigen::VectorXi::Constant(max_len, kPadId);
  seq.mask = Eigen::VectorXi::Zero(max_len);
  const auto keep =
      std::min<std::size_t>(content.size(), static_cast<std::size_t>(max_len) - 2);
  seq.ids(0) = kClsId;
  for (std::size_t i = 0; i < keep; ++i) {
    seq.ids(static_cast<int>(i) + 1) = content[i];
  }
  seq.ids(static_cast<int>(keep) + 1) = kSepId;
  seq.n_real = static_cast<int>(keep) + 2;
  for (int i = 0; i < seq.n_real; ++i) seq.mask(i) = 1;
  return seq;
}

std::string decode(const Vocab& vocab, const TokenSeq& seq) {
  std::string out;
  for (int i = 0; i < seq.ids.size(); ++i) {
    const int id = seq.ids(i);
    if (id < 0 || id >= static_cast<int>(vocab.size())) {
      throw DataError("decode: id " + std::to_string(id) + " out of range");
    }
    if (id == kPadId || id == kClsId || id == kSepId) continue;
    const std::string& piece = vocab.pieces[static_cast<std::size_t>(id)];
    if (piece.rfind("##", 0) == 0) {
      if (out.empty()) throw DataError("decode: continuation piece at start");
      out += piece.substr(2);
    } else {
      if (!out.empty()) out.push_back(' ');
      out += piece;
    }
  }
  return out;
}

void save_vocab(const Vocab& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocab file: " + path);
  out << kVocabHeader << '\n';
  for (const auto& piece : vocab.pieces) out << piece << '\n';
  out << kMergesHeader << '\n';
  for (const auto& rule : vocab.merges) {
    out << rule.left << ' ' << rule.right << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

Vocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocab file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kVocabHeader) {
    throw DataError("vocab file has wrong header/version: " + path);
  }
  Vocab vocab;
  bool in_merges = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == kMergesHeader) {
      in_merges = true;
      continue;
    }
    if (!in_merges) {
      vocab.pieces.push_back(line);
    } else {
      const std::size_t space = line.find(' ');
      if (space == std::string::npos) {
        throw DataError("malformed merge rule in " + path);
      }
      MergeRule rule;
      rule.left = line.substr(0, space);
      rule.right = line.substr(space + 1);
      rule.output = merge_strings(rule.left, rule.right);
      vocab.merges.push_back(std::move(rule));
    }
  }
  if (vocab.pieces.size() < 4) throw DataError("vocab file truncated: " + path);
  vocab.rebuild_index();
  return vocab;
}

}  // namespace spamlens
