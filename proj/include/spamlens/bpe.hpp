#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spamlens/corpus.hpp"

namespace spamlens {

// Special token ids are fixed by construction.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;

struct MergeRule {
  std::string left;
  std::string right;
  std::string output;
};

// Subword vocabulary learned by pair merging over whitespace-pretokenized
// words. Word-internal pieces carry a "##" prefix so decoded words can be
// reassembled.
struct Vocab {
  std::vector<std::string> pieces;  // dense ids; ids 0..3 are specials
  std::vector<MergeRule> merges;    // in learned order

  int piece_id(const std::string& piece) const;  // -1 when absent
  std::size_t size() const { return pieces.size(); }

  void rebuild_index();

 private:
  std::unordered_map<std::string, int> index_;
};

// Fixed-length encoded sequence.
struct TokenSeq {
  Eigen::VectorXi ids;   // length max_len
  Eigen::VectorXi mask;  // 1 for real positions, 0 for pads
  int n_real = 0;
};

// Greedy highest-frequency pair merging until vocab_size pieces exist or no
// pair occurs twice. Equal-frequency ties break by lexicographic (left,
// right) order. Training input is expected to be preprocessed text.
Vocab train_bpe(const Corpus& corpus, std::size_t vocab_size);

// [cls] + pieces + [sep], truncated so the total is never above max_len
// (the sep is forced onto the last kept slot) and padded with [pad].
// Characters missing from the vocabulary map to [unk].
TokenSeq encode(const Vocab& vocab, const std::string& text, int max_len);

// Drops specials, glues "##" continuations onto the preceding piece and
// joins words with single spaces.
std::string decode(const Vocab& vocab, const TokenSeq& seq);

// Splits a word into vocabulary pieces ("##" form), applying learned merges
// in order. Unknown characters surface as [unk] ids.
std::vector<int> word_piece_ids(const Vocab& vocab, const std::string& word);

// Text-file persistence: a versioned header, one piece per line in id order,
// then a merge-rules section.
void save_vocab(const Vocab& vocab, const std::string& path);
Vocab load_vocab(const std::string& path);

}  // namespace spamlens
