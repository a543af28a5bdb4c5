#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "spamlens/bpe.hpp"
#include "spamlens/checkpoint.hpp"
#include "spamlens/classifier.hpp"
#include "spamlens/errors.hpp"
#include "spamlens/train.hpp"

using namespace spamlens;

namespace {

Corpus small_corpus() {
  return testutil::make_corpus({
      {"win free cash now", Label::spam},
      {"claim your prize today", Label::spam},
      {"free voucher win cash", Label::spam},
      {"meet me at home", Label::ham},
      {"dinner at six tonight", Label::ham},
      {"see you after class", Label::ham},
      {"running late sorry love", Label::ham},
      {"call me when free", Label::ham},
  });
}

const char* kProbes[] = {"win cash", "dinner tonight", "free prize claim",
                         "see you soon", "unknown words here"};

void check_bitwise_roundtrip(const TextClassifier& original,
                             const std::string& path) {
  const Checkpoint loaded = load_checkpoint(path);
  const auto restored = classifier_from_checkpoint(loaded);
  CHECK(restored->kind() == original.kind());
  for (const char* probe : kProbes) {
    const auto before = original.predict_proba(probe);
    const auto after = restored->predict_proba(probe);
    CHECK(before[0] == after[0]);  // bitwise, no tolerance
    CHECK(before[1] == after[1]);
  }
}

}  // namespace

TEST_CASE("checkpoint container round-trips tensors and manifest") {
  testutil::TempDir dir("ckpt");
  Checkpoint ckpt;
  ckpt.model_kind = "nb";
  ckpt.config = {{"seed", 7}};
  ckpt.meta = {{"alpha", 1.0}};
  Eigen::MatrixXf a(2, 3);
  a << 1.5f, -2.25f, 0.0f, 3.0f, 4.5f, -6.75f;
  Eigen::MatrixXf b(1, 1);
  b << 42.0f;
  ckpt.tensors.emplace_back("a", a);
  ckpt.tensors.emplace_back("b", b);

  const std::string path = dir.file("model.ckpt");
  save_checkpoint(ckpt, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.model_kind == "nb");
  CHECK(loaded.config.at("seed") == 7);
  CHECK(loaded.meta.at("alpha") == 1.0);
  CHECK(loaded.tensor("a") == a);
  CHECK(loaded.tensor("b") == b);
  CHECK(loaded.has_tensor("a"));
  CHECK_FALSE(loaded.has_tensor("zzz"));
  CHECK_THROWS_AS(loaded.tensor("zzz"), DataError);
}

TEST_CASE("checkpoint loader rejects corrupted files") {
  testutil::TempDir dir("ckpt");
  Checkpoint ckpt;
  ckpt.model_kind = "svm";
  Eigen::MatrixXf t(2, 2);
  t << 1, 2, 3, 4;
  ckpt.tensors.emplace_back("w", t);
  const std::string path = dir.file("model.ckpt");
  save_checkpoint(ckpt, path);

  SUBCASE("wrong magic") {
    std::string bytes = testutil::read_file(path);
    bytes[0] = 'X';
    testutil::write_file(path, bytes);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("wrong format version") {
    std::string bytes = testutil::read_file(path);
    bytes[4] = 9;  // version field
    testutil::write_file(path, bytes);
    CHECK_THROWS_WITH_AS(
        load_checkpoint(path),
        doctest::Contains("format version"), DataError);
  }
  SUBCASE("truncated payload") {
    std::string bytes = testutil::read_file(path);
    bytes.resize(bytes.size() - 4);
    testutil::write_file(path, bytes);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("trailing garbage") {
    std::string bytes = testutil::read_file(path);
    bytes += "junk";
    testutil::write_file(path, bytes);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(dir.file("nope.ckpt")), DataError);
  }
}

TEST_CASE("naive bayes checkpoint round-trip is bitwise") {
  testutil::TempDir dir("ckpt");
  const NaiveBayesClassifier original(nb_train(small_corpus(), 1.0));
  const std::string path = dir.file("nb.ckpt");
  save_checkpoint(to_checkpoint(original, {{"seed", 1}}), path);
  check_bitwise_roundtrip(original, path);
}

TEST_CASE("knn checkpoint round-trip is bitwise") {
  testutil::TempDir dir("ckpt");
  const KnnClassifier original(knn_fit(small_corpus(), 3));
  const std::string path = dir.file("knn.ckpt");
  save_checkpoint(to_checkpoint(original, {{"seed", 1}}), path);
  check_bitwise_roundtrip(original, path);
}

TEST_CASE("svm checkpoint round-trip is bitwise") {
  testutil::TempDir dir("ckpt");
  const SvmClassifier original(svm_train(small_corpus(), 1e-3, 6, 9));
  const std::string path = dir.file("svm.ckpt");
  save_checkpoint(to_checkpoint(original, {{"seed", 9}}), path);
  check_bitwise_roundtrip(original, path);
}

TEST_CASE("transformer checkpoint round-trip is bitwise") {
  testutil::TempDir dir("ckpt");
  const Corpus corpus = small_corpus();
  const Vocab vocab = train_bpe(corpus, 110);

  ModelConfig mc;
  mc.n_layers = 1;
  mc.d_model = 16;
  mc.n_heads = 2;
  mc.d_ff = 32;
  mc.max_len = 16;
  mc.vocab_size = static_cast<int>(vocab.size());

  std::vector<TokenSeq> seqs;
  std::vector<int> labels;
  for (const Message& msg : corpus.messages) {
    seqs.push_back(encode(vocab, msg.text, mc.max_len));
    labels.push_back(static_cast<int>(msg.label));
  }
  TrainConfig tc;
  tc.epochs = 1;
  tc.train_batch = 4;
  tc.seed = 2;
  auto result = train_loop(init_params<float>(mc, 2), seqs, labels, {}, {}, tc);

  const TransformerClassifier original(std::move(result.params), vocab);
  const std::string path = dir.file("transformer.ckpt");
  save_checkpoint(to_checkpoint(original, {{"seed", 2}}), path);
  check_bitwise_roundtrip(original, path);

  // the embedded tokenizer must reproduce the original encoding
  const Checkpoint loaded = load_checkpoint(path);
  const auto restored = classifier_from_checkpoint(loaded);
  const auto* transformer =
      dynamic_cast<const TransformerClassifier*>(restored.get());
  REQUIRE(transformer != nullptr);
  const TokenSeq a = encode(vocab, "win free cash", 16);
  const TokenSeq b = encode(transformer->vocab(), "win free cash", 16);
  CHECK(a.ids == b.ids);
}

TEST_CASE("unknown model kind is rejected") {
  Checkpoint ckpt;
  ckpt.model_kind = "boosted_trees";
  CHECK_THROWS_AS(classifier_from_checkpoint(ckpt), DataError);
}
