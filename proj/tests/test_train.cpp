#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "spamlens/bpe.hpp"
#include "spamlens/preprocess.hpp"
#include "spamlens/train.hpp"

using namespace spamlens;

namespace {

// 32 separable messages, half spammy half chatty
Corpus toy_corpus() {
  std::vector<std::pair<std::string, Label>> rows;
  const char* spam[] = {"win cash prize now", "free cash offer win",
                        "claim free prize today", "urgent cash win offer"};
  const char* ham[] = {"see you at home", "dinner with mum tonight",
                       "meet me after class", "running late love you"};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      rows.push_back({preprocess(spam[i]), Label::spam});
      rows.push_back({preprocess(ham[j]), Label::ham});
    }
  }
  return testutil::make_corpus(rows);
}

struct Encoded {
  Vocab vocab;
  std::vector<TokenSeq> seqs;
  std::vector<int> labels;
};

Encoded encode_corpus(const Corpus& corpus, int max_len) {
  Encoded out;
  out.vocab = train_bpe(corpus, 120);
  for (const Message& msg : corpus.messages) {
    out.seqs.push_back(encode(out.vocab, msg.text, max_len));
    out.labels.push_back(static_cast<int>(msg.label));
  }
  return out;
}

ModelConfig toy_model(int vocab_size) {
  ModelConfig config;
  config.n_layers = 1;
  config.d_model = 16;
  config.n_heads = 2;
  config.d_ff = 32;
  config.max_len = 12;
  config.vocab_size = vocab_size;
  config.dropout_rate = 0.1;
  return config;
}

std::string params_bytes(ModelParams<float>& params) {
  std::string bytes;
  for (const auto& view : param_views(params)) {
    bytes.append(reinterpret_cast<const char*>(view.data),
                 static_cast<std::size_t>(view.size()) * sizeof(float));
  }
  return bytes;
}

}  // namespace

TEST_CASE("cross_entropy values and stability") {
  Mat<double> logits(1, 2);
  logits << 0.0, 0.0;
  CHECK(cross_entropy(logits, {0}).loss == doctest::Approx(std::log(2.0)));

  logits << 1000.0, 0.0;
  const auto stable = cross_entropy(logits, {0});
  CHECK(stable.loss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::isfinite(stable.dlogits(0, 0)));

  CHECK_THROWS_AS(cross_entropy(logits, {5}), DataError);
  CHECK_THROWS_AS(cross_entropy(logits, {0, 1}), DataError);
}

TEST_CASE("cross_entropy gradient matches finite differences") {
  Rng rng(8);
  Mat<double> logits(4, 2);
  for (Eigen::Index i = 0; i < 4; ++i) {
    logits(i, 0) = rng.normal();
    logits(i, 1) = rng.normal();
  }
  const std::vector<int> labels = {0, 1, 1, 0};
  const auto result = cross_entropy(logits, labels);
  const double step = 1e-6;
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      Mat<double> up = logits, down = logits;
      up(i, j) += step;
      down(i, j) -= step;
      const double numeric = (cross_entropy(up, labels).loss -
                              cross_entropy(down, labels).loss) /
                             (2.0 * step);
      CHECK(result.dlogits(i, j) == doctest::Approx(numeric).epsilon(1e-8));
    }
  }
}

TEST_CASE("adamw step traces the update equations") {
  ModelConfig config;
  config.n_layers = 1;
  config.d_model = 2;
  config.n_heads = 1;
  config.d_ff = 2;
  config.max_len = 3;
  config.vocab_size = 5;
  ModelParams<float> params = init_params<float>(config, 0);
  ModelParams<float> grads = zero_like(params);

  auto set_all = [](ModelParams<float>& p, float value) {
    for (const auto& view : param_views(p)) {
      Eigen::Map<Eigen::VectorXf>(view.data, view.size()).setConstant(value);
    }
  };

  TrainConfig tc;
  tc.learning_rate = 0.1;
  tc.weight_decay = 0.0;

  SUBCASE("p=1, g=1, lr=0.1, wd=0 gives p ~ 0.9 after one step") {
    set_all(params, 1.0f);
    set_all(grads, 1.0f);
    auto state = adamw_init(params);
    adamw_step(params, grads, state, tc);
    CHECK(state.step == 1);
    for (const auto& view : param_views(params)) {
      CHECK(view.data[0] == doctest::Approx(0.9).epsilon(1e-5));
    }
  }

  SUBCASE("decay acts even with zero gradient") {
    tc.weight_decay = 0.1;
    set_all(params, 1.0f);
    set_all(grads, 0.0f);
    auto state = adamw_init(params);
    adamw_step(params, grads, state, tc);
    for (const auto& view : param_views(params)) {
      CHECK(view.data[0] == doctest::Approx(0.99).epsilon(1e-6));
    }
  }

  SUBCASE("no decay, no gradient leaves parameters unchanged") {
    set_all(params, 1.0f);
    set_all(grads, 0.0f);
    auto state = adamw_init(params);
    adamw_step(params, grads, state, tc);
    for (const auto& view : param_views(params)) {
      CHECK(view.data[0] == 1.0f);
    }
  }

  SUBCASE("non-finite gradients are rejected by tensor name") {
    set_all(params, 1.0f);
    set_all(grads, 0.0f);
    grads.pos_emb(0, 0) = std::nanf("");
    auto state = adamw_init(params);
    CHECK_THROWS_WITH_AS(adamw_step(params, grads, state, tc),
                         "adamw: non-finite gradient in tensor 'pos_emb'",
                         DataError);
  }
}

TEST_CASE("train_loop fits a separable toy corpus") {
  const Corpus corpus = toy_corpus();
  const Encoded data = encode_corpus(corpus, 12);
  const ModelConfig mc = toy_model(static_cast<int>(data.vocab.size()));

  TrainConfig tc;
  tc.epochs = 5;
  tc.train_batch = 8;
  tc.learning_rate = 1e-3;
  tc.seed = 21;

  auto result = train_loop(init_params<float>(mc, 21), data.seqs, data.labels,
                           data.seqs, data.labels, tc);
  REQUIRE(result.log.size() == 5);
  CHECK(result.log[0].epoch == 1);
  CHECK(result.log[1].train_loss < result.log[0].train_loss);
  CHECK(result.log[2].train_loss < result.log[1].train_loss);
  CHECK(result.log[4].train_acc == doctest::Approx(1.0));
}

TEST_CASE("zero learning rate freezes parameters") {
  const Corpus corpus = toy_corpus();
  const Encoded data = encode_corpus(corpus, 12);
  const ModelConfig mc = toy_model(static_cast<int>(data.vocab.size()));

  TrainConfig tc;
  tc.epochs = 3;
  tc.train_batch = 8;
  tc.learning_rate = 0.0;
  tc.seed = 4;

  ModelParams<float> initial = init_params<float>(mc, 4);
  const std::string before = params_bytes(initial);
  auto result = train_loop(initial, data.seqs, data.labels, data.seqs,
                           data.labels, tc);
  CHECK(params_bytes(result.params) == before);
  CHECK(result.log[0].train_loss == doctest::Approx(result.log[2].train_loss));
}

TEST_CASE("training is deterministic and ignores the test set") {
  const Corpus corpus = toy_corpus();
  const Encoded data = encode_corpus(corpus, 12);
  const ModelConfig mc = toy_model(static_cast<int>(data.vocab.size()));

  TrainConfig tc;
  tc.epochs = 2;
  tc.train_batch = 8;
  tc.seed = 77;

  auto a = train_loop(init_params<float>(mc, 77), data.seqs, data.labels,
                      data.seqs, data.labels, tc);
  auto b = train_loop(init_params<float>(mc, 77), data.seqs, data.labels,
                      data.seqs, data.labels, tc);
  CHECK(params_bytes(a.params) == params_bytes(b.params));
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].test_loss == b.log[i].test_loss);
  }

  // swapping the test set must not change the trained parameters
  std::vector<TokenSeq> other_test = {data.seqs[0]};
  std::vector<int> other_labels = {data.labels[0]};
  auto c = train_loop(init_params<float>(mc, 77), data.seqs, data.labels,
                      other_test, other_labels, tc);
  CHECK(params_bytes(a.params) == params_bytes(c.params));

  auto d = train_loop(init_params<float>(mc, 77), data.seqs, data.labels,
                      {}, {}, tc);
  CHECK(params_bytes(a.params) == params_bytes(d.params));
}

TEST_CASE("train config validation") {
  TrainConfig tc;
  tc.epochs = 0;
  CHECK_THROWS_AS(tc.validate(), UsageError);
  tc = TrainConfig{};
  tc.train_batch = 0;
  CHECK_THROWS_AS(tc.validate(), UsageError);
  tc = TrainConfig{};
  tc.learning_rate = -1.0;
  CHECK_THROWS_AS(tc.validate(), UsageError);
}
