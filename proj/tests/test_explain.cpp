#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "spamlens/errors.hpp"
#include "spamlens/intgrad.hpp"
#include "spamlens/lime.hpp"
#include "spamlens/ridge.hpp"

using namespace spamlens;

namespace {

// bag-of-words logistic model: logit(spam) = bias + sum of weights of
// present words
TextProbaFn bow_logistic(std::map<std::string, double> weights, double bias) {
  return [weights = std::move(weights), bias](const std::string& text)
             -> std::array<double, 2> {
    double logit = bias;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
      if (!seen.insert(word).second) continue;
      auto it = weights.find(word);
      if (it != weights.end()) logit += it->second;
    }
    const double p = 1.0 / (1.0 + std::exp(-logit));
    return {1.0 - p, p};
  };
}

LimeConfig quick_lime(int k) {
  LimeConfig config;
  config.num_samples = 600;
  config.num_features = k;
  config.seed = 5;
  return config;
}

}  // namespace

TEST_CASE("lime proximity kernel") {
  CHECK(lime_proximity(6, 6, 25.0) == doctest::Approx(1.0));
  const double d_half = 1.0 - std::sqrt(0.5);
  CHECK(lime_proximity(3, 6, 25.0) ==
        doctest::Approx(std::exp(-d_half * d_half / 625.0)));
  CHECK(lime_proximity(0, 6, 25.0) == doctest::Approx(std::exp(-1.0 / 625.0)));
}

TEST_CASE("lime on a constant model attributes nothing") {
  const TextProbaFn constant = [](const std::string&) {
    return std::array<double, 2>{0.3, 0.7};
  };
  const Explanation exp =
      lime_explain(constant, "alpha beta gamma delta", Label::spam,
                   quick_lime(4));
  CHECK(exp.prediction == doctest::Approx(0.7));
  for (const auto& attr : exp.attributions) {
    CHECK(std::abs(attr.coefficient) < 1e-6);
  }
}

TEST_CASE("lime ranks the driving word first with the right sign") {
  const auto model = bow_logistic({{"win", 3.0}}, -1.0);
  const Explanation exp = lime_explain(
      model, "win a prize draw entry today", Label::spam, quick_lime(6));
  REQUIRE(!exp.attributions.empty());
  CHECK(exp.attributions[0].word == "win");
  CHECK(exp.attributions[0].coefficient > 0.0);
  // strictly larger than every other coefficient in magnitude
  for (std::size_t i = 1; i < exp.attributions.size(); ++i) {
    CHECK(std::abs(exp.attributions[0].coefficient) >
          std::abs(exp.attributions[i].coefficient) + 1e-6);
  }
}

TEST_CASE("lime agrees with the exhaustive surrogate on a 6-word oracle") {
  const std::string text = "win big cash now dear friend";
  const auto model = bow_logistic({{"win", 2.5}, {"cash", 1.5}, {"dear", -2.0}},
                                  -0.5);

  // reference: weighted least squares over all 2^6 presence vectors,
  // solved by QR on the sqrt-weighted design
  const std::vector<std::string> words = {"win", "big", "cash",
                                          "now", "dear", "friend"};
  const int d = 6;
  const int rows = 1 << d;
  Eigen::MatrixXd design(rows, d + 1);
  Eigen::VectorXd target(rows);
  Eigen::VectorXd weight(rows);
  for (int z = 0; z < rows; ++z) {
    design(z, 0) = 1.0;
    std::string rendered;
    int kept = 0;
    for (int j = 0; j < d; ++j) {
      const bool on = (z >> j) & 1;
      design(z, j + 1) = on ? 1.0 : 0.0;
      if (on) {
        ++kept;
        if (!rendered.empty()) rendered.push_back(' ');
        rendered += words[static_cast<std::size_t>(j)];
      }
    }
    target(z) = model(rendered)[1];
    weight(z) = lime_proximity(kept, d, 25.0);
  }
  const Eigen::VectorXd sw = weight.cwiseSqrt();
  const Eigen::VectorXd beta =
      (sw.asDiagonal() * design)
          .colPivHouseholderQr()
          .solve(sw.cwiseProduct(target));

  std::vector<int> order = {0, 1, 2, 3, 4, 5};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(beta(a + 1)) > std::abs(beta(b + 1));
  });
  const std::set<std::string> oracle_top = {
      words[static_cast<std::size_t>(order[0])],
      words[static_cast<std::size_t>(order[1])],
      words[static_cast<std::size_t>(order[2])]};

  const Explanation exp =
      lime_explain(model, text, Label::spam, quick_lime(3));
  REQUIRE(exp.attributions.size() == 3);
  std::set<std::string> lime_top;
  for (const auto& attr : exp.attributions) lime_top.insert(attr.word);
  CHECK(lime_top == oracle_top);

  // signs of the selected coefficients match the true weights
  for (const auto& attr : exp.attributions) {
    if (attr.word == "win" || attr.word == "cash") {
      CHECK(attr.coefficient > 0.0);
    }
    if (attr.word == "dear") CHECK(attr.coefficient < 0.0);
  }
}

TEST_CASE("lime is deterministic and validates input") {
  const auto model = bow_logistic({{"x", 1.0}}, 0.0);
  const Explanation a = lime_explain(model, "x y z", Label::spam, quick_lime(3));
  const Explanation b = lime_explain(model, "x y z", Label::spam, quick_lime(3));
  CHECK(explanation_to_json(a).dump() == explanation_to_json(b).dump());

  CHECK_THROWS_AS(lime_explain(model, "", Label::spam, quick_lime(3)),
                  DataError);

  const TextProbaFn broken = [](const std::string&) {
    return std::array<double, 2>{0.9, 0.9};
  };
  CHECK_THROWS_AS(lime_explain(broken, "a b", Label::spam, quick_lime(2)),
                  DataError);

  LimeConfig bad = quick_lime(3);
  bad.num_samples = 5;
  CHECK_THROWS_AS(lime_explain(model, "a b", Label::spam, bad), UsageError);
}

TEST_CASE("lime gives an ignored word a coefficient within noise") {
  const auto model = bow_logistic({{"signal", 2.0}}, 0.0);
  LimeConfig config = quick_lime(5);
  config.num_samples = 1500;
  const Explanation exp = lime_explain(
      model, "signal filler words appear here", Label::spam, config);
  for (const auto& attr : exp.attributions) {
    if (attr.word != "signal") {
      CHECK(std::abs(attr.coefficient) < 0.02);
    }
  }
}

TEST_CASE("merge_subwords folds continuations and drops specials") {
  const auto merged = merge_subwords({{"[CLS]", 0.5},
                                      {"Kara", 0.1387},
                                      {"##oke", 0.02},
                                      {"[SEP]", -0.1}});
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].word == "Karaoke");
  CHECK(merged[0].coefficient == doctest::Approx(0.1587));

  const auto plain = merge_subwords({{"hello", 0.3}, {"there", -0.2}});
  REQUIRE(plain.size() == 2);
  CHECK(plain[0].word == "hello");

  CHECK_THROWS_AS(merge_subwords({{"##oops", 0.1}}), DataError);
  CHECK_THROWS_AS(merge_subwords({{"[CLS]", 0.0}, {"##oops", 0.1}}),
                  DataError);
}

TEST_CASE("integrated gradients are exact on a linear function") {
  const Eigen::MatrixXd coeffs = Eigen::MatrixXd::Random(4, 3);
  const EmbeddingFn linear = [&](const Eigen::MatrixXd& emb) {
    return std::make_pair(coeffs.cwiseProduct(emb).sum() + 0.25, coeffs);
  };
  const Eigen::MatrixXd baseline = Eigen::MatrixXd::Random(4, 3);
  const Eigen::MatrixXd input = Eigen::MatrixXd::Random(4, 3);

  for (int steps : {1, 3, 50}) {
    const IgPathResult result =
        integrate_embedding_path(linear, baseline, input, steps);
    const Eigen::VectorXd expected =
        coeffs.cwiseProduct(input - baseline).rowwise().sum();
    CHECK((result.token_attributions - expected).cwiseAbs().maxCoeff() <
          1e-12);
    // completeness is exact for a linear model at any resolution
    CHECK(result.raw_sum ==
          doctest::Approx(result.f_input - result.f_baseline).epsilon(1e-12));
  }

  CHECK_THROWS_AS(integrate_embedding_path(linear, baseline, input, 0),
                  UsageError);
}

TEST_CASE("integrated gradients on the encoder satisfy the reported schema") {
  const Corpus corpus = testutil::make_corpus({
      {"win free cash now", Label::spam},
      {"meet me at home", Label::ham},
      {"free prize win today", Label::spam},
      {"dinner at home tonight", Label::ham},
  });
  const Vocab vocab = train_bpe(corpus, 90);
  ModelConfig mc;
  mc.n_layers = 1;
  mc.d_model = 16;
  mc.n_heads = 2;
  mc.d_ff = 32;
  mc.max_len = 16;
  mc.vocab_size = static_cast<int>(vocab.size());
  mc.dropout_rate = 0.0;
  const ModelParams<float> params = init_params<float>(mc, 13);

  const TokenSeq seq = encode(vocab, "win free cash now", mc.max_len);
  const Explanation exp =
      integrated_gradients(params, vocab, seq, Label::spam, 50);

  CHECK(exp.method == "intgrad");
  CHECK(exp.has_raw_sum);
  REQUIRE(!exp.attributions.empty());
  // no structural specials survive the merge
  for (const auto& attr : exp.attributions) {
    CHECK(attr.word != "[CLS]");
    CHECK(attr.word != "[SEP]");
    CHECK(attr.word != "[PAD]");
  }
  // displayed coefficients are l2-normalized
  double norm = 0.0;
  for (const auto& attr : exp.attributions) {
    norm += attr.coefficient * attr.coefficient;
  }
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
  // sorted by descending magnitude
  for (std::size_t i = 1; i < exp.attributions.size(); ++i) {
    CHECK(std::abs(exp.attributions[i - 1].coefficient) >=
          std::abs(exp.attributions[i].coefficient));
  }

  CHECK_THROWS_AS(integrated_gradients(params, vocab, seq, Label::spam, 0),
                  UsageError);
}

TEST_CASE("integrated gradients converge to the completeness identity") {
  const Corpus corpus = testutil::make_corpus({
      {"win free cash now now", Label::spam},
      {"meet me at home", Label::ham},
  });
  const Vocab vocab = train_bpe(corpus, 70);
  ModelConfig mc;
  mc.n_layers = 1;
  mc.d_model = 8;
  mc.n_heads = 2;
  mc.d_ff = 16;
  mc.max_len = 12;
  mc.vocab_size = static_cast<int>(vocab.size());
  mc.dropout_rate = 0.0;
  const ModelParams<float> params = init_params<float>(mc, 3);

  const TokenSeq seq = encode(vocab, "win free cash", mc.max_len);
  const Batch batch = Batch::from_seqs(std::span<const TokenSeq>(&seq, 1));

  const Explanation exp =
      integrated_gradients(params, vocab, seq, Label::spam, 800);

  // reference: target probability at the input and at the pad baseline
  const double f_input = predict_proba(params, batch)(0, 1);
  TokenSeq baseline = seq;
  for (int i = 1; i < baseline.n_real - 1; ++i) baseline.ids(i) = kPadId;
  const Batch base_batch =
      Batch::from_seqs(std::span<const TokenSeq>(&baseline, 1));
  const double f_base = predict_proba(params, base_batch)(0, 1);

  const double delta = f_input - f_base;
  CHECK(std::abs(exp.raw_sum - delta) <=
        std::max(5e-4, 0.02 * std::abs(delta)));
}

TEST_CASE("ridge standard errors bound a provably ignored feature") {
  // y depends only on column 0; column 1 is noise-free and ignored
  Rng rng(64);
  const int n = 400;
  Eigen::MatrixXd features(n, 2);
  Eigen::VectorXd target(n);
  Eigen::VectorXd weight(n);
  for (int i = 0; i < n; ++i) {
    features(i, 0) = static_cast<double>(rng.bounded(2));
    features(i, 1) = static_cast<double>(rng.bounded(2));
    target(i) = 2.0 * features(i, 0) + 0.05 * rng.normal();
    weight(i) = 0.5 + rng.uniform();
  }
  const RidgeFit fit = weighted_ridge(features, target, weight, 1.0);
  CHECK(std::abs(fit.coef(1)) < 3.0 * fit.std_error(1));
  CHECK(fit.coef(0) == doctest::Approx(2.0).epsilon(0.05));
}
