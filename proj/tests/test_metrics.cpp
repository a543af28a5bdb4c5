#include <doctest.h>

#include <nlohmann/json.hpp>

#include "golden_metrics.hpp"
#include "spamlens/errors.hpp"
#include "spamlens/metrics.hpp"
#include "spamlens/rng.hpp"

using namespace spamlens;

TEST_CASE("confusion counts the four cells with spam positive") {
  const std::vector<Label> labels = {Label::ham, Label::ham, Label::spam,
                                     Label::spam, Label::spam};
  const std::vector<Label> preds = {Label::ham, Label::spam, Label::spam,
                                    Label::ham, Label::spam};
  const ConfusionMatrix m = confusion(preds, labels);
  CHECK(m.tn == 1);
  CHECK(m.fp == 1);
  CHECK(m.tp == 2);
  CHECK(m.fn == 1);
  CHECK(m.total() == 5);

  CHECK_THROWS_AS(confusion({Label::ham}, {}), DataError);
  const ConfusionMatrix empty = confusion({}, {});
  CHECK(empty.total() == 0);

  const std::vector<Label> same = {Label::spam, Label::ham};
  const ConfusionMatrix perfect = confusion(same, same);
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);
}

TEST_CASE("metric conventions and edge cases") {
  const ConfusionMatrix perfect{/*tp=*/5, /*tn=*/7, /*fp=*/0, /*fn=*/0};
  CHECK(precision(perfect) == 1.0);
  CHECK(recall(perfect) == 1.0);
  CHECK(f1(perfect) == 1.0);
  CHECK(accuracy(perfect) == 1.0);

  const ConfusionMatrix no_positive{/*tp=*/0, /*tn=*/5, /*fp=*/0, /*fn=*/3};
  CHECK(precision(no_positive) == 0.0);  // zero denominator convention
  CHECK(f1(no_positive) == 0.0);

  CHECK_THROWS_AS(accuracy(ConfusionMatrix{}), DataError);

  CHECK(round2(0.986721) == doctest::Approx(0.99));
  CHECK(round2(0.995) == doctest::Approx(1.00));
  CHECK(round2(0.984) == doctest::Approx(0.98));
}

TEST_CASE("golden evaluation table reproduces exactly at 2 decimals") {
  auto verify = [](const testutil::GoldenCase& g) {
    INFO("case ", g.name);
    const MetricsReport r = metrics_report(g.matrix);
    CHECK(round2(r.ham.precision) == doctest::Approx(g.ham_p));
    CHECK(round2(r.ham.recall) == doctest::Approx(g.ham_r));
    CHECK(round2(r.ham.f1) == doctest::Approx(g.ham_f1));
    CHECK(round2(r.spam.precision) == doctest::Approx(g.spam_p));
    CHECK(round2(r.spam.recall) == doctest::Approx(g.spam_r));
    CHECK(round2(r.spam.f1) == doctest::Approx(g.spam_f1));
    CHECK(std::round(r.accuracy * 10000.0) / 100.0 ==
          doctest::Approx(g.accuracy_pct));
  };
  for (const auto& g : testutil::kGoldenImbalanced) {
    CHECK(g.matrix.total() == 1115);
    verify(g);
  }
  for (const auto& g : testutil::kGoldenBalanced) {
    CHECK(g.matrix.total() == 1930);
    verify(g);
  }
}

TEST_CASE("specific golden accuracies") {
  CHECK(accuracy({145, 963, 2, 5}) == doctest::Approx(1108.0 / 1115.0));
  CHECK(std::round(accuracy({145, 963, 2, 5}) * 10000.0) / 100.0 ==
        doctest::Approx(99.37));
  CHECK(std::round(accuracy({982, 945, 0, 3}) * 10000.0) / 100.0 ==
        doctest::Approx(99.84));
}

TEST_CASE("metric properties under fuzzing") {
  Rng rng(4242);
  for (int i = 0; i < 2000; ++i) {
    ConfusionMatrix m;
    m.tp = static_cast<long>(rng.bounded(50));
    m.tn = static_cast<long>(rng.bounded(50));
    m.fp = static_cast<long>(rng.bounded(50));
    m.fn = static_cast<long>(rng.bounded(50));
    if (m.total() == 0) continue;

    const double p = precision(m);
    const double r = recall(m);
    const double f = f1(m);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(f <= std::max(p, r) + 1e-12);
    if (p > 0.0 && r > 0.0) CHECK(f >= std::min(p, r) - 1e-12);
    CHECK((f == 0.0) == (p * r == 0.0));

    // accuracy is symmetric under swapping the positive class
    const ConfusionMatrix swapped{m.tn, m.tp, m.fn, m.fp};
    CHECK(accuracy(m) == doctest::Approx(accuracy(swapped)));
  }
}

TEST_CASE("report json carries raw and rounded fields") {
  const MetricsReport report = metrics_report({145, 963, 2, 5});
  const nlohmann::json j = report_to_json(report);
  CHECK(j.at("matrix").at("tp") == 145);
  CHECK(j.at("accuracy_pct_rounded") == doctest::Approx(99.37));
  CHECK(j.at("per_class").at("spam").at("rounded").at("f1") ==
        doctest::Approx(0.98));
  CHECK(j.at("per_class").at("ham").at("rounded").at("recall") ==
        doctest::Approx(1.00));
}
