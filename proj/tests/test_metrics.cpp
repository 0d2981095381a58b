#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "epd/error.hpp"
#include "epd/metrics.hpp"
#include "fixtures.hpp"

using namespace epd;

namespace {

// Binary prediction from foreground probabilities.
SoftLabelMap BinaryPred(std::size_t h, std::size_t w, std::vector<double> fg) {
  std::vector<double> data(2 * fg.size());
  for (std::size_t i = 0; i < fg.size(); ++i) {
    data[i] = 1.0 - fg[i];
    data[fg.size() + i] = fg[i];
  }
  return SoftLabelMap(h, w, 2, std::move(data));
}

}  // namespace

TEST_CASE("one-vs-rest confusion counts") {
  const HardLabelMap target(2, 2, 2, {1, 1, 0, 0});
  const HardLabelMap pred(2, 2, 2, {0, 1, 0, 1});
  CHECK(Confusion(pred, target, 1) == ConfusionCounts{1, 1, 1, 1});
  CHECK(Confusion(target, target, 1) == ConfusionCounts{2, 0, 2, 0});
  CHECK(Confusion(HardLabelMap(2, 2, 3), HardLabelMap(2, 2, 3), 2) ==
        ConfusionCounts{0, 0, 4, 0});
  CHECK_THROWS_AS(Confusion(pred, HardLabelMap(2, 3, 2), 0), ValidationError);
  CHECK_THROWS_AS(Confusion(pred, target, 2), ValidationError);
}

TEST_CASE("hard metric formulas") {
  const auto m = ComputeHardMetrics(ConfusionCounts{1, 1, 1, 1});
  CHECK(*m.dice == 0.5);
  CHECK(*m.iou == doctest::Approx(1.0 / 3.0));
  CHECK(*m.accuracy == 0.5);
  CHECK(*m.precision == 0.5);
  CHECK(*m.sensitivity == 0.5);
  CHECK(*m.specificity == 0.5);

  const auto perfect = ComputeHardMetrics(ConfusionCounts{5, 0, 3, 0});
  for (auto v : {perfect.dice, perfect.iou, perfect.accuracy, perfect.precision,
                 perfect.sensitivity, perfect.specificity}) {
    CHECK(*v == 1.0);
  }

  const auto disjoint = ComputeHardMetrics(ConfusionCounts{0, 3, 1, 2});
  CHECK(*disjoint.dice == 0.0);
  CHECK(*disjoint.iou == 0.0);
  CHECK_FALSE(ComputeHardMetrics(ConfusionCounts{0, 0, 4, 0}).dice.has_value());
  CHECK_FALSE(ComputeHardMetrics(ConfusionCounts{0, 0, 4, 0}).sensitivity.has_value());
  CHECK_FALSE(ComputeHardMetrics(ConfusionCounts{4, 0, 0, 0}).specificity.has_value());
}

TEST_CASE("threshold search on a one-hot prediction") {
  std::mt19937_64 rng(1);
  const auto target = testing::BlobLabel(rng, 32, 32, 4);
  const auto result = OptimalThresholdSearch(OneHot(target), target);
  CHECK(result.threshold == 0.0);
  CHECK(result.dice_by_threshold.size() == 101);
  CHECK(*result.report.macro.hard.dice == 1.0);
  CHECK(*result.report.macro.hard.iou == 1.0);
  CHECK(*result.report.macro.soft.dice == 1.0);
  CHECK_FALSE(result.report.degenerate_prediction);
}

TEST_CASE("threshold search on the four-pixel binary case") {
  const auto pred = BinaryPred(2, 2, {0.4, 0.4, 0.9, 0.1});
  const HardLabelMap target(2, 2, 2, {1, 1, 1, 0});

  // Frozen from testing::ReferenceMacroDice over the whole grid.
  for (std::size_t k = 0; k <= 100; ++k) {
    const double t = static_cast<double>(k) / 100.0;
    CHECK(MacroHardDice(pred, target, t) ==
          doctest::Approx(testing::ReferenceMacroDice(pred, target, t)).epsilon(1e-15));
  }
  CHECK(MacroHardDice(pred, target, 0.05) == doctest::Approx(3.0 / 7.0));
  CHECK(MacroHardDice(pred, target, 0.40) == 0.5);
  CHECK(MacroHardDice(pred, target, 0.50) == 0.5);
  CHECK(MacroHardDice(pred, target, 0.95) == doctest::Approx(0.2));

  const auto result = OptimalThresholdSearch(pred, target);
  CHECK(result.threshold == 0.10);
  CHECK(*result.report.macro.hard.dice == 1.0);
  CHECK(result.report.chosen_threshold == 0.10);
}

TEST_CASE("uniform prediction is flagged and resolved by tie-breaking") {
  const SoftLabelMap pred(2, 2, 3, std::vector<double>(12, 1.0 / 3.0));
  const HardLabelMap target(2, 2, 3, {0, 0, 0, 1});
  const auto result = OptimalThresholdSearch(pred, target);
  CHECK(result.report.degenerate_prediction);
  // Everything is background from t = 0.34 on; all-class-1 below that.
  CHECK(result.threshold == 0.34);
  CHECK(*result.report.macro.hard.dice == doctest::Approx(3.0 / 7.0));
  CHECK(result.report.excluded_classes == std::vector<int>{2});
  CHECK(ThresholdAssign(pred, 0.5) == HardLabelMap(2, 2, 3));
}

TEST_CASE("threshold search finds the grid maximum") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int classes = 2 + trial % 4;
    const auto target = testing::BlobLabel(rng, 16, 16, classes);
    const auto pred = testing::RandomSoft(rng, 16, 16, classes);
    const auto result = OptimalThresholdSearch(pred, target);
    const double best = MacroHardDice(pred, target, result.threshold);
    for (std::size_t k = 0; k <= 100; ++k) {
      const double t = static_cast<double>(k) / 100.0;
      const double reference = testing::ReferenceMacroDice(pred, target, t);
      CHECK(result.dice_by_threshold[k] == doctest::Approx(reference).epsilon(1e-15));
      CHECK(best >= reference);
      if (t < result.threshold) CHECK(reference < best);
    }
  }
}

TEST_CASE("threshold search input errors") {
  const SoftLabelMap pred(2, 2, 2, std::vector<double>(8, 0.5));
  CHECK_THROWS_AS(OptimalThresholdSearch(pred, HardLabelMap(2, 3, 2)), ValidationError);
  CHECK_THROWS_AS(OptimalThresholdSearch(pred, HardLabelMap(2, 2, 3)), ValidationError);
  CHECK_THROWS_AS(OptimalThresholdSearch(pred, HardLabelMap(2, 2, 2), 0.0),
                  ValidationError);
  CHECK_THROWS_AS(OptimalThresholdSearch(pred, HardLabelMap(2, 2, 2), 0.03),
                  ValidationError);
  CHECK(OptimalThresholdSearch(pred, HardLabelMap(2, 2, 2), 0.25)
            .dice_by_threshold.size() == 5);
}

TEST_CASE("soft metrics") {
  std::mt19937_64 rng(17);
  SUBCASE("identical maps") {
    const auto x = testing::RandomSoft(rng, 8, 8, 3);
    for (const auto& m : ComputeSoftMetrics(x, x)) {
      CHECK(*m.dice == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(*m.rad == 0.0);
      CHECK(*m.rd == 0.0);
      CHECK(*m.rmse == 0.0);
    }
  }
  SUBCASE("doubling a class mass gives RD = +1") {
    const std::vector<double> target = {0.1, 0.2, 0.3, 0.4, 0.9, 0.8, 0.7, 0.6};
    const std::vector<double> pred = {0.2, 0.4, 0.6, 0.8, 0.8, 0.6, 0.4, 0.2};
    const auto m = ComputeSoftMetrics(SoftLabelMap(2, 2, 2, pred),
                                      SoftLabelMap(2, 2, 2, target));
    CHECK(*m[0].rd == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*m[0].rad == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*m[1].rd < 0.0);
  }
  SUBCASE("matches the summation oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto pred = testing::RandomSoft(rng, 8, 8, 4);
      const auto target = testing::RandomSoft(rng, 8, 8, 4);
      const auto got = ComputeSoftMetrics(pred, target);
      for (int c = 0; c < 4; ++c) {
        const auto ref = testing::ReferenceSoftMetrics(pred, target, c);
        const auto& m = got[static_cast<std::size_t>(c)];
        CHECK(std::abs(*m.dice - *ref.dice) <= 1e-12);
        CHECK(std::abs(*m.rad - *ref.rad) <= 1e-12);
        CHECK(std::abs(*m.rd - *ref.rd) <= 1e-12);
        CHECK(std::abs(*m.rmse - *ref.rmse) <= 1e-12);
      }
    }
  }
  SUBCASE("empty target class is undefined") {
    const auto target = OneHot(HardLabelMap(2, 2, 3, {0, 1, 1, 0}));
    const auto m = ComputeSoftMetrics(testing::RandomSoft(rng, 2, 2, 3), target);
    CHECK_FALSE(m[2].dice.has_value());
    CHECK_FALSE(m[2].rmse.has_value());
    CHECK(m[1].dice.has_value());
  }
  CHECK_THROWS_AS(ComputeSoftMetrics(testing::RandomSoft(rng, 2, 2, 3),
                                     testing::RandomSoft(rng, 2, 2, 2)),
                  ValidationError);
}

TEST_CASE("aggregation with missing-class exclusion") {
  const HardLabelMap target(2, 2, 3, {0, 1, 1, 0});
  const HardLabelMap pred(2, 2, 3, {0, 1, 0, 0});
  std::vector<ClassMetrics> per_class;
  for (int c = 0; c < 3; ++c) {
    const auto counts = Confusion(pred, target, c);
    per_class.push_back({c, counts.tp + counts.fn, ComputeHardMetrics(counts), {}});
  }
  const auto on = Aggregate(per_class);
  CHECK(on.excluded_classes == std::vector<int>{2});
  const double dice0 = *per_class[0].hard.dice;
  const double dice1 = *per_class[1].hard.dice;
  CHECK(*on.macro.hard.dice == doctest::Approx((dice0 + dice1) / 2.0));

  const auto off = Aggregate(per_class, ExclusionPolicy::kKeepAll);
  CHECK(off.excluded_classes.empty());
  CHECK(*off.macro.hard.dice == doctest::Approx((dice0 + dice1) / 3.0));
  CHECK(*on.macro.hard.dice > *off.macro.hard.dice);

  SUBCASE("single present class") {
    const HardLabelMap all_fg(2, 2, 2, {1, 1, 1, 1});
    const HardLabelMap guess(2, 2, 2, {1, 0, 1, 1});
    std::vector<ClassMetrics> pc;
    for (int c = 0; c < 2; ++c) {
      const auto counts = Confusion(guess, all_fg, c);
      pc.push_back({c, counts.tp + counts.fn, ComputeHardMetrics(counts), {}});
    }
    const auto report = Aggregate(pc);
    CHECK(*report.macro.hard.dice == *pc[1].hard.dice);
    CHECK(*report.macro.hard.accuracy == *pc[1].hard.accuracy);
  }
  SUBCASE("everything excluded") {
    std::vector<ClassMetrics> none = {{0, 0, {}, {}}, {1, 0, {}, {}}};
    CHECK_THROWS_AS(Aggregate(none), ValidationError);
  }
}

TEST_CASE("metric identities") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto target = testing::RandomLabel(rng, 6, 6, 3);
    const auto pred = testing::RandomLabel(rng, 6, 6, 3);
    const auto soft = ComputeSoftMetrics(OneHot(pred), OneHot(target));
    for (int c = 0; c < 3; ++c) {
      const auto m = ComputeHardMetrics(Confusion(pred, target, c));
      if (!m.dice) continue;
      CHECK(*m.iou <= *m.dice);
      CHECK(*m.dice <= 2 * *m.iou / (1 + *m.iou) + 1e-12);
      CHECK(std::abs(*m.dice - 2 * *m.iou / (1 + *m.iou)) <= 1e-12);
      const auto& s = soft[static_cast<std::size_t>(c)];
      if (s.dice) CHECK(std::abs(*s.dice - *m.dice) <= 1e-12);
    }
  }
}

TEST_CASE("metrics are invariant to a shared pixel permutation") {
  std::mt19937_64 rng(29);
  const auto target = testing::BlobLabel(rng, 12, 12, 3);
  const auto pred = testing::RandomSoft(rng, 12, 12, 3);
  std::vector<std::size_t> perm(144);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<ClassId> t2(144);
  std::vector<double> p2(144 * 3);
  for (std::size_t i = 0; i < 144; ++i) {
    t2[i] = target.data()[perm[i]];
    for (std::size_t c = 0; c < 3; ++c) p2[c * 144 + i] = pred.data()[c * 144 + perm[i]];
  }
  const auto a = OptimalThresholdSearch(pred, target);
  const auto b = OptimalThresholdSearch(SoftLabelMap(12, 12, 3, p2),
                                        HardLabelMap(12, 12, 3, t2));
  CHECK(a.threshold == b.threshold);
  CHECK(a.dice_by_threshold == b.dice_by_threshold);
  CHECK(*a.report.macro.hard.accuracy == *b.report.macro.hard.accuracy);
  CHECK(*a.report.macro.soft.dice == doctest::Approx(*b.report.macro.soft.dice).epsilon(1e-12));
  CHECK(*a.report.macro.soft.rmse == doctest::Approx(*b.report.macro.soft.rmse).epsilon(1e-12));
  CHECK(*a.report.macro.soft.rd == doctest::Approx(*b.report.macro.soft.rd).epsilon(1e-12));
}
