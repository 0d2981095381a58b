#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "epd/downsample.hpp"
#include "epd/error.hpp"
#include "epd/parallel.hpp"
#include "epd/synth.hpp"
#include "fixtures.hpp"

using namespace epd;

namespace {

// Window foreground counts {2, 0, 4, 3} in row-major window order.
HardLabelMap WorkedExampleLabel() {
  return HardLabelMap(4, 4, 2,
                      {1, 1, 0, 0,
                       0, 0, 0, 0,
                       1, 1, 1, 1,
                       1, 1, 0, 1});
}

double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("EPD label downsampling reproduces the worked 4x4 example") {
  const auto soft = EpdLabelDownsample(WorkedExampleLabel(), DownsampleSpec(2));
  REQUIRE(soft.height() == 2);
  REQUIRE(soft.width() == 2);
  const std::vector<double> fg(soft.channel(1).begin(), soft.channel(1).end());
  const std::vector<double> bg(soft.channel(0).begin(), soft.channel(0).end());
  CHECK(fg == std::vector<double>{0.5, 0.0, 1.0, 0.75});
  CHECK(bg == std::vector<double>{0.5, 1.0, 0.0, 0.25});
}

TEST_CASE("EPD of a uniform region is certain") {
  for (std::size_t f : {1, 2, 3, 4, 6, 12}) {
    const HardLabelMap label(12, 12, 4, std::vector<ClassId>(144, 3));
    const auto soft = EpdLabelDownsample(label, DownsampleSpec(f));
    for (double p : soft.channel(3)) CHECK(p == 1.0);
    for (int c = 0; c < 3; ++c) {
      for (double p : soft.channel(c)) CHECK(p == 0.0);
    }
  }
}

TEST_CASE("EPD label kernel matches the histogram oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto label = testing::RandomLabel(rng, 16, 16, 4);
    CHECK(EpdLabelDownsample(label, DownsampleSpec(4)) ==
          synth::OracleEpd(label, 4));
  }
}

TEST_CASE("soft downsampling generalizes label downsampling") {
  std::mt19937_64 rng(5);
  SUBCASE("one-hot input matches bit for bit") {
    for (std::size_t f : {2, 3, 4}) {
      const auto label = testing::RandomLabel(rng, 24, 36, 5);
      CHECK(EpdSoftDownsample(OneHot(label), DownsampleSpec(f)) ==
            EpdLabelDownsample(label, DownsampleSpec(f)));
    }
  }
  SUBCASE("constant soft map is unchanged") {
    std::vector<double> data(8 * 8 * 3);
    std::fill(data.begin(), data.begin() + 64, 0.25);
    std::fill(data.begin() + 64, data.begin() + 128, 0.5);
    std::fill(data.begin() + 128, data.end(), 0.25);
    const auto out = EpdSoftDownsample(SoftLabelMap(8, 8, 3, data), DownsampleSpec(4));
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 2; ++c) {
        CHECK(out(r, c, 0) == 0.25);
        CHECK(out(r, c, 1) == 0.5);
        CHECK(out(r, c, 2) == 0.25);
      }
    }
  }
  SUBCASE("factor 1 is the identity") {
    const auto soft = testing::RandomSoft(rng, 5, 7, 3);
    CHECK(EpdSoftDownsample(soft, DownsampleSpec(1)) == soft);
  }
}

TEST_CASE("EPD image downsampling takes the window mean") {
  CHECK(EpdImageDownsample(ImagePlane(4, 4, -37.5), DownsampleSpec(2)) ==
        ImagePlane(2, 2, -37.5));
  CHECK(EpdImageDownsample(ImagePlane(2, 2, {0, 1, 1, 1}), DownsampleSpec(2))(0, 0) ==
        0.75);
  std::vector<double> checker(8 * 8);
  for (std::size_t i = 0; i < checker.size(); ++i) {
    checker[i] = static_cast<double>((i / 8 + i % 8) % 2);
  }
  CHECK(EpdImageDownsample(ImagePlane(8, 8, checker), DownsampleSpec(2)) ==
        ImagePlane(4, 4, 0.5));
}

TEST_CASE("nearest-neighbor label downsampling samples window centers") {
  std::mt19937_64 rng(3);
  const auto label = testing::RandomLabel(rng, 6, 6, 3);
  CHECK(NearestLabelDownsample(label, DownsampleSpec(1)) == label);

  std::vector<ClassId> ramp(16);
  for (int i = 0; i < 16; ++i) ramp[static_cast<std::size_t>(i)] = i;
  const auto out = NearestLabelDownsample(HardLabelMap(4, 4, 16, ramp),
                                          DownsampleSpec(2));
  CHECK(std::vector<ClassId>(out.data().begin(), out.data().end()) ==
        std::vector<ClassId>{5, 7, 13, 15});

  std::vector<ClassId> dot(16, 0);
  dot[0] = 1;
  const auto vanished =
      NearestLabelDownsample(HardLabelMap(4, 4, 2, dot), DownsampleSpec(2));
  CHECK(std::count(vanished.data().begin(), vanished.data().end(), 1) == 0);
}

TEST_CASE("bilinear image downsampling") {
  CHECK(BilinearImageDownsample(ImagePlane(8, 8, 3.0), DownsampleSpec(4)) ==
        ImagePlane(2, 2, 3.0));
  CHECK(BilinearImageDownsample(ImagePlane(2, 2, {0, 1, 1, 1}), DownsampleSpec(2))(0, 0) ==
        0.75);

  SUBCASE("affine images are reproduced exactly at the sample points") {
    const double a = 0.37, b = -1.25, c = 4.0;
    const std::size_t h = 24, w = 48;
    std::vector<double> data(h * w);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t col = 0; col < w; ++col) {
        data[r * w + col] = a * static_cast<double>(r) + b * static_cast<double>(col) + c;
      }
    }
    const ImagePlane image(h, w, data);
    for (std::size_t f : {2, 3, 4, 8}) {
      const auto out = BilinearImageDownsample(image, DownsampleSpec(f));
      for (std::size_t i = 0; i < out.height(); ++i) {
        for (std::size_t j = 0; j < out.width(); ++j) {
          const double y = (static_cast<double>(i) + 0.5) * static_cast<double>(f) - 0.5;
          const double x = (static_cast<double>(j) + 0.5) * static_cast<double>(f) - 0.5;
          CHECK(out(i, j) == doctest::Approx(a * y + b * x + c).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("pyramid levels") {
  std::mt19937_64 rng(9);
  const auto label = testing::BlobLabel(rng, 512, 512, 6);
  const auto levels = BuildPyramid(label, 3);
  REQUIRE(levels.size() == 3);
  CHECK(levels[0].height() == 256);
  CHECK(levels[1].height() == 128);
  CHECK(levels[2].height() == 64);
  CHECK(levels[2].width() == 64);
  for (int d = 1; d <= 3; ++d) {
    CHECK(levels[static_cast<std::size_t>(d - 1)] ==
          EpdLabelDownsample(label, DownsampleSpec::FromLevel(d)));
  }
  CHECK(levels[1] == EpdSoftDownsample(levels[0], DownsampleSpec(2)));
  CHECK(BuildPyramid(label, 0).empty());

  const HardLabelMap odd(12, 12, 2);
  try {
    BuildPyramid(odd, 3);
    FAIL("expected a divisibility error");
  } catch (const DivisibilityError& e) {
    CHECK(e.factor() == 8);
    CHECK(std::string(e.what()).find("pyramid level 3") != std::string::npos);
  }
}

TEST_CASE("shape errors") {
  const HardLabelMap label(10, 12, 2);
  try {
    EpdLabelDownsample(label, DownsampleSpec(4));
    FAIL("expected a divisibility error");
  } catch (const DivisibilityError& e) {
    CHECK(e.axis() == Axis::kHeight);
    CHECK(e.extent() == 10);
    CHECK(e.suggested_extent() == 12);
  }
  try {
    EpdLabelDownsample(HardLabelMap(12, 10, 2), DownsampleSpec(4));
    FAIL("expected a divisibility error");
  } catch (const DivisibilityError& e) {
    CHECK(e.axis() == Axis::kWidth);
  }
  CHECK(DivisibilityError(Axis::kWidth, 512, 3).suggested_extent() == 513);
  CHECK_THROWS_AS(EpdLabelDownsample(label, DownsampleSpec(16)), ValidationError);
  CHECK_THROWS_AS(DownsampleSpec(0), ValidationError);
  CHECK_THROWS_AS(EpdImageDownsample(ImagePlane(5, 4), DownsampleSpec(2)),
                  DivisibilityError);
  CHECK_THROWS_AS(BilinearImageDownsample(ImagePlane(4, 6), DownsampleSpec(4)),
                  DivisibilityError);
  CHECK_THROWS_AS(NearestLabelDownsample(label, DownsampleSpec(3)),
                  DivisibilityError);
}

TEST_CASE("EPD invariants over random labels") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t f = std::array<std::size_t, 4>{2, 3, 4, 8}[trial % 4];
    const auto label = trial % 2 == 0 ? testing::RandomLabel(rng, 48, 72, 2 + trial % 5)
                                      : testing::BlobLabel(rng, 48, 72, 2 + trial % 5);
    const auto soft = EpdLabelDownsample(label, DownsampleSpec(f));

    const auto check = Validate(soft);
    CHECK(check.valid);
    CHECK(check.deviation <= kSimplexTolerance);

    // Mass conservation.
    for (int c = 0; c < label.num_classes(); ++c) {
      double mass = 0.0;
      for (double p : soft.channel(c)) mass += p;
      const auto count = std::count(label.data().begin(), label.data().end(), c);
      CHECK(mass * static_cast<double>(f * f) ==
            doctest::Approx(static_cast<double>(count)).epsilon(1e-12));
    }

    // Edge classification against the window contents.
    for (std::size_t i = 0; i < soft.height(); ++i) {
      for (std::size_t j = 0; j < soft.width(); ++j) {
        std::set<ClassId> present;
        for (std::size_t r = i * f; r < (i + 1) * f; ++r) {
          for (std::size_t c = j * f; c < (j + 1) * f; ++c) present.insert(label(r, c));
        }
        for (int c = 0; c < label.num_classes(); ++c) {
          const double p = soft(i, j, c);
          if (!present.contains(c)) {
            CHECK(p == 0.0);
          } else if (present.size() == 1) {
            CHECK(p == 1.0);
          } else {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
          }
        }
      }
    }
  }
}

TEST_CASE("composition of power-of-two factors") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto label = testing::RandomLabel(rng, 64, 32, 3);
    const auto once = EpdLabelDownsample(label, DownsampleSpec(4));
    const auto twice = EpdSoftDownsample(EpdLabelDownsample(label, DownsampleSpec(2)),
                                         DownsampleSpec(2));
    CHECK(MaxAbsDiff(once.data(), twice.data()) <= 1e-12);

    const auto image = testing::RandomImage(rng, 64, 32);
    const auto img_once = EpdImageDownsample(image, DownsampleSpec(4));
    const auto img_twice = EpdImageDownsample(
        EpdImageDownsample(image, DownsampleSpec(2)), DownsampleSpec(2));
    CHECK(MaxAbsDiff(img_once.data(), img_twice.data()) <= 1e-12);
  }
}

TEST_CASE("image mean is preserved and nearest only emits input values") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto image = testing::RandomImage(rng, 60, 60, -1000.0, 1000.0);
    const auto out = EpdImageDownsample(image, DownsampleSpec(trial % 2 ? 3 : 4));
    double in_mean = 0.0, out_mean = 0.0;
    for (double v : image.data()) in_mean += v;
    for (double v : out.data()) out_mean += v;
    in_mean /= static_cast<double>(image.pixel_count());
    out_mean /= static_cast<double>(out.pixel_count());
    CHECK(std::abs(in_mean - out_mean) <= 1e-9);

    const auto label = testing::RandomLabel(rng, 60, 60, 7);
    const auto nearest = NearestLabelDownsample(label, DownsampleSpec(5));
    const std::set<ClassId> values(label.data().begin(), label.data().end());
    for (ClassId v : nearest.data()) CHECK(values.contains(v));
  }
}

TEST_CASE("results do not depend on the thread count") {
  std::mt19937_64 rng(99);
  const auto label = testing::RandomLabel(rng, 256, 256, 6);
  const auto image = testing::RandomImage(rng, 256, 256);
  SetMaxThreads(1);
  const auto soft1 = EpdLabelDownsample(label, DownsampleSpec(2));
  const auto img1 = EpdImageDownsample(image, DownsampleSpec(2));
  const auto bil1 = BilinearImageDownsample(image, DownsampleSpec(2));
  SetMaxThreads(5);
  CHECK(EpdLabelDownsample(label, DownsampleSpec(2)) == soft1);
  CHECK(EpdImageDownsample(image, DownsampleSpec(2)) == img1);
  CHECK(BilinearImageDownsample(image, DownsampleSpec(2)) == bil1);
  SetMaxThreads(0);
}
