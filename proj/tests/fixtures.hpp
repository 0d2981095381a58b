// Seeded generators and independent reference computations used by the unit
// and acceptance tests. Nothing here calls into the kernels it checks.
#ifndef EPD_TESTS_FIXTURES_HPP
#define EPD_TESTS_FIXTURES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "epd/core.hpp"

namespace epd::testing {

inline HardLabelMap RandomLabel(std::mt19937_64& rng, std::size_t h,
                                std::size_t w, int classes) {
  std::uniform_int_distribution<ClassId> pick(0, classes - 1);
  std::vector<ClassId> data(h * w);
  for (auto& v : data) v = pick(rng);
  return HardLabelMap(h, w, classes, std::move(data));
}

// Spatially coherent label: random axis-aligned rectangles painted over a
// background, so windows mix uniform and edge regions.
inline HardLabelMap BlobLabel(std::mt19937_64& rng, std::size_t h,
                              std::size_t w, int classes, int rects = 12) {
  std::vector<ClassId> data(h * w, 0);
  std::uniform_int_distribution<std::size_t> row(0, h - 1), col(0, w - 1);
  std::uniform_int_distribution<ClassId> cls(1, classes - 1);
  for (int k = 0; k < rects; ++k) {
    std::size_t r0 = row(rng), r1 = row(rng), c0 = col(rng), c1 = col(rng);
    if (r0 > r1) std::swap(r0, r1);
    if (c0 > c1) std::swap(c0, c1);
    const ClassId c = cls(rng);
    for (std::size_t r = r0; r <= r1; ++r) {
      for (std::size_t cc = c0; cc <= c1; ++cc) data[r * w + cc] = c;
    }
  }
  return HardLabelMap(h, w, classes, std::move(data));
}

// Random simplex per pixel from normalized exponentials.
inline SoftLabelMap RandomSoft(std::mt19937_64& rng, std::size_t h,
                               std::size_t w, int classes) {
  std::exponential_distribution<double> e(1.0);
  const std::size_t plane = h * w;
  std::vector<double> data(plane * static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < plane; ++i) {
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) {
      const double v = e(rng);
      data[static_cast<std::size_t>(c) * plane + i] = v;
      sum += v;
    }
    for (int c = 0; c < classes; ++c) {
      data[static_cast<std::size_t>(c) * plane + i] /= sum;
    }
  }
  return SoftLabelMap(h, w, classes, std::move(data));
}

inline ImagePlane RandomImage(std::mt19937_64& rng, std::size_t h,
                              std::size_t w, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> data(h * w);
  for (auto& v : data) v = u(rng);
  return ImagePlane(h, w, std::move(data));
}

// Per-pixel reading of the threshold rule, written against operator() and a
// linear scan instead of the precomputed peaks the library uses.
inline ClassId ReferenceAssign(const SoftLabelMap& pred, std::size_t r,
                               std::size_t c, double threshold) {
  ClassId best = 0;
  double best_p = -1.0;
  for (int k = 1; k < pred.num_classes(); ++k) {
    if (pred(r, c, k) > threshold && pred(r, c, k) > best_p) {
      best = k;
      best_p = pred(r, c, k);
    }
  }
  return best;
}

// Macro hard dice over classes present in the target, from a full C x C
// confusion matrix.
inline double ReferenceMacroDice(const SoftLabelMap& pred,
                                 const HardLabelMap& target, double threshold) {
  const auto n = static_cast<std::size_t>(pred.num_classes());
  std::vector<std::vector<std::uint64_t>> cm(n, std::vector<std::uint64_t>(n));
  for (std::size_t r = 0; r < target.height(); ++r) {
    for (std::size_t c = 0; c < target.width(); ++c) {
      cm[static_cast<std::size_t>(target(r, c))]
        [static_cast<std::size_t>(ReferenceAssign(pred, r, c, threshold))]++;
    }
  }
  double sum = 0.0;
  int present = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row += cm[k][j];
      col += cm[j][k];
    }
    if (row == 0) continue;
    sum += 2.0 * static_cast<double>(cm[k][k]) / static_cast<double>(row + col);
    ++present;
  }
  return sum / present;
}

struct ReferenceSoft {
  std::optional<double> dice, rad, rd, rmse;
};

// Straight per-pixel summation with operator(), pixel-major order.
inline ReferenceSoft ReferenceSoftMetrics(const SoftLabelMap& pred,
                                          const SoftLabelMap& target, int k) {
  long double t = 0, p = 0, yy = 0, pp = 0, yp = 0, ad = 0, sq = 0;
  for (std::size_t r = 0; r < pred.height(); ++r) {
    for (std::size_t c = 0; c < pred.width(); ++c) {
      const long double y = target(r, c, k);
      const long double q = pred(r, c, k);
      t += y;
      p += q;
      yy += y * y;
      pp += q * q;
      yp += y * q;
      ad += std::fabs(static_cast<double>(q - y));
      sq += (q - y) * (q - y);
    }
  }
  if (t == 0) return {};
  const long double n = static_cast<long double>(pred.pixel_count());
  return {static_cast<double>(2 * yp / (yy + pp)), static_cast<double>(ad / t),
          static_cast<double>((p - t) / t),
          static_cast<double>(std::sqrt(sq / n))};
}

}  // namespace epd::testing

#endif  // EPD_TESTS_FIXTURES_HPP
