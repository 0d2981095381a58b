#include "epd/downsample.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "epd/error.hpp"
#include "epd/parallel.hpp"

namespace epd {
namespace {

// Output rows per worker before splitting across threads.
constexpr std::size_t kMinRowsPerThread = 16;

}  // namespace

DownsampleSpec::DownsampleSpec(std::size_t factor) : factor_(factor) {
  if (factor == 0) throw ValidationError("downsampling factor must be >= 1");
}

DownsampleSpec DownsampleSpec::FromLevel(int level) {
  if (level < 0 || level > 30) {
    throw ValidationError("pyramid level must be in [0, 30]");
  }
  return DownsampleSpec(std::size_t{1} << level);
}

void CheckDownsampleShape(std::size_t height, std::size_t width,
                          const DownsampleSpec& spec) {
  const std::size_t f = spec.factor();
  if (f > std::min(height, width)) {
    std::ostringstream msg;
    msg << "factor " << f << " exceeds the smaller image extent "
        << std::min(height, width);
    throw ValidationError(msg.str());
  }
  if (height % f != 0) throw DivisibilityError(Axis::kHeight, height, f);
  if (width % f != 0) throw DivisibilityError(Axis::kWidth, width, f);
}

SoftLabelMap EpdLabelDownsample(const HardLabelMap& label,
                                const DownsampleSpec& spec) {
  CheckDownsampleShape(label.height(), label.width(), spec);
  const std::size_t f = spec.factor();
  const std::size_t out_h = label.height() / f;
  const std::size_t out_w = label.width() / f;
  const std::size_t plane = out_h * out_w;
  const std::size_t classes = static_cast<std::size_t>(label.num_classes());
  const double area = static_cast<double>(f * f);
  const auto src = label.data();
  const std::size_t src_w = label.width();

  std::vector<double> out(plane * classes, 0.0);
  detail::ParallelFor(out_h, kMinRowsPerThread, [&](std::size_t begin,
                                                    std::size_t end) {
    std::vector<std::size_t> counts(classes);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < out_w; ++j) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t r = i * f; r < (i + 1) * f; ++r) {
          const ClassId* row = src.data() + r * src_w + j * f;
          for (std::size_t k = 0; k < f; ++k) ++counts[row[k]];
        }
        const std::size_t pixel = i * out_w + j;
        for (std::size_t c = 0; c < classes; ++c) {
          out[c * plane + pixel] = static_cast<double>(counts[c]) / area;
        }
      }
    }
  });
  return SoftLabelMap(out_h, out_w, label.num_classes(), std::move(out));
}

namespace {

// Window mean over one row-major plane; shared by soft labels and images.
void MeanPool(std::span<const double> src, std::size_t src_w, std::size_t f,
              std::size_t out_h, std::size_t out_w, std::span<double> dst) {
  const double area = static_cast<double>(f * f);
  detail::ParallelFor(out_h, kMinRowsPerThread, [&](std::size_t begin,
                                                    std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < out_w; ++j) {
        double sum = 0.0;
        for (std::size_t r = i * f; r < (i + 1) * f; ++r) {
          const double* row = src.data() + r * src_w + j * f;
          for (std::size_t k = 0; k < f; ++k) sum += row[k];
        }
        dst[i * out_w + j] = sum / area;
      }
    }
  });
}

}  // namespace

SoftLabelMap EpdSoftDownsample(const SoftLabelMap& soft,
                               const DownsampleSpec& spec) {
  CheckDownsampleShape(soft.height(), soft.width(), spec);
  const std::size_t f = spec.factor();
  const std::size_t out_h = soft.height() / f;
  const std::size_t out_w = soft.width() / f;
  const std::size_t plane = out_h * out_w;
  std::vector<double> out(plane * static_cast<std::size_t>(soft.num_classes()));
  for (int c = 0; c < soft.num_classes(); ++c) {
    MeanPool(soft.channel(c), soft.width(), f, out_h, out_w,
             std::span<double>(out).subspan(static_cast<std::size_t>(c) * plane,
                                            plane));
  }
  return SoftLabelMap(out_h, out_w, soft.num_classes(), std::move(out));
}

ImagePlane EpdImageDownsample(const ImagePlane& image,
                              const DownsampleSpec& spec) {
  CheckDownsampleShape(image.height(), image.width(), spec);
  const std::size_t f = spec.factor();
  const std::size_t out_h = image.height() / f;
  const std::size_t out_w = image.width() / f;
  std::vector<double> out(out_h * out_w);
  MeanPool(image.data(), image.width(), f, out_h, out_w, out);
  return ImagePlane(out_h, out_w, std::move(out));
}

MultiChannelImage EpdImageDownsample(const MultiChannelImage& image,
                                     const DownsampleSpec& spec) {
  std::vector<ImagePlane> planes;
  planes.reserve(image.channel_count());
  for (const auto& plane : image.channels()) {
    planes.push_back(EpdImageDownsample(plane, spec));
  }
  return MultiChannelImage(std::move(planes));
}

HardLabelMap NearestLabelDownsample(const HardLabelMap& label,
                                    const DownsampleSpec& spec) {
  CheckDownsampleShape(label.height(), label.width(), spec);
  const std::size_t f = spec.factor();
  const std::size_t out_h = label.height() / f;
  const std::size_t out_w = label.width() / f;
  // floor((i + 0.5) * f) == i*f + f/2 for integer f.
  const std::size_t offset = f / 2;
  std::vector<ClassId> out(out_h * out_w);
  for (std::size_t i = 0; i < out_h; ++i) {
    for (std::size_t j = 0; j < out_w; ++j) {
      out[i * out_w + j] = label(i * f + offset, j * f + offset);
    }
  }
  return HardLabelMap(out_h, out_w, label.num_classes(), std::move(out));
}

ImagePlane BilinearImageDownsample(const ImagePlane& image,
                                   const DownsampleSpec& spec) {
  CheckDownsampleShape(image.height(), image.width(), spec);
  const std::size_t f = spec.factor();
  const std::size_t out_h = image.height() / f;
  const std::size_t out_w = image.width() / f;

  struct Tap {
    std::size_t lo;
    std::size_t hi;
    double weight_hi;
  };
  auto taps = [f](std::size_t out_n, std::size_t in_n) {
    std::vector<Tap> result(out_n);
    const double max_coord = static_cast<double>(in_n - 1);
    for (std::size_t i = 0; i < out_n; ++i) {
      double x = (static_cast<double>(i) + 0.5) * static_cast<double>(f) - 0.5;
      x = std::clamp(x, 0.0, max_coord);
      const auto lo = static_cast<std::size_t>(std::floor(x));
      const std::size_t hi = std::min(lo + 1, in_n - 1);
      result[i] = Tap{lo, hi, x - static_cast<double>(lo)};
    }
    return result;
  };
  const auto rows = taps(out_h, image.height());
  const auto cols = taps(out_w, image.width());

  std::vector<double> out(out_h * out_w);
  detail::ParallelFor(out_h, kMinRowsPerThread, [&](std::size_t begin,
                                                    std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Tap& ty = rows[i];
      for (std::size_t j = 0; j < out_w; ++j) {
        const Tap& tx = cols[j];
        const double top = image(ty.lo, tx.lo) * (1.0 - tx.weight_hi) +
                           image(ty.lo, tx.hi) * tx.weight_hi;
        const double bottom = image(ty.hi, tx.lo) * (1.0 - tx.weight_hi) +
                              image(ty.hi, tx.hi) * tx.weight_hi;
        out[i * out_w + j] = top * (1.0 - ty.weight_hi) + bottom * ty.weight_hi;
      }
    }
  });
  return ImagePlane(out_h, out_w, std::move(out));
}

std::vector<SoftLabelMap> BuildPyramid(const HardLabelMap& label,
                                       int max_level) {
  if (max_level < 0) throw ValidationError("max_level must be >= 0");
  for (int level = 1; level <= max_level; ++level) {
    const auto spec = DownsampleSpec::FromLevel(level);
    try {
      CheckDownsampleShape(label.height(), label.width(), spec);
    } catch (const DivisibilityError& e) {
      throw DivisibilityError(e.axis(), e.extent(), e.factor(),
                              "pyramid level " + std::to_string(level));
    } catch (const ValidationError& e) {
      throw ValidationError("pyramid level " + std::to_string(level) + ": " +
                            e.what());
    }
  }
  std::vector<SoftLabelMap> levels;
  levels.reserve(static_cast<std::size_t>(max_level));
  // Halving chain: every value is k/4^d, so chained means are exact and match
  // a direct downsample by 2^d bit for bit.
  const DownsampleSpec halve(2);
  for (int level = 1; level <= max_level; ++level) {
    if (level == 1) {
      levels.push_back(EpdLabelDownsample(label, halve));
    } else {
      levels.push_back(EpdSoftDownsample(levels.back(), halve));
    }
  }
  return levels;
}

}  // namespace epd
