#include "epd/core.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "epd/error.hpp"
#include "epd/parallel.hpp"

namespace epd {

DivisibilityError::DivisibilityError(Axis axis, std::size_t extent,
                                     std::size_t factor,
                                     const std::string& context)
    : ValidationError([&] {
        std::ostringstream msg;
        if (!context.empty()) msg << context << ": ";
        msg << AxisName(axis) << " " << extent
            << " is not divisible by factor " << factor << " (pad to "
            << (extent + factor - 1) / factor * factor << ")";
        return msg.str();
      }()),
      axis_(axis),
      extent_(extent),
      factor_(factor) {}

namespace {

std::atomic<unsigned> g_max_threads{0};

void CheckExtent(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw ValidationError("image extent must be at least 1x1");
  }
}

void CheckClassCount(int num_classes) {
  if (num_classes < 2) {
    std::ostringstream msg;
    msg << "num_classes must be >= 2 (background plus one foreground), got "
        << num_classes;
    throw ValidationError(msg.str());
  }
}

}  // namespace

void SetMaxThreads(unsigned threads) { g_max_threads.store(threads); }

unsigned MaxThreads() {
  const unsigned requested = g_max_threads.load();
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

HardLabelMap::HardLabelMap(std::size_t height, std::size_t width,
                           int num_classes)
    : HardLabelMap(height, width, num_classes,
                   std::vector<ClassId>(height * width, 0)) {}

HardLabelMap::HardLabelMap(std::size_t height, std::size_t width,
                           int num_classes, std::vector<ClassId> data)
    : height_(height),
      width_(width),
      num_classes_(num_classes),
      data_(std::move(data)) {
  CheckExtent(height, width);
  CheckClassCount(num_classes);
  if (data_.size() != height * width) {
    throw ValidationError("label data size does not match height*width");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] < 0 || data_[i] >= num_classes) {
      std::ostringstream msg;
      msg << "class index " << data_[i] << " at (" << i / width << ", "
          << i % width << ") is outside [0, " << num_classes << ")";
      throw ValidationError(msg.str());
    }
  }
}

SoftLabelMap::SoftLabelMap(std::size_t height, std::size_t width,
                           int num_classes)
    : SoftLabelMap(height, width, num_classes,
                   std::vector<double>(height * width *
                                       static_cast<std::size_t>(num_classes > 0 ? num_classes : 0))) {}

SoftLabelMap::SoftLabelMap(std::size_t height, std::size_t width,
                           int num_classes, std::vector<double> planar)
    : height_(height),
      width_(width),
      num_classes_(num_classes),
      data_(std::move(planar)) {
  CheckExtent(height, width);
  CheckClassCount(num_classes);
  if (data_.size() != height * width * static_cast<std::size_t>(num_classes)) {
    throw ValidationError(
        "soft label data size does not match height*width*num_classes");
  }
}

ImagePlane::ImagePlane(std::size_t height, std::size_t width, double fill)
    : ImagePlane(height, width, std::vector<double>(height * width, fill)) {}

ImagePlane::ImagePlane(std::size_t height, std::size_t width,
                       std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  CheckExtent(height, width);
  if (data_.size() != height * width) {
    throw ValidationError("image data size does not match height*width");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      std::ostringstream msg;
      msg << "non-finite intensity at (" << i / width << ", " << i % width
          << ")";
      throw ValidationError(msg.str());
    }
  }
}

MultiChannelImage::MultiChannelImage(std::vector<ImagePlane> channels)
    : channels_(std::move(channels)) {
  if (channels_.empty()) {
    throw ValidationError("multi-channel image needs at least one channel");
  }
  for (const auto& plane : channels_) {
    if (plane.height() != channels_.front().height() ||
        plane.width() != channels_.front().width()) {
      throw ValidationError("all channels must share height and width");
    }
  }
}

SoftLabelMap OneHot(const HardLabelMap& label) {
  const std::size_t plane = label.pixel_count();
  std::vector<double> out(plane * static_cast<std::size_t>(label.num_classes()),
                          0.0);
  const auto data = label.data();
  for (std::size_t i = 0; i < plane; ++i) {
    out[static_cast<std::size_t>(data[i]) * plane + i] = 1.0;
  }
  return SoftLabelMap(label.height(), label.width(), label.num_classes(),
                      std::move(out));
}

HardLabelMap ArgmaxToHard(const SoftLabelMap& soft) {
  const std::size_t plane = soft.pixel_count();
  const auto data = soft.data();
  std::vector<ClassId> out(plane, 0);
  for (std::size_t i = 0; i < plane; ++i) {
    double best = data[i];
    for (int c = 1; c < soft.num_classes(); ++c) {
      const double p = data[static_cast<std::size_t>(c) * plane + i];
      // Strict comparison keeps the first class on ties.
      if (p > best) {
        best = p;
        out[i] = c;
      }
    }
  }
  return HardLabelMap(soft.height(), soft.width(), soft.num_classes(),
                      std::move(out));
}

SimplexCheck Validate(const SoftLabelMap& soft, double tolerance) {
  SimplexCheck result;
  const std::size_t plane = soft.pixel_count();
  const auto data = soft.data();
  for (std::size_t i = 0; i < plane; ++i) {
    double sum = 0.0;
    double deviation = 0.0;
    for (int c = 0; c < soft.num_classes(); ++c) {
      const double p = data[static_cast<std::size_t>(c) * plane + i];
      if (std::isnan(p)) {
        deviation = std::numeric_limits<double>::infinity();
      } else if (p < 0.0) {
        deviation = std::max(deviation, -p);
      } else if (p > 1.0) {
        deviation = std::max(deviation, p - 1.0);
      }
      sum += p;
    }
    const double sum_dev = std::abs(sum - 1.0);
    deviation = std::isnan(sum_dev) ? std::numeric_limits<double>::infinity()
                                    : std::max(deviation, sum_dev);
    if (deviation > tolerance) {
      return SimplexCheck{false, i / soft.width(), i % soft.width(), deviation};
    }
    if (deviation > result.deviation) {
      result.deviation = deviation;
      result.row = i / soft.width();
      result.col = i % soft.width();
    }
  }
  return result;
}

}  // namespace epd
