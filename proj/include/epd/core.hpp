#ifndef EPD_CORE_HPP
#define EPD_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace epd {

using ClassId = std::int32_t;

// Per-pixel simplex tolerance for soft labels.
inline constexpr double kSimplexTolerance = 1e-12;

/// Row-major grid of dense class indices in [0, num_classes). Class 0 is
/// background.
class HardLabelMap {
 public:
  // All-background map.
  HardLabelMap(std::size_t height, std::size_t width, int num_classes);
  // Throws ValidationError if any index is outside [0, num_classes).
  HardLabelMap(std::size_t height, std::size_t width, int num_classes,
               std::vector<ClassId> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixel_count() const { return data_.size(); }
  int num_classes() const { return num_classes_; }

  ClassId operator()(std::size_t row, std::size_t col) const {
    return data_[row * width_ + col];
  }
  std::span<const ClassId> data() const { return data_; }

  friend bool operator==(const HardLabelMap&, const HardLabelMap&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  int num_classes_;
  std::vector<ClassId> data_;
};

/// Per-pixel class probabilities, stored channel-planar: all of class 0's
/// plane, then class 1's, and so on. The constructor only checks shape; use
/// Validate() to check the simplex invariant.
class SoftLabelMap {
 public:
  SoftLabelMap(std::size_t height, std::size_t width, int num_classes);
  SoftLabelMap(std::size_t height, std::size_t width, int num_classes,
               std::vector<double> planar);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixel_count() const { return height_ * width_; }
  int num_classes() const { return num_classes_; }

  double operator()(std::size_t row, std::size_t col, int c) const {
    return data_[static_cast<std::size_t>(c) * height_ * width_ +
                 row * width_ + col];
  }
  std::span<const double> channel(int c) const {
    return std::span<const double>(data_).subspan(
        static_cast<std::size_t>(c) * height_ * width_, height_ * width_);
  }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const SoftLabelMap&, const SoftLabelMap&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  int num_classes_;
  std::vector<double> data_;
};

/// Row-major scalar intensities. Values are HU for raw CT and [0,1] after
/// windowing. Construction rejects NaN and Inf.
class ImagePlane {
 public:
  ImagePlane(std::size_t height, std::size_t width, double fill = 0.0);
  ImagePlane(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixel_count() const { return data_.size(); }

  double operator()(std::size_t row, std::size_t col) const {
    return data_[row * width_ + col];
  }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> data_;
};

class MultiChannelImage {
 public:
  // Throws ValidationError if channels is empty or the planes differ in size.
  explicit MultiChannelImage(std::vector<ImagePlane> channels);

  std::size_t height() const { return channels_.front().height(); }
  std::size_t width() const { return channels_.front().width(); }
  std::size_t channel_count() const { return channels_.size(); }
  const ImagePlane& channel(std::size_t i) const { return channels_.at(i); }
  const std::vector<ImagePlane>& channels() const { return channels_; }

  friend bool operator==(const MultiChannelImage&,
                         const MultiChannelImage&) = default;

 private:
  std::vector<ImagePlane> channels_;
};

SoftLabelMap OneHot(const HardLabelMap& label);

// Smallest class index attaining the per-pixel maximum.
HardLabelMap ArgmaxToHard(const SoftLabelMap& soft);

struct SimplexCheck {
  bool valid = true;
  // First violating pixel when !valid; otherwise the pixel with the largest
  // deviation.
  std::size_t row = 0;
  std::size_t col = 0;
  // max(|sum - 1|, distance of any entry outside [0,1]); +inf for NaN.
  double deviation = 0.0;
};

SimplexCheck Validate(const SoftLabelMap& soft,
                      double tolerance = kSimplexTolerance);

}  // namespace epd

#endif  // EPD_CORE_HPP
