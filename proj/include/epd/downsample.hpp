#ifndef EPD_DOWNSAMPLE_HPP
#define EPD_DOWNSAMPLE_HPP

#include <cstddef>
#include <vector>

#include "epd/core.hpp"

namespace epd {

/// Integer window side length. Pyramid level d corresponds to 2^d.
class DownsampleSpec {
 public:
  // Throws ValidationError for factor 0.
  explicit DownsampleSpec(std::size_t factor);
  static DownsampleSpec FromLevel(int level);

  std::size_t factor() const { return factor_; }

 private:
  std::size_t factor_;
};

// Throws DivisibilityError if either extent is not a multiple of the factor,
// and ValidationError if the factor exceeds min(height, width).
void CheckDownsampleShape(std::size_t height, std::size_t width,
                          const DownsampleSpec& spec);

/// Edge-preserving probabilistic downsampling of a hard label. Output pixel
/// (i, j, c) is the fraction of the f x f window rooted at (i*f, j*f) that
/// holds class c, so a window is uniform iff some p_c == 1 and an edge window
/// has every present class strictly inside (0, 1).
SoftLabelMap EpdLabelDownsample(const HardLabelMap& label,
                                const DownsampleSpec& spec);

// Per-channel window mean. Equals EpdLabelDownsample on one-hot input, and
// chaining f=2 twice equals f=4 for labels.
SoftLabelMap EpdSoftDownsample(const SoftLabelMap& soft,
                               const DownsampleSpec& spec);

// Window mean, accumulated row-major within each window.
ImagePlane EpdImageDownsample(const ImagePlane& image,
                              const DownsampleSpec& spec);

// Samples the source pixel at (i*f + f/2, j*f + f/2), i.e. the pixel holding
// the output cell's center.
HardLabelMap NearestLabelDownsample(const HardLabelMap& label,
                                    const DownsampleSpec& spec);

// Bilinear sample at ((i+0.5)*f - 0.5, (j+0.5)*f - 0.5), clamped to the
// image at the borders.
ImagePlane BilinearImageDownsample(const ImagePlane& image,
                                   const DownsampleSpec& spec);

MultiChannelImage EpdImageDownsample(const MultiChannelImage& image,
                                     const DownsampleSpec& spec);

/// Levels 1..max_level, base to apex; level d uses window side 2^d. Returns
/// an empty list for max_level == 0.
std::vector<SoftLabelMap> BuildPyramid(const HardLabelMap& label,
                                       int max_level);

}  // namespace epd

#endif  // EPD_DOWNSAMPLE_HPP
