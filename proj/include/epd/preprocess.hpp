#ifndef EPD_PREPROCESS_HPP
#define EPD_PREPROCESS_HPP

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "epd/core.hpp"

namespace epd {

/// Hounsfield-unit range [lo, hi] mapped linearly onto [0, 1].
class HUWindow {
 public:
  // Throws ValidationError unless lo < hi and both are finite.
  HUWindow(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }

  // Parses "lo:hi", e.g. "-190:-30".
  static HUWindow Parse(std::string_view text);

  friend bool operator==(const HUWindow&, const HUWindow&) = default;

 private:
  double lo_;
  double hi_;
};

// Adipose, muscle/soft tissue, and a wide window. Configuration defaults only.
std::array<HUWindow, 3> DefaultWindows();

// Parses a comma-separated list of "lo:hi" windows.
std::vector<HUWindow> ParseWindows(std::string_view text);

ImagePlane HuWindow(const ImagePlane& hu, const HUWindow& window);

// One channel per window, in window order. Exactly three windows required.
MultiChannelImage StackWindows(const ImagePlane& hu,
                               std::span<const HUWindow> windows);

}  // namespace epd

#endif  // EPD_PREPROCESS_HPP
