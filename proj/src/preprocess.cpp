#include "epd/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "epd/error.hpp"

namespace epd {
namespace {

double ParseNumber(std::string_view text) {
  // Trim spaces so "-190 : -30" parses.
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ValidationError("invalid HU value '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

HUWindow::HUWindow(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    std::ostringstream msg;
    msg << "invalid HU window [" << lo << ", " << hi << "]: need lo < hi";
    throw ValidationError(msg.str());
  }
}

HUWindow HUWindow::Parse(std::string_view text) {
  // Split on the colon that follows the first number; the first character
  // may itself be a minus sign.
  const auto colon = text.find(':', 1);
  if (colon == std::string_view::npos) {
    throw ValidationError("HU window must look like lo:hi, got '" +
                          std::string(text) + "'");
  }
  return HUWindow(ParseNumber(text.substr(0, colon)),
                  ParseNumber(text.substr(colon + 1)));
}

std::array<HUWindow, 3> DefaultWindows() {
  return {HUWindow(-190.0, -30.0), HUWindow(-29.0, 150.0),
          HUWindow(-1000.0, 1000.0)};
}

std::vector<HUWindow> ParseWindows(std::string_view text) {
  std::vector<HUWindow> windows;
  while (!text.empty()) {
    const auto comma = text.find(',');
    windows.push_back(HUWindow::Parse(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return windows;
}

ImagePlane HuWindow(const ImagePlane& hu, const HUWindow& window) {
  const double span = window.hi() - window.lo();
  std::vector<double> out(hu.pixel_count());
  const auto in = hu.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp((in[i] - window.lo()) / span, 0.0, 1.0);
  }
  return ImagePlane(hu.height(), hu.width(), std::move(out));
}

MultiChannelImage StackWindows(const ImagePlane& hu,
                               std::span<const HUWindow> windows) {
  if (windows.size() != 3) {
    throw ValidationError("expected exactly 3 HU windows, got " +
                          std::to_string(windows.size()));
  }
  std::vector<ImagePlane> channels;
  channels.reserve(windows.size());
  for (const auto& window : windows) channels.push_back(HuWindow(hu, window));
  return MultiChannelImage(std::move(channels));
}

}  // namespace epd
