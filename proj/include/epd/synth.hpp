#ifndef EPD_SYNTH_HPP
#define EPD_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epd/core.hpp"

namespace epd::synth {

enum class ShapeKind { kDisk, kHalfPlane, kStripes, kRandom };

ShapeKind ParseShapeKind(std::string_view name);
std::string_view ShapeKindName(ShapeKind kind);

/// Geometry for a synthetic label. Coordinates are continuous with pixel
/// (r, c) centered at (r + 0.5, c + 0.5).
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kDisk;
  std::size_t height = 64;
  std::size_t width = 64;
  int num_classes = 2;
  // Disk center, or a point on the half-plane boundary.
  double center_row = 32.0;
  double center_col = 32.0;
  double radius = 16.0;
  // Half-plane normal, degrees from the +row axis towards +col. Pixels on the
  // normal side (or on the line) are class 1.
  double angle_deg = 0.0;
  std::size_t stripe_width = 1;
  // Shift in pixels: stripes move along columns, disks and half-planes move
  // their center/origin along both axes.
  std::size_t phase = 0;
  std::uint64_t seed = 0;
};

/// Disk: class 1 strictly inside the radius, else 0. Stripes: vertical bands
/// of stripe_width columns cycling through classes 0..C-1. Random: i.i.d.
/// uniform classes from a seeded generator. Throws ValidationError when the
/// geometry leaves the image.
HardLabelMap Generate(const ShapeSpec& spec);

// Naive reference for EpdLabelDownsample: explicit per-window histogram.
SoftLabelMap OracleEpd(const HardLabelMap& label, std::size_t factor);

// Fraction of pixels with at least one probability strictly inside (0, 1).
double EdgeFraction(const SoftLabelMap& soft);

struct BenchmarkRow {
  std::string method;
  std::string shape;
  std::size_t factor = 1;
  std::size_t phase = 0;
  // Largest relative class-mass error over the foreground classes.
  double mass_error = 0.0;
  double edge_fraction = 0.0;
};

/// EPD vs nearest-neighbor class-area estimates for one shape and factor.
/// Estimated area is f^2 * (soft mass) for EPD and f^2 * (pixel count) for
/// nearest. Throws ValidationError if the shape has no foreground.
std::vector<BenchmarkRow> AreaErrorBenchmark(const ShapeSpec& spec,
                                             std::size_t factor);

// Runs AreaErrorBenchmark for every factor and every phase in [0, factor).
std::vector<BenchmarkRow> BenchmarkSweep(ShapeSpec spec,
                                         std::span<const std::size_t> factors);

// Columns: method,shape,factor,phase,mass_error,edge_fraction.
void WriteBenchmarkCsv(std::ostream& out, std::span<const BenchmarkRow> rows);

}  // namespace epd::synth

#endif  // EPD_SYNTH_HPP
