#ifndef EPD_IO_HPP
#define EPD_IO_HPP

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <variant>

#include "epd/core.hpp"

namespace epd::io {

enum class Semantic { kHardLabel, kSoftLabel, kImageHu, kImageNorm };
enum class DType { kU8, kI16, kF64 };

std::string_view SemanticName(Semantic s);
std::string_view DTypeName(DType d);

/// A plane file is a JSON sidecar plus a raw payload, channel-planar,
/// row-major, little-endian. "x", "x.json" and "x.raw" all name the pair
/// x.json + x.raw.
struct PlanePaths {
  std::filesystem::path sidecar;
  std::filesystem::path payload;
};
PlanePaths ResolvePlanePaths(const std::filesystem::path& path);

using PlaneValue = std::variant<HardLabelMap, SoftLabelMap, MultiChannelImage>;

struct LoadedPlane {
  Semantic semantic;
  PlaneValue value;
};

// Hard labels are written as u8 when num_classes <= 256, else i16.
void SaveHardLabel(const std::filesystem::path& path, const HardLabelMap& label);
void SaveSoftLabel(const std::filesystem::path& path, const SoftLabelMap& soft);
// semantic must be kImageHu or kImageNorm. Always written as f64.
void SaveImage(const std::filesystem::path& path, const MultiChannelImage& image,
               Semantic semantic);

/// Loads a plane file, or an 8-bit binary PGM (P5) as a hard label. Throws
/// ValidationError on malformed sidecars, payload length mismatches and
/// soft labels that break the simplex invariant.
LoadedPlane Load(const std::filesystem::path& path);

HardLabelMap LoadHardLabel(const std::filesystem::path& path);
SoftLabelMap LoadSoftLabel(const std::filesystem::path& path);
MultiChannelImage LoadImage(const std::filesystem::path& path);

/// Gray value = class index. Without num_classes, the class count is
/// maxval + 1, except for the generic maxval 255 where it is (largest gray
/// value present) + 1. Always at least 2.
HardLabelMap ReadPgm(const std::filesystem::path& path, int num_classes = 0);
// Throws ValidationError if num_classes > 256.
void WritePgm(const std::filesystem::path& path, const HardLabelMap& label);

struct LabelPadding {
  HardLabelMap label;
  std::size_t pad_bottom = 0;
  std::size_t pad_right = 0;
};

// Pads bottom/right with background class 0 up to multiples of factor.
LabelPadding PadToMultiple(const HardLabelMap& label, std::size_t factor);

struct ImagePadding {
  MultiChannelImage image;
  std::size_t pad_bottom = 0;
  std::size_t pad_right = 0;
};

// Pads bottom/right by replicating the last row/column.
ImagePadding PadToMultiple(const MultiChannelImage& image, std::size_t factor);

}  // namespace epd::io

#endif  // EPD_IO_HPP
