#include "epd/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epd/error.hpp"

namespace epd::io {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kByteOrder = "little-endian";

std::size_t DTypeSize(DType d) {
  switch (d) {
    case DType::kU8:
      return 1;
    case DType::kI16:
      return 2;
    case DType::kF64:
      return 8;
  }
  return 0;
}

DType ParseDType(const std::string& s) {
  if (s == "u8") return DType::kU8;
  if (s == "i16") return DType::kI16;
  if (s == "f64") return DType::kF64;
  throw ValidationError("unknown dtype '" + s + "' (u8, i16, f64)");
}

Semantic ParseSemantic(const std::string& s) {
  if (s == "hard-label") return Semantic::kHardLabel;
  if (s == "soft-label") return Semantic::kSoftLabel;
  if (s == "image-hu") return Semantic::kImageHu;
  if (s == "image-norm") return Semantic::kImageNorm;
  throw ValidationError("unknown semantic '" + s + "'");
}

std::vector<unsigned char> ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void WriteBytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("failed writing " + path.string());
}

void PutLittleEndian(std::vector<unsigned char>& out, std::uint64_t v,
                     std::size_t bytes) {
  for (std::size_t b = 0; b < bytes; ++b) {
    out.push_back(static_cast<unsigned char>(v >> (8 * b)));
  }
}

std::uint64_t GetLittleEndian(const unsigned char* p, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < bytes; ++b) {
    v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  }
  return v;
}

struct Header {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  DType dtype = DType::kF64;
  Semantic semantic = Semantic::kImageNorm;
  int num_classes = 0;
};

void Save(const fs::path& path, const Header& header,
          const std::vector<unsigned char>& payload) {
  const PlanePaths paths = ResolvePlanePaths(path);
  json sidecar = {
      {"height", header.height},
      {"width", header.width},
      {"dtype", DTypeName(header.dtype)},
      {"channels", header.channels},
      {"byte_order", kByteOrder},
      {"semantic", SemanticName(header.semantic)},
      {"payload", paths.payload.filename().string()},
  };
  if (header.num_classes > 0) sidecar["num_classes"] = header.num_classes;
  WriteBytes(paths.payload, payload);
  const std::string text = sidecar.dump(2) + "\n";
  WriteBytes(paths.sidecar, std::vector<unsigned char>(text.begin(), text.end()));
}

std::vector<double> DecodeValues(const std::vector<unsigned char>& bytes,
                                 DType dtype) {
  const std::size_t size = DTypeSize(dtype);
  std::vector<double> values(bytes.size() / size);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t raw = GetLittleEndian(bytes.data() + i * size, size);
    switch (dtype) {
      case DType::kU8:
        values[i] = static_cast<double>(raw);
        break;
      case DType::kI16:
        values[i] = static_cast<double>(
            std::bit_cast<std::int16_t>(static_cast<std::uint16_t>(raw)));
        break;
      case DType::kF64:
        values[i] = std::bit_cast<double>(raw);
        break;
    }
  }
  return values;
}

template <typename T>
T Field(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) {
    throw ValidationError(where.string() + ": sidecar is missing '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where.string() + ": sidecar field '" + key +
                          "' has the wrong type");
  }
}

LoadedPlane LoadPlaneFile(const fs::path& path) {
  const PlanePaths paths = ResolvePlanePaths(path);
  json sidecar;
  {
    std::ifstream in(paths.sidecar);
    if (!in) throw ValidationError("cannot open " + paths.sidecar.string());
    try {
      in >> sidecar;
    } catch (const json::exception& e) {
      throw ValidationError(paths.sidecar.string() + ": " + e.what());
    }
  }
  Header h;
  h.height = Field<std::size_t>(sidecar, "height", paths.sidecar);
  h.width = Field<std::size_t>(sidecar, "width", paths.sidecar);
  h.channels = Field<std::size_t>(sidecar, "channels", paths.sidecar);
  h.dtype = ParseDType(Field<std::string>(sidecar, "dtype", paths.sidecar));
  h.semantic =
      ParseSemantic(Field<std::string>(sidecar, "semantic", paths.sidecar));
  if (sidecar.contains("byte_order") &&
      Field<std::string>(sidecar, "byte_order", paths.sidecar) != kByteOrder) {
    throw ValidationError(paths.sidecar.string() +
                          ": only little-endian payloads are supported");
  }
  if (sidecar.contains("num_classes")) {
    h.num_classes = Field<int>(sidecar, "num_classes", paths.sidecar);
  }
  fs::path payload_path = paths.payload;
  if (sidecar.contains("payload")) {
    payload_path = paths.sidecar.parent_path() /
                   Field<std::string>(sidecar, "payload", paths.sidecar);
  }

  const auto bytes = ReadBytes(payload_path);
  const std::size_t expected =
      h.height * h.width * h.channels * DTypeSize(h.dtype);
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << payload_path.string() << ": payload length mismatch, expected "
        << expected << " bytes, got " << bytes.size();
    throw ValidationError(msg.str());
  }
  auto values = DecodeValues(bytes, h.dtype);

  switch (h.semantic) {
    case Semantic::kHardLabel: {
      if (h.channels != 1) throw ValidationError("hard labels have 1 channel");
      if (h.dtype == DType::kF64) {
        throw ValidationError("hard labels must be stored as u8 or i16");
      }
      std::vector<ClassId> ids(values.size());
      ClassId max_id = 0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        ids[i] = static_cast<ClassId>(values[i]);
        max_id = std::max(max_id, ids[i]);
      }
      const int classes =
          h.num_classes > 0 ? h.num_classes : std::max(2, max_id + 1);
      return {h.semantic,
              HardLabelMap(h.height, h.width, classes, std::move(ids))};
    }
    case Semantic::kSoftLabel: {
      if (h.dtype != DType::kF64) {
        throw ValidationError("soft labels must be stored as f64");
      }
      if (h.num_classes > 0 &&
          static_cast<std::size_t>(h.num_classes) != h.channels) {
        throw ValidationError("soft label num_classes must equal channels");
      }
      SoftLabelMap soft(h.height, h.width, static_cast<int>(h.channels),
                        std::move(values));
      const SimplexCheck check = Validate(soft);
      if (!check.valid) {
        std::ostringstream msg;
        msg << paths.sidecar.string() << ": soft label violates the simplex at ("
            << check.row << ", " << check.col << "), deviation "
            << check.deviation;
        throw ValidationError(msg.str());
      }
      return {h.semantic, std::move(soft)};
    }
    case Semantic::kImageHu:
    case Semantic::kImageNorm: {
      std::vector<ImagePlane> planes;
      const std::size_t plane = h.height * h.width;
      for (std::size_t c = 0; c < h.channels; ++c) {
        planes.emplace_back(
            h.height, h.width,
            std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(c * plane),
                                values.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane)));
      }
      return {h.semantic, MultiChannelImage(std::move(planes))};
    }
  }
  throw ValidationError("unreachable semantic");
}

bool IsPgm(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm";
}

}  // namespace

std::string_view SemanticName(Semantic s) {
  switch (s) {
    case Semantic::kHardLabel:
      return "hard-label";
    case Semantic::kSoftLabel:
      return "soft-label";
    case Semantic::kImageHu:
      return "image-hu";
    case Semantic::kImageNorm:
      return "image-norm";
  }
  return "unknown";
}

std::string_view DTypeName(DType d) {
  switch (d) {
    case DType::kU8:
      return "u8";
    case DType::kI16:
      return "i16";
    case DType::kF64:
      return "f64";
  }
  return "unknown";
}

PlanePaths ResolvePlanePaths(const fs::path& path) {
  fs::path stem = path;
  if (path.extension() == ".json" || path.extension() == ".raw") {
    stem.replace_extension();
  }
  fs::path sidecar = stem;
  sidecar += ".json";
  fs::path payload = stem;
  payload += ".raw";
  return {sidecar, payload};
}

void SaveHardLabel(const fs::path& path, const HardLabelMap& label) {
  Header h{label.height(), label.width(), 1,
           label.num_classes() <= 256 ? DType::kU8 : DType::kI16,
           Semantic::kHardLabel, label.num_classes()};
  if (label.num_classes() > 32768) {
    throw ValidationError("hard labels support at most 32768 classes");
  }
  std::vector<unsigned char> payload;
  payload.reserve(label.pixel_count() * DTypeSize(h.dtype));
  for (ClassId c : label.data()) {
    PutLittleEndian(payload, static_cast<std::uint64_t>(c), DTypeSize(h.dtype));
  }
  Save(path, h, payload);
}

void SaveSoftLabel(const fs::path& path, const SoftLabelMap& soft) {
  Header h{soft.height(), soft.width(),
           static_cast<std::size_t>(soft.num_classes()), DType::kF64,
           Semantic::kSoftLabel, soft.num_classes()};
  std::vector<unsigned char> payload;
  payload.reserve(soft.data().size() * 8);
  for (double v : soft.data()) {
    PutLittleEndian(payload, std::bit_cast<std::uint64_t>(v), 8);
  }
  Save(path, h, payload);
}

void SaveImage(const fs::path& path, const MultiChannelImage& image,
               Semantic semantic) {
  if (semantic != Semantic::kImageHu && semantic != Semantic::kImageNorm) {
    throw ValidationError("SaveImage needs an image semantic");
  }
  Header h{image.height(), image.width(), image.channel_count(), DType::kF64,
           semantic, 0};
  std::vector<unsigned char> payload;
  payload.reserve(image.height() * image.width() * image.channel_count() * 8);
  for (const auto& plane : image.channels()) {
    for (double v : plane.data()) {
      PutLittleEndian(payload, std::bit_cast<std::uint64_t>(v), 8);
    }
  }
  Save(path, h, payload);
}

LoadedPlane Load(const fs::path& path) {
  if (IsPgm(path)) return {Semantic::kHardLabel, ReadPgm(path)};
  return LoadPlaneFile(path);
}

HardLabelMap LoadHardLabel(const fs::path& path) {
  auto loaded = Load(path);
  if (auto* label = std::get_if<HardLabelMap>(&loaded.value)) {
    return std::move(*label);
  }
  throw ValidationError(path.string() + " is not a hard label");
}

SoftLabelMap LoadSoftLabel(const fs::path& path) {
  auto loaded = Load(path);
  if (auto* soft = std::get_if<SoftLabelMap>(&loaded.value)) {
    return std::move(*soft);
  }
  throw ValidationError(path.string() + " is not a soft label");
}

MultiChannelImage LoadImage(const fs::path& path) {
  auto loaded = Load(path);
  if (auto* image = std::get_if<MultiChannelImage>(&loaded.value)) {
    return std::move(*image);
  }
  throw ValidationError(path.string() + " is not an image");
}

HardLabelMap ReadPgm(const fs::path& path, int num_classes) {
  const auto bytes = ReadBytes(path);
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> std::size_t {
    skip_space_and_comments();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw ValidationError(path.string() + ": malformed PGM header");
    }
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      ++pos;
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ValidationError(path.string() + ": not a binary PGM (P5)");
  }
  pos = 2;
  const std::size_t width = read_int();
  const std::size_t height = read_int();
  const std::size_t maxval = read_int();
  if (maxval == 0 || maxval > 255) {
    throw ValidationError(path.string() + ": only 8-bit PGM is supported");
  }
  ++pos;  // single whitespace before the raster
  const std::size_t expected = width * height;
  if (expected == 0) throw ValidationError(path.string() + ": empty PGM");
  if (pos > bytes.size() || bytes.size() - pos != expected) {
    std::ostringstream msg;
    msg << path.string() << ": PGM raster length mismatch, expected "
        << expected << " bytes, got " << (pos > bytes.size() ? 0 : bytes.size() - pos);
    throw ValidationError(msg.str());
  }
  std::vector<ClassId> ids(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                           bytes.end());
  const ClassId max_id = *std::max_element(ids.begin(), ids.end());
  if (static_cast<std::size_t>(max_id) > maxval) {
    throw ValidationError(path.string() + ": gray value exceeds maxval");
  }
  // maxval 255 is the generic 8-bit header; anything lower names the top class.
  const ClassId top = maxval < 255 ? static_cast<ClassId>(maxval) : max_id;
  const int classes = num_classes > 0 ? num_classes : std::max(2, top + 1);
  return HardLabelMap(height, width, classes, std::move(ids));
}

void WritePgm(const fs::path& path, const HardLabelMap& label) {
  if (label.num_classes() > 256) {
    throw ValidationError("PGM holds at most 256 classes");
  }
  std::ostringstream header;
  header << "P5\n"
         << label.width() << " " << label.height() << "\n"
         << label.num_classes() - 1 << "\n";
  const std::string text = header.str();
  std::vector<unsigned char> bytes(text.begin(), text.end());
  for (ClassId c : label.data()) bytes.push_back(static_cast<unsigned char>(c));
  WriteBytes(path, bytes);
}

LabelPadding PadToMultiple(const HardLabelMap& label, std::size_t factor) {
  if (factor == 0) throw ValidationError("factor must be >= 1");
  const std::size_t h = (label.height() + factor - 1) / factor * factor;
  const std::size_t w = (label.width() + factor - 1) / factor * factor;
  std::vector<ClassId> data(h * w, 0);
  for (std::size_t r = 0; r < label.height(); ++r) {
    for (std::size_t c = 0; c < label.width(); ++c) {
      data[r * w + c] = label(r, c);
    }
  }
  return {HardLabelMap(h, w, label.num_classes(), std::move(data)),
          h - label.height(), w - label.width()};
}

ImagePadding PadToMultiple(const MultiChannelImage& image, std::size_t factor) {
  if (factor == 0) throw ValidationError("factor must be >= 1");
  const std::size_t h = (image.height() + factor - 1) / factor * factor;
  const std::size_t w = (image.width() + factor - 1) / factor * factor;
  std::vector<ImagePlane> planes;
  for (const auto& plane : image.channels()) {
    std::vector<double> data(h * w);
    for (std::size_t r = 0; r < h; ++r) {
      const std::size_t sr = std::min(r, plane.height() - 1);
      for (std::size_t c = 0; c < w; ++c) {
        data[r * w + c] = plane(sr, std::min(c, plane.width() - 1));
      }
    }
    planes.emplace_back(h, w, std::move(data));
  }
  return {MultiChannelImage(std::move(planes)), h - image.height(),
          w - image.width()};
}

}  // namespace epd::io
