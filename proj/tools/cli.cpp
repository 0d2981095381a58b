#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epd/downsample.hpp"
#include "epd/error.hpp"
#include "epd/io.hpp"
#include "epd/losses.hpp"
#include "epd/parallel.hpp"
#include "epd/preprocess.hpp"
#include "epd/report_io.hpp"
#include "epd/synth.hpp"

namespace epd::cli {
namespace {

namespace fs = std::filesystem;

struct DownsampleArgs {
  std::string input;
  std::string output;
  std::size_t factor = 2;
  std::string method = "epd";
  std::string kind;
  bool pad = false;
};

struct MetricsArgs {
  std::string pred;
  std::string target;
  double step = 0.01;
  std::string report = "csv";
  std::string output;
};

struct ShapeArgs {
  std::string shape = "disk";
  std::string size = "512";
  int classes = 2;
  std::optional<double> center_row;
  std::optional<double> center_col;
  double radius = 100.0;
  double angle = 0.0;
  std::size_t stripe_width = 1;
  std::size_t phase = 0;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  ShapeArgs shape;
  std::string output;
};

struct BenchArgs {
  ShapeArgs shape;
  std::string factors = "2,4,8";
  std::string output;
};

struct LossArgs {
  std::string target;
  std::string pred;
  std::string omega = "1,1";
  double epsilon = 0.0;
};

struct PipelineArgs {
  std::string input;
  std::string output;
  std::string windows = "-190:-30,-29:150,-1000:1000";
  std::size_t factor = 2;
  std::string method = "epd";
};

std::string Format6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<std::string> SplitCsv(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

double ParseDouble(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ValidationError(std::string("invalid ") + what + " '" + text + "'");
  }
  return v;
}

std::pair<std::size_t, std::size_t> ParseSize(const std::string& text) {
  const auto x = text.find('x');
  auto parse = [&](const std::string& s) {
    const double v = ParseDouble(s, "size");
    if (v < 1 || v != std::floor(v)) {
      throw ValidationError("size must be a positive integer, got '" + s + "'");
    }
    return static_cast<std::size_t>(v);
  };
  if (x == std::string::npos) {
    const auto n = parse(text);
    return {n, n};
  }
  return {parse(text.substr(0, x)), parse(text.substr(x + 1))};
}

synth::ShapeSpec ToShapeSpec(const ShapeArgs& a) {
  synth::ShapeSpec spec;
  spec.kind = synth::ParseShapeKind(a.shape);
  std::tie(spec.height, spec.width) = ParseSize(a.size);
  spec.num_classes = a.classes;
  spec.center_row = a.center_row.value_or(static_cast<double>(spec.height) / 2);
  spec.center_col = a.center_col.value_or(static_cast<double>(spec.width) / 2);
  spec.radius = a.radius;
  spec.angle_deg = a.angle;
  spec.stripe_width = a.stripe_width;
  spec.phase = a.phase;
  spec.seed = a.seed;
  return spec;
}

void AddShapeOptions(CLI::App* cmd, ShapeArgs& a) {
  cmd->add_option("--shape", a.shape, "disk | half-plane | stripes | random")
      ->capture_default_str();
  cmd->add_option("--size", a.size, "N or HxW")->capture_default_str();
  cmd->add_option("--classes", a.classes, "class count")->capture_default_str();
  cmd->add_option("--center-row", a.center_row, "disk center / half-plane origin row");
  cmd->add_option("--center-col", a.center_col, "disk center / half-plane origin col");
  cmd->add_option("--radius", a.radius)->capture_default_str();
  cmd->add_option("--angle", a.angle, "half-plane normal, degrees")
      ->capture_default_str();
  cmd->add_option("--width", a.stripe_width, "stripe width in pixels")
      ->capture_default_str();
  cmd->add_option("--phase", a.phase, "shift in pixels")->capture_default_str();
  cmd->add_option("--seed", a.seed)->capture_default_str();
}

bool IsPgmPath(const std::string& path) {
  return fs::path(path).extension() == ".pgm";
}

void SaveLabel(const std::string& path, const HardLabelMap& label) {
  if (IsPgmPath(path)) {
    io::WritePgm(path, label);
  } else {
    io::SaveHardLabel(path, label);
  }
}

void CheckSimplex(const SoftLabelMap& soft) {
  const SimplexCheck check = Validate(soft);
  if (!check.valid) {
    std::ostringstream msg;
    msg << "downsampled soft label breaks the simplex at (" << check.row
        << ", " << check.col << ")";
    throw InvariantError(msg.str());
  }
}

template <typename Fn>
auto WithPadHint(Fn&& fn) {
  try {
    return fn();
  } catch (const DivisibilityError& e) {
    throw ValidationError(std::string(e.what()) +
                          "; rerun with --pad to pad explicitly");
  }
}

int RunDownsample(const DownsampleArgs& a, std::ostream& out) {
  const DownsampleSpec spec(a.factor);
  io::LoadedPlane input = io::Load(a.input);
  std::string kind = a.kind;
  if (kind.empty()) {
    kind = (input.semantic == io::Semantic::kHardLabel ||
            input.semantic == io::Semantic::kSoftLabel)
               ? "label"
               : "image";
  }
  if (kind != "label" && kind != "image") {
    throw ValidationError("--kind must be label or image");
  }

  if (kind == "label") {
    if (auto* soft = std::get_if<SoftLabelMap>(&input.value)) {
      if (a.method != "epd") {
        throw ValidationError("soft labels only support --method epd");
      }
      const SoftLabelMap result =
          WithPadHint([&] { return EpdSoftDownsample(*soft, spec); });
      CheckSimplex(result);
      io::SaveSoftLabel(a.output, result);
      out << "wrote soft-label " << result.height() << "x" << result.width()
          << "x" << result.num_classes() << "\n";
      return kExitOk;
    }
    auto* label = std::get_if<HardLabelMap>(&input.value);
    if (label == nullptr) throw ValidationError("--kind label needs a label input");
    HardLabelMap source = *label;
    if (a.pad) {
      auto padded = io::PadToMultiple(source, a.factor);
      source = std::move(padded.label);
      out << "padded bottom=" << padded.pad_bottom
          << " right=" << padded.pad_right << "\n";
    }
    if (a.method == "epd") {
      const SoftLabelMap result =
          WithPadHint([&] { return EpdLabelDownsample(source, spec); });
      CheckSimplex(result);
      io::SaveSoftLabel(a.output, result);
      out << "wrote soft-label " << result.height() << "x" << result.width()
          << "x" << result.num_classes() << "\n";
    } else if (a.method == "nearest") {
      const HardLabelMap result =
          WithPadHint([&] { return NearestLabelDownsample(source, spec); });
      SaveLabel(a.output, result);
      out << "wrote hard-label " << result.height() << "x" << result.width()
          << "\n";
    } else {
      throw ValidationError("labels support --method epd or nearest");
    }
    return kExitOk;
  }

  auto* image = std::get_if<MultiChannelImage>(&input.value);
  if (image == nullptr) throw ValidationError("--kind image needs an image input");
  MultiChannelImage source = *image;
  if (a.pad) {
    auto padded = io::PadToMultiple(source, a.factor);
    source = std::move(padded.image);
    out << "padded bottom=" << padded.pad_bottom
        << " right=" << padded.pad_right << "\n";
  }
  std::vector<ImagePlane> planes;
  for (const auto& plane : source.channels()) {
    if (a.method == "epd") {
      planes.push_back(WithPadHint([&] { return EpdImageDownsample(plane, spec); }));
    } else if (a.method == "bilinear") {
      planes.push_back(
          WithPadHint([&] { return BilinearImageDownsample(plane, spec); }));
    } else {
      throw ValidationError("images support --method epd or bilinear");
    }
  }
  const MultiChannelImage result(std::move(planes));
  io::SaveImage(a.output, result, input.semantic);
  out << "wrote " << io::SemanticName(input.semantic) << " " << result.height()
      << "x" << result.width() << "x" << result.channel_count() << "\n";
  return kExitOk;
}

int RunMetrics(const MetricsArgs& a, std::ostream& out) {
  if (a.report != "csv" && a.report != "json") {
    throw ValidationError("--report must be csv or json");
  }
  const SoftLabelMap pred = io::LoadSoftLabel(a.pred);
  io::LoadedPlane target = io::Load(a.target);
  ThresholdSearchResult result;
  if (auto* hard = std::get_if<HardLabelMap>(&target.value)) {
    result = OptimalThresholdSearch(pred, *hard, a.step);
  } else if (auto* soft = std::get_if<SoftLabelMap>(&target.value)) {
    result = OptimalThresholdSearch(pred, *soft, a.step);
  } else {
    throw ValidationError("--target must be a hard or soft label");
  }

  std::ostringstream text;
  if (a.report == "csv") {
    io::WriteMetricsCsv(text, result.report);
  } else {
    text << io::MetricsJson(result.report);
  }
  if (a.output.empty()) {
    out << text.str();
  } else {
    std::ofstream file(a.output, std::ios::binary | std::ios::trunc);
    if (!file) throw ValidationError("cannot write " + a.output);
    file << text.str();
  }
  return kExitOk;
}

int RunSynth(const SynthArgs& a, std::ostream& out) {
  const HardLabelMap label = synth::Generate(ToShapeSpec(a.shape));
  SaveLabel(a.output, label);
  out << "wrote hard-label " << label.height() << "x" << label.width() << "\n";
  return kExitOk;
}

int RunBench(const BenchArgs& a, std::ostream& out) {
  std::vector<std::size_t> factors;
  for (const auto& part : SplitCsv(a.factors)) {
    const double f = ParseDouble(part, "factor");
    if (f < 1 || f != std::floor(f)) {
      throw ValidationError("factors must be positive integers");
    }
    factors.push_back(static_cast<std::size_t>(f));
  }
  if (factors.empty()) throw ValidationError("--factors is empty");
  const auto rows = synth::BenchmarkSweep(ToShapeSpec(a.shape), factors);
  if (a.output.empty()) {
    synth::WriteBenchmarkCsv(out, rows);
  } else {
    std::ofstream file(a.output, std::ios::binary | std::ios::trunc);
    if (!file) throw ValidationError("cannot write " + a.output);
    synth::WriteBenchmarkCsv(file, rows);
  }
  return kExitOk;
}

std::vector<double> LoadFlat(const std::string& path) {
  io::LoadedPlane plane = io::Load(path);
  if (auto* soft = std::get_if<SoftLabelMap>(&plane.value)) {
    return {soft->data().begin(), soft->data().end()};
  }
  if (auto* hard = std::get_if<HardLabelMap>(&plane.value)) {
    const auto one_hot = OneHot(*hard);
    return {one_hot.data().begin(), one_hot.data().end()};
  }
  std::vector<double> flat;
  for (const auto& channel : std::get<MultiChannelImage>(plane.value).channels()) {
    flat.insert(flat.end(), channel.data().begin(), channel.data().end());
  }
  return flat;
}

double Norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

int RunLossEval(const LossArgs& a, std::ostream& out) {
  const auto target = LoadFlat(a.target);
  const auto pred = LoadFlat(a.pred);
  std::vector<double> omega;
  for (const auto& part : SplitCsv(a.omega)) {
    omega.push_back(ParseDouble(part, "omega"));
  }
  const LossWeights weights(omega);
  if (weights.size() != 2) {
    throw ValidationError("--omega needs two weights (L1, dice)");
  }
  const LossEval l1 = L1Loss(target, pred);
  const LossEval dice = DiceLoss(target, pred, a.epsilon);
  const double terms[] = {l1.value, dice.value};
  const LossEval total = TotalLoss(terms, weights);
  std::vector<double> total_grad(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    total_grad[i] = total.grad_terms[0] * l1.grad_pred[i] +
                    total.grad_terms[1] * dice.grad_pred[i];
  }
  out << "l1=" << Format6(l1.value) << "\n"
      << "dice=" << Format6(dice.value) << "\n"
      << "total=" << Format6(total.value) << "\n"
      << "grad_norm_l1=" << Format6(Norm(l1.grad_pred)) << "\n"
      << "grad_norm_dice=" << Format6(Norm(dice.grad_pred)) << "\n"
      << "grad_norm_total=" << Format6(Norm(total_grad)) << "\n"
      << "grad_omega=" << Format6(total.grad_omega[0]) << ","
      << Format6(total.grad_omega[1]) << "\n";
  return kExitOk;
}

int RunPipeline(const PipelineArgs& a, std::ostream& out) {
  const DownsampleSpec spec(a.factor);
  io::LoadedPlane input = io::Load(a.input);
  auto* image = std::get_if<MultiChannelImage>(&input.value);
  if (image == nullptr || input.semantic != io::Semantic::kImageHu ||
      image->channel_count() != 1) {
    throw ValidationError("pipeline needs a single-channel image-hu input");
  }
  const auto windows = ParseWindows(a.windows);
  const MultiChannelImage stacked = StackWindows(image->channel(0), windows);
  std::vector<ImagePlane> planes;
  for (const auto& plane : stacked.channels()) {
    if (a.method == "epd") {
      planes.push_back(WithPadHint([&] { return EpdImageDownsample(plane, spec); }));
    } else if (a.method == "bilinear") {
      planes.push_back(
          WithPadHint([&] { return BilinearImageDownsample(plane, spec); }));
    } else {
      throw ValidationError("pipeline supports --method epd or bilinear");
    }
  }
  const MultiChannelImage result(std::move(planes));
  io::SaveImage(a.output, result, io::Semantic::kImageNorm);
  out << "wrote image-norm " << result.height() << "x" << result.width() << "x"
      << result.channel_count() << "\n";
  return kExitOk;
}

void ApplyThreadEnv() {
  const char* env = std::getenv("EPD_THREADS");
  if (env == nullptr || *env == '\0') return;
  const double v = ParseDouble(env, "EPD_THREADS");
  if (v < 0 || v != std::floor(v)) {
    throw ValidationError("EPD_THREADS must be a non-negative integer");
  }
  SetMaxThreads(static_cast<unsigned>(v));
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Edge-preserving probabilistic downsampling toolkit", "epd"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults");

  DownsampleArgs ds;
  auto* ds_cmd = app.add_subcommand("downsample", "downsample a label or image");
  ds_cmd->add_option("--input", ds.input, "plane file or PGM")->required();
  ds_cmd->add_option("--output", ds.output)->required();
  ds_cmd->add_option("--factor", ds.factor, "window side length")
      ->capture_default_str();
  ds_cmd->add_option("--method", ds.method, "epd | nearest | bilinear")
      ->capture_default_str();
  ds_cmd->add_option("--kind", ds.kind, "label | image (default: from input)");
  ds_cmd->add_flag("--pad", ds.pad,
                   "pad bottom/right to a multiple of the factor");

  MetricsArgs mt;
  auto* mt_cmd = app.add_subcommand("metrics", "threshold search and metrics");
  mt_cmd->add_option("--pred", mt.pred, "soft-label prediction")->required();
  mt_cmd->add_option("--target", mt.target, "hard or soft label")->required();
  mt_cmd->add_option("--step", mt.step)->capture_default_str();
  mt_cmd->add_option("--report", mt.report, "csv | json")->capture_default_str();
  mt_cmd->add_option("--output", mt.output, "default: stdout");

  SynthArgs sy;
  auto* sy_cmd = app.add_subcommand("synth", "generate a synthetic label");
  AddShapeOptions(sy_cmd, sy.shape);
  sy_cmd->add_option("--output", sy.output)->required();

  BenchArgs bn;
  auto* bn_cmd = app.add_subcommand("bench", "EPD vs nearest area error sweep");
  AddShapeOptions(bn_cmd, bn.shape);
  bn_cmd->add_option("--factors", bn.factors)->capture_default_str();
  bn_cmd->add_option("--output", bn.output, "CSV path (default: stdout)");

  LossArgs ls;
  auto* ls_cmd = app.add_subcommand("loss-eval", "evaluate L1, dice and total");
  ls_cmd->add_option("--target", ls.target)->required();
  ls_cmd->add_option("--pred", ls.pred)->required();
  ls_cmd->add_option("--omega", ls.omega, "weights for L1,dice")
      ->capture_default_str();
  ls_cmd->add_option("--epsilon", ls.epsilon, "dice denominator smoothing")
      ->capture_default_str();

  PipelineArgs pl;
  auto* pl_cmd = app.add_subcommand("pipeline", "HU windowing then downsampling");
  pl_cmd->add_option("--input", pl.input, "single-channel image-hu")->required();
  pl_cmd->add_option("--output", pl.output)->required();
  pl_cmd->add_option("--windows", pl.windows, "lo:hi,lo:hi,lo:hi")
      ->capture_default_str();
  pl_cmd->add_option("--factor", pl.factor)->capture_default_str();
  pl_cmd->add_option("--method", pl.method, "epd | bilinear")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    ApplyThreadEnv();
    if (ds_cmd->parsed()) return RunDownsample(ds, out);
    if (mt_cmd->parsed()) return RunMetrics(mt, out);
    if (sy_cmd->parsed()) return RunSynth(sy, out);
    if (bn_cmd->parsed()) return RunBench(bn, out);
    if (ls_cmd->parsed()) return RunLossEval(ls, out);
    if (pl_cmd->parsed()) return RunPipeline(pl, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitValidation;
}

}  // namespace epd::cli
