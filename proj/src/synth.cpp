#include "epd/synth.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include "epd/downsample.hpp"
#include "epd/error.hpp"

namespace epd::synth {
namespace {

void CheckInside(double row, double col, const ShapeSpec& spec,
                 const char* what) {
  if (row < 0.0 || col < 0.0 || row > static_cast<double>(spec.height) ||
      col > static_cast<double>(spec.width)) {
    throw ValidationError(std::string(what) + " lies outside the image");
  }
}

std::vector<double> ClassMass(const SoftLabelMap& soft) {
  std::vector<double> mass(static_cast<std::size_t>(soft.num_classes()), 0.0);
  for (int c = 0; c < soft.num_classes(); ++c) {
    for (double p : soft.channel(c)) mass[static_cast<std::size_t>(c)] += p;
  }
  return mass;
}

double MaxForegroundError(const std::vector<double>& truth,
                          const std::vector<double>& estimate) {
  double worst = 0.0;
  for (std::size_t c = 1; c < truth.size(); ++c) {
    if (truth[c] == 0.0) continue;
    worst = std::max(worst, std::abs(estimate[c] - truth[c]) / truth[c]);
  }
  return worst;
}

}  // namespace

ShapeKind ParseShapeKind(std::string_view name) {
  if (name == "disk") return ShapeKind::kDisk;
  if (name == "half-plane") return ShapeKind::kHalfPlane;
  if (name == "stripes") return ShapeKind::kStripes;
  if (name == "random") return ShapeKind::kRandom;
  throw ValidationError("unknown shape '" + std::string(name) +
                        "' (disk, half-plane, stripes, random)");
}

std::string_view ShapeKindName(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kDisk:
      return "disk";
    case ShapeKind::kHalfPlane:
      return "half-plane";
    case ShapeKind::kStripes:
      return "stripes";
    case ShapeKind::kRandom:
      return "random";
  }
  return "unknown";
}

HardLabelMap Generate(const ShapeSpec& spec) {
  if (spec.height == 0 || spec.width == 0) {
    throw ValidationError("shape size must be at least 1x1");
  }
  if (spec.num_classes < 2) throw ValidationError("need at least 2 classes");
  const double shift = static_cast<double>(spec.phase);
  std::vector<ClassId> data(spec.height * spec.width, 0);
  auto at = [&](std::size_t r, std::size_t c) -> ClassId& {
    return data[r * spec.width + c];
  };

  switch (spec.kind) {
    case ShapeKind::kDisk: {
      const double cr = spec.center_row + shift;
      const double cc = spec.center_col + shift;
      if (spec.radius < 0.0) throw ValidationError("radius must be >= 0");
      CheckInside(cr - spec.radius, cc - spec.radius, spec, "disk");
      CheckInside(cr + spec.radius, cc + spec.radius, spec, "disk");
      const double r2 = spec.radius * spec.radius;
      for (std::size_t r = 0; r < spec.height; ++r) {
        for (std::size_t c = 0; c < spec.width; ++c) {
          const double dr = static_cast<double>(r) + 0.5 - cr;
          const double dc = static_cast<double>(c) + 0.5 - cc;
          if (dr * dr + dc * dc < r2) at(r, c) = 1;
        }
      }
      break;
    }
    case ShapeKind::kHalfPlane: {
      const double orow = spec.center_row + shift;
      const double ocol = spec.center_col + shift;
      CheckInside(orow, ocol, spec, "half-plane origin");
      const double theta = spec.angle_deg * std::numbers::pi / 180.0;
      const double nr = std::cos(theta);
      const double nc = std::sin(theta);
      for (std::size_t r = 0; r < spec.height; ++r) {
        for (std::size_t c = 0; c < spec.width; ++c) {
          const double side = (static_cast<double>(r) + 0.5 - orow) * nr +
                              (static_cast<double>(c) + 0.5 - ocol) * nc;
          if (side >= 0.0) at(r, c) = 1;
        }
      }
      break;
    }
    case ShapeKind::kStripes: {
      if (spec.stripe_width == 0) {
        throw ValidationError("stripe width must be >= 1");
      }
      const auto classes = static_cast<std::size_t>(spec.num_classes);
      for (std::size_t r = 0; r < spec.height; ++r) {
        for (std::size_t c = 0; c < spec.width; ++c) {
          at(r, c) = static_cast<ClassId>(
              ((c + spec.phase) / spec.stripe_width) % classes);
        }
      }
      break;
    }
    case ShapeKind::kRandom: {
      std::mt19937_64 rng(spec.seed);
      std::uniform_int_distribution<ClassId> pick(0, spec.num_classes - 1);
      for (auto& v : data) v = pick(rng);
      break;
    }
  }
  return HardLabelMap(spec.height, spec.width, spec.num_classes,
                      std::move(data));
}

SoftLabelMap OracleEpd(const HardLabelMap& label, std::size_t factor) {
  if (factor == 0 || label.height() % factor != 0 ||
      label.width() % factor != 0) {
    throw ValidationError("oracle: extents must be multiples of the factor");
  }
  const std::size_t out_h = label.height() / factor;
  const std::size_t out_w = label.width() / factor;
  const int classes = label.num_classes();
  std::vector<double> planar(out_h * out_w * static_cast<std::size_t>(classes),
                             0.0);
  for (std::size_t oi = 0; oi < out_h; ++oi) {
    for (std::size_t oj = 0; oj < out_w; ++oj) {
      std::map<ClassId, std::size_t> histogram;
      for (std::size_t dr = 0; dr < factor; ++dr) {
        for (std::size_t dc = 0; dc < factor; ++dc) {
          histogram[label(oi * factor + dr, oj * factor + dc)] += 1;
        }
      }
      for (const auto& [cls, count] : histogram) {
        const std::size_t index =
            (static_cast<std::size_t>(cls) * out_h + oi) * out_w + oj;
        planar[index] = static_cast<double>(count) /
                        static_cast<double>(factor * factor);
      }
    }
  }
  return SoftLabelMap(out_h, out_w, classes, std::move(planar));
}

double EdgeFraction(const SoftLabelMap& soft) {
  std::size_t edges = 0;
  for (std::size_t r = 0; r < soft.height(); ++r) {
    for (std::size_t c = 0; c < soft.width(); ++c) {
      for (int k = 0; k < soft.num_classes(); ++k) {
        const double p = soft(r, c, k);
        if (p > 0.0 && p < 1.0) {
          ++edges;
          break;
        }
      }
    }
  }
  return static_cast<double>(edges) / static_cast<double>(soft.pixel_count());
}

std::vector<BenchmarkRow> AreaErrorBenchmark(const ShapeSpec& spec,
                                             std::size_t factor) {
  const HardLabelMap label = Generate(spec);
  std::vector<double> truth(static_cast<std::size_t>(label.num_classes()), 0.0);
  for (ClassId c : label.data()) truth[static_cast<std::size_t>(c)] += 1.0;
  bool any_foreground = false;
  for (std::size_t c = 1; c < truth.size(); ++c) {
    any_foreground = any_foreground || truth[c] > 0.0;
  }
  if (!any_foreground) {
    throw ValidationError("benchmark shape has no foreground pixels");
  }

  const DownsampleSpec ds(factor);
  const double area = static_cast<double>(factor * factor);
  const std::string shape(ShapeKindName(spec.kind));

  const SoftLabelMap epd = EpdLabelDownsample(label, ds);
  auto epd_estimate = ClassMass(epd);
  for (double& m : epd_estimate) m *= area;

  const SoftLabelMap nearest = OneHot(NearestLabelDownsample(label, ds));
  auto nearest_estimate = ClassMass(nearest);
  for (double& m : nearest_estimate) m *= area;

  return {
      BenchmarkRow{"epd", shape, factor, spec.phase,
                   MaxForegroundError(truth, epd_estimate), EdgeFraction(epd)},
      BenchmarkRow{"nearest", shape, factor, spec.phase,
                   MaxForegroundError(truth, nearest_estimate),
                   EdgeFraction(nearest)},
  };
}

std::vector<BenchmarkRow> BenchmarkSweep(ShapeSpec spec,
                                         std::span<const std::size_t> factors) {
  std::vector<BenchmarkRow> rows;
  for (std::size_t f : factors) {
    for (std::size_t phase = 0; phase < f; ++phase) {
      spec.phase = phase;
      for (auto& row : AreaErrorBenchmark(spec, f)) rows.push_back(std::move(row));
    }
  }
  return rows;
}

void WriteBenchmarkCsv(std::ostream& out, std::span<const BenchmarkRow> rows) {
  out << "method,shape,factor,phase,mass_error,edge_fraction\n";
  char buf[64];
  for (const auto& row : rows) {
    out << row.method << ',' << row.shape << ',' << row.factor << ','
        << row.phase << ',';
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", row.mass_error,
                  row.edge_fraction);
    out << buf << '\n';
  }
}

}  // namespace epd::synth
