#include "epd/metrics.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "epd/error.hpp"

namespace epd {
namespace {

std::optional<double> Ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

void CheckSameShape(std::size_t h1, std::size_t w1, int c1, std::size_t h2,
                    std::size_t w2, int c2, const char* what) {
  if (h1 != h2 || w1 != w2 || c1 != c2) {
    std::ostringstream msg;
    msg << what << ": shape mismatch " << h1 << "x" << w1 << "x" << c1
        << " vs " << h2 << "x" << w2 << "x" << c2;
    throw ValidationError(msg.str());
  }
}

struct Mean {
  double sum = 0.0;
  int count = 0;
  void Add(const std::optional<double>& v, bool coerce_undefined) {
    if (v) {
      sum += *v;
      ++count;
    } else if (coerce_undefined) {
      ++count;
    }
  }
  std::optional<double> Get() const {
    if (count == 0) return std::nullopt;
    return sum / count;
  }
};

// Number of grid intervals for a step that must divide [0, 1] evenly.
std::size_t GridIntervals(double step) {
  if (!(step > 0.0) || step > 1.0) {
    throw ValidationError("threshold step must be in (0, 1]");
  }
  const double n = std::round(1.0 / step);
  if (std::abs(n * step - 1.0) > 1e-9) {
    throw ValidationError("threshold step must divide 1 evenly");
  }
  return static_cast<std::size_t>(n);
}

bool IsDegenerate(const SoftLabelMap& pred) {
  const std::size_t plane = pred.pixel_count();
  const auto data = pred.data();
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 1; c < pred.num_classes(); ++c) {
      if (std::abs(data[static_cast<std::size_t>(c) * plane + i] - data[i]) >
          kSimplexTolerance) {
        return false;
      }
    }
  }
  return true;
}

// Best foreground class per pixel, lowest index on ties.
struct ForegroundPeak {
  std::vector<ClassId> best_class;
  std::vector<double> best_prob;
};

ForegroundPeak FindForegroundPeaks(const SoftLabelMap& pred) {
  const std::size_t plane = pred.pixel_count();
  const auto data = pred.data();
  ForegroundPeak peaks{std::vector<ClassId>(plane, 1),
                       std::vector<double>(data.begin() + plane,
                                           data.begin() + 2 * plane)};
  for (int c = 2; c < pred.num_classes(); ++c) {
    const double* channel = data.data() + static_cast<std::size_t>(c) * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      if (channel[i] > peaks.best_prob[i]) {
        peaks.best_prob[i] = channel[i];
        peaks.best_class[i] = c;
      }
    }
  }
  return peaks;
}

double MacroDiceFromPeaks(const ForegroundPeak& peaks,
                          std::span<const ClassId> target,
                          std::span<const std::uint64_t> target_counts,
                          double threshold) {
  const std::size_t classes = target_counts.size();
  std::vector<std::uint64_t> tp(classes, 0);
  std::vector<std::uint64_t> predicted(classes, 0);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const ClassId assigned =
        peaks.best_prob[i] > threshold ? peaks.best_class[i] : 0;
    ++predicted[static_cast<std::size_t>(assigned)];
    if (assigned == target[i]) ++tp[static_cast<std::size_t>(assigned)];
  }
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (target_counts[c] == 0) continue;
    sum += 2.0 * static_cast<double>(tp[c]) /
           static_cast<double>(predicted[c] + target_counts[c]);
    ++present;
  }
  return sum / present;
}

std::vector<std::uint64_t> ClassCounts(const HardLabelMap& label) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(label.num_classes()),
                                    0);
  for (ClassId c : label.data()) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

ThresholdSearchResult Search(const SoftLabelMap& pred,
                             const HardLabelMap& target_hard,
                             const SoftLabelMap& target_soft, double step) {
  CheckSameShape(pred.height(), pred.width(), pred.num_classes(),
                 target_hard.height(), target_hard.width(),
                 target_hard.num_classes(), "threshold search");
  const std::size_t intervals = GridIntervals(step);
  const auto target_counts = ClassCounts(target_hard);
  const auto peaks = FindForegroundPeaks(pred);

  ThresholdSearchResult result;
  result.dice_by_threshold.reserve(intervals + 1);
  double best = -1.0;
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(intervals);
    const double dice =
        MacroDiceFromPeaks(peaks, target_hard.data(), target_counts, t);
    result.dice_by_threshold.push_back(dice);
    // Strict: ties keep the smaller threshold.
    if (dice > best) {
      best = dice;
      result.threshold = t;
    }
  }

  const HardLabelMap assigned = ThresholdAssign(pred, result.threshold);
  const auto soft = ComputeSoftMetrics(pred, target_soft);
  std::vector<ClassMetrics> per_class;
  per_class.reserve(static_cast<std::size_t>(pred.num_classes()));
  for (int c = 0; c < pred.num_classes(); ++c) {
    per_class.push_back(ClassMetrics{
        c, target_counts[static_cast<std::size_t>(c)],
        ComputeHardMetrics(Confusion(assigned, target_hard, c)),
        soft[static_cast<std::size_t>(c)]});
  }
  result.report = Aggregate(std::move(per_class));
  result.report.chosen_threshold = result.threshold;
  result.report.degenerate_prediction = IsDegenerate(pred);
  return result;
}

}  // namespace

ConfusionCounts Confusion(const HardLabelMap& pred, const HardLabelMap& target,
                          int class_id) {
  CheckSameShape(pred.height(), pred.width(), pred.num_classes(),
                 target.height(), target.width(), target.num_classes(),
                 "confusion");
  if (class_id < 0 || class_id >= pred.num_classes()) {
    throw ValidationError("class id outside [0, num_classes)");
  }
  ConfusionCounts counts;
  const auto p = pred.data();
  const auto t = target.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool in_pred = p[i] == class_id;
    const bool in_target = t[i] == class_id;
    if (in_pred && in_target) {
      ++counts.tp;
    } else if (in_pred) {
      ++counts.fp;
    } else if (in_target) {
      ++counts.fn;
    } else {
      ++counts.tn;
    }
  }
  return counts;
}

HardMetrics ComputeHardMetrics(const ConfusionCounts& counts) {
  const auto tp = static_cast<double>(counts.tp);
  const auto fp = static_cast<double>(counts.fp);
  const auto tn = static_cast<double>(counts.tn);
  const auto fn = static_cast<double>(counts.fn);
  HardMetrics m;
  m.accuracy = Ratio(tp + tn, static_cast<double>(counts.total()));
  m.specificity = Ratio(tn, tn + fp);
  m.sensitivity = Ratio(tp, tp + fn);
  m.precision = Ratio(tp, tp + fp);
  m.dice = Ratio(2.0 * tp, 2.0 * tp + fp + fn);
  m.iou = Ratio(tp, tp + fp + fn);
  return m;
}

std::vector<SoftMetrics> ComputeSoftMetrics(const SoftLabelMap& pred,
                                            const SoftLabelMap& target) {
  CheckSameShape(pred.height(), pred.width(), pred.num_classes(),
                 target.height(), target.width(), target.num_classes(),
                 "soft metrics");
  const std::size_t n = pred.pixel_count();
  std::vector<SoftMetrics> out(static_cast<std::size_t>(pred.num_classes()));
  for (int c = 0; c < pred.num_classes(); ++c) {
    const auto y = target.channel(c);
    const auto y_hat = pred.channel(c);
    double target_mass = 0.0;
    double pred_mass = 0.0;
    double overlap = 0.0;
    double target_sq = 0.0;
    double pred_sq = 0.0;
    double abs_diff = 0.0;
    double sq_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = y_hat[i] - y[i];
      target_mass += y[i];
      pred_mass += y_hat[i];
      overlap += y[i] * y_hat[i];
      target_sq += y[i] * y[i];
      pred_sq += y_hat[i] * y_hat[i];
      abs_diff += std::abs(d);
      sq_diff += d * d;
    }
    if (target_mass == 0.0) continue;
    SoftMetrics& m = out[static_cast<std::size_t>(c)];
    m.dice = 2.0 * overlap / (target_sq + pred_sq);
    m.rad = abs_diff / target_mass;
    m.rd = (pred_mass - target_mass) / target_mass;
    m.rmse = std::sqrt(sq_diff / static_cast<double>(n));
  }
  return out;
}

MetricsReport Aggregate(std::vector<ClassMetrics> per_class,
                        ExclusionPolicy policy) {
  MetricsReport report;
  const bool coerce = policy == ExclusionPolicy::kKeepAll;
  Mean acc, spe, sen, pre, dsc_h, iou, dsc_s, rad, rd, rmse;
  for (const auto& cm : per_class) {
    if (cm.target_pixels == 0 && policy == ExclusionPolicy::kExcludeMissing) {
      report.excluded_classes.push_back(cm.class_id);
      continue;
    }
    acc.Add(cm.hard.accuracy, coerce);
    spe.Add(cm.hard.specificity, coerce);
    sen.Add(cm.hard.sensitivity, coerce);
    pre.Add(cm.hard.precision, coerce);
    dsc_h.Add(cm.hard.dice, coerce);
    iou.Add(cm.hard.iou, coerce);
    dsc_s.Add(cm.soft.dice, coerce);
    rad.Add(cm.soft.rad, coerce);
    rd.Add(cm.soft.rd, coerce);
    rmse.Add(cm.soft.rmse, coerce);
  }
  if (report.excluded_classes.size() == per_class.size()) {
    throw ValidationError(
        "every class is missing from the target; nothing to average");
  }
  report.macro.hard = HardMetrics{acc.Get(), spe.Get(), sen.Get(),
                                  pre.Get(), dsc_h.Get(), iou.Get()};
  report.macro.soft = SoftMetrics{dsc_s.Get(), rad.Get(), rd.Get(), rmse.Get()};
  report.per_class = std::move(per_class);
  return report;
}

HardLabelMap ThresholdAssign(const SoftLabelMap& pred, double threshold) {
  const auto peaks = FindForegroundPeaks(pred);
  std::vector<ClassId> out(pred.pixel_count(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (peaks.best_prob[i] > threshold) out[i] = peaks.best_class[i];
  }
  return HardLabelMap(pred.height(), pred.width(), pred.num_classes(),
                      std::move(out));
}

double MacroHardDice(const SoftLabelMap& pred, const HardLabelMap& target,
                     double threshold) {
  CheckSameShape(pred.height(), pred.width(), pred.num_classes(),
                 target.height(), target.width(), target.num_classes(),
                 "macro dice");
  return MacroDiceFromPeaks(FindForegroundPeaks(pred), target.data(),
                            ClassCounts(target), threshold);
}

ThresholdSearchResult OptimalThresholdSearch(const SoftLabelMap& pred,
                                             const HardLabelMap& target,
                                             double step) {
  return Search(pred, target, OneHot(target), step);
}

ThresholdSearchResult OptimalThresholdSearch(const SoftLabelMap& pred,
                                             const SoftLabelMap& target,
                                             double step) {
  return Search(pred, ArgmaxToHard(target), target, step);
}

}  // namespace epd
