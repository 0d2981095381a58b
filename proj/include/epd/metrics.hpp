#ifndef EPD_METRICS_HPP
#define EPD_METRICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "epd/core.hpp"

namespace epd {

/// One-vs-rest pixel counts for a single class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&,
                         const ConfusionCounts&) = default;
};

ConfusionCounts Confusion(const HardLabelMap& pred, const HardLabelMap& target,
                          int class_id);

// A 0/0 ratio is nullopt ("undefined") and is skipped when averaging.
struct HardMetrics {
  std::optional<double> accuracy;
  std::optional<double> specificity;
  std::optional<double> sensitivity;
  std::optional<double> precision;
  std::optional<double> dice;
  std::optional<double> iou;
};

HardMetrics ComputeHardMetrics(const ConfusionCounts& counts);

// Soft metrics for one class, with T = sum(y), P = sum(y_hat):
//   DSC_s = 2 sum(y*y_hat) / (sum(y^2) + sum(y_hat^2))
//   RAD = sum|y_hat - y| / T,  RD = (P - T) / T,  RMSE over all pixels.
// DSC_s reaches 1 iff y_hat == y and equals the hard dice on one-hot input.
// All four are undefined when T is zero. RD > 0 means over-segmentation.
struct SoftMetrics {
  std::optional<double> dice;
  std::optional<double> rad;
  std::optional<double> rd;
  std::optional<double> rmse;
};

std::vector<SoftMetrics> ComputeSoftMetrics(const SoftLabelMap& pred,
                                            const SoftLabelMap& target);

struct ClassMetrics {
  int class_id = 0;
  // Pixels of this class in the hard target; 0 means the class is missing.
  std::uint64_t target_pixels = 0;
  HardMetrics hard;
  SoftMetrics soft;
};

enum class ExclusionPolicy {
  // Classes absent from the target are left out of the averages.
  kExcludeMissing,
  // Every class is averaged; undefined values count as 0.
  kKeepAll,
};

struct MetricAverages {
  HardMetrics hard;
  SoftMetrics soft;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  // Unweighted mean over the classes that survive exclusion.
  MetricAverages macro;
  std::vector<int> excluded_classes;
  double chosen_threshold = 0.0;
  // Every prediction pixel is a uniform distribution, so the assignment is
  // decided purely by tie-breaking.
  bool degenerate_prediction = false;
};

// Throws ValidationError if exclusion leaves no class to average.
MetricsReport Aggregate(std::vector<ClassMetrics> per_class,
                        ExclusionPolicy policy = ExclusionPolicy::kExcludeMissing);

/// Hard assignment at a threshold: the foreground class (c > 0) with the
/// highest probability, lowest index on ties, if that probability is strictly
/// above the threshold; background otherwise. Since the best foreground class
/// of a one-hot pixel has probability 1 or 0, threshold 0 reproduces it
/// exactly.
HardLabelMap ThresholdAssign(const SoftLabelMap& pred, double threshold);

struct ThresholdSearchResult {
  double threshold = 0.0;
  // Macro DSC_h at each grid threshold, index k <-> k * step.
  std::vector<double> dice_by_threshold;
  MetricsReport report;
};

/// Evaluates every threshold k*step in [0, 1] (101 points for step 0.01) and
/// keeps the smallest one with the highest macro DSC_h. Soft metrics compare
/// pred against one_hot(target).
ThresholdSearchResult OptimalThresholdSearch(const SoftLabelMap& pred,
                                             const HardLabelMap& target,
                                             double step = 0.01);

// Soft target: hard metrics use argmax(target), soft metrics use target as is.
ThresholdSearchResult OptimalThresholdSearch(const SoftLabelMap& pred,
                                             const SoftLabelMap& target,
                                             double step = 0.01);

// Macro DSC_h of ThresholdAssign(pred, threshold) over the classes present
// in target.
double MacroHardDice(const SoftLabelMap& pred, const HardLabelMap& target,
                     double threshold);

}  // namespace epd

#endif  // EPD_METRICS_HPP
