#ifndef EPD_LOSSES_HPP
#define EPD_LOSSES_HPP

#include <functional>
#include <span>
#include <vector>

namespace epd {

/// One uncertainty weight per loss term. The regularized weighting only sees
/// omega^2, so weights are stored as given; zero is rejected.
class LossWeights {
 public:
  explicit LossWeights(std::vector<double> omega);
  // Every term starts at 1.0.
  static LossWeights Uniform(std::size_t terms);

  std::span<const double> omega() const { return omega_; }
  std::size_t size() const { return omega_.size(); }

 private:
  std::vector<double> omega_;
};

struct LossEval {
  double value = 0.0;
  // d value / d prediction; empty for TotalLoss.
  std::vector<double> grad_pred;
  // d value / d omega; empty for L1Loss and DiceLoss.
  std::vector<double> grad_omega;
  // d value / d L_tau; only filled by TotalLoss.
  std::vector<double> grad_terms;
};

// Mean absolute error. Subgradient 0 where target == pred.
LossEval L1Loss(std::span<const double> target, std::span<const double> pred);

// 1 - 2*sum(y*p) / (sum(y) + sum(p) + epsilon). With the default epsilon of 0,
// an all-zero target and prediction is a ValidationError.
LossEval DiceLoss(std::span<const double> target, std::span<const double> pred,
                  double epsilon = 0.0);

// sum over terms of L/(2 w^2) + ln(1 + w^2).
LossEval TotalLoss(std::span<const double> losses, const LossWeights& weights);

// TotalLoss over {L1, Dice} with the prediction gradient chained through both
// terms.
LossEval WeightedL1DiceLoss(std::span<const double> target,
                            std::span<const double> pred,
                            const LossWeights& weights);

struct GradientCheckResult {
  bool passed = true;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
};

/// Compares an analytic gradient with central differences, coordinate by
/// coordinate. Relative error is |a - n| / max(|a|, |n|, abs_floor).
GradientCheckResult GradientCheck(
    const std::function<double(std::span<const double>)>& fn,
    std::span<const double> point, std::span<const double> analytic,
    double step, double tolerance, double abs_floor = 1e-12);

}  // namespace epd

#endif  // EPD_LOSSES_HPP
