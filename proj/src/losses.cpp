#include "epd/losses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epd/error.hpp"

namespace epd {
namespace {

void CheckPair(std::span<const double> target, std::span<const double> pred) {
  if (target.size() != pred.size()) {
    std::ostringstream msg;
    msg << "target/prediction length mismatch: " << target.size() << " vs "
        << pred.size();
    throw ValidationError(msg.str());
  }
  if (target.empty()) throw ValidationError("loss input is empty");
}

}  // namespace

LossWeights::LossWeights(std::vector<double> omega) : omega_(std::move(omega)) {
  if (omega_.empty()) throw ValidationError("need at least one loss weight");
  for (double w : omega_) {
    if (w == 0.0 || !std::isfinite(w)) {
      throw ValidationError("loss weights must be finite and nonzero");
    }
  }
}

LossWeights LossWeights::Uniform(std::size_t terms) {
  return LossWeights(std::vector<double>(terms, 1.0));
}

LossEval L1Loss(std::span<const double> target, std::span<const double> pred) {
  CheckPair(target, pred);
  const double n = static_cast<double>(target.size());
  LossEval eval;
  eval.grad_pred.resize(target.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target[i] - pred[i];
    sum += std::abs(d);
    eval.grad_pred[i] = d > 0.0 ? -1.0 / n : (d < 0.0 ? 1.0 / n : 0.0);
  }
  eval.value = sum / n;
  return eval;
}

LossEval DiceLoss(std::span<const double> target, std::span<const double> pred,
                  double epsilon) {
  CheckPair(target, pred);
  double overlap = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    overlap += target[i] * pred[i];
    mass += target[i] + pred[i];
  }
  const double den = mass + epsilon;
  if (den == 0.0) {
    throw ValidationError(
        "dice loss denominator is zero (target and prediction are empty)");
  }
  LossEval eval;
  eval.value = 1.0 - 2.0 * overlap / den;
  eval.grad_pred.resize(target.size());
  const double den2 = den * den;
  for (std::size_t i = 0; i < target.size(); ++i) {
    eval.grad_pred[i] = -(2.0 * target[i] * den - 2.0 * overlap) / den2;
  }
  return eval;
}

LossEval TotalLoss(std::span<const double> losses, const LossWeights& weights) {
  if (losses.size() != weights.size()) {
    throw ValidationError("need exactly one weight per loss term");
  }
  LossEval eval;
  eval.grad_omega.resize(losses.size());
  eval.grad_terms.resize(losses.size());
  for (std::size_t t = 0; t < losses.size(); ++t) {
    const double w = weights.omega()[t];
    const double w2 = w * w;
    eval.value += losses[t] / (2.0 * w2) + std::log1p(w2);
    eval.grad_omega[t] = -losses[t] / (w2 * w) + 2.0 * w / (1.0 + w2);
    eval.grad_terms[t] = 1.0 / (2.0 * w2);
  }
  return eval;
}

LossEval WeightedL1DiceLoss(std::span<const double> target,
                            std::span<const double> pred,
                            const LossWeights& weights) {
  if (weights.size() != 2) {
    throw ValidationError("L1 + dice weighting needs exactly two weights");
  }
  const LossEval l1 = L1Loss(target, pred);
  const LossEval dice = DiceLoss(target, pred);
  const double terms[] = {l1.value, dice.value};
  LossEval eval = TotalLoss(terms, weights);
  eval.grad_pred.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    eval.grad_pred[i] = eval.grad_terms[0] * l1.grad_pred[i] +
                        eval.grad_terms[1] * dice.grad_pred[i];
  }
  return eval;
}

GradientCheckResult GradientCheck(
    const std::function<double(std::span<const double>)>& fn,
    std::span<const double> point, std::span<const double> analytic,
    double step, double tolerance, double abs_floor) {
  if (!(step > 0.0)) throw ValidationError("finite-difference step must be > 0");
  if (point.size() != analytic.size()) {
    throw ValidationError("gradient length does not match the point");
  }
  GradientCheckResult result;
  std::vector<double> probe(point.begin(), point.end());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double x = probe[i];
    probe[i] = x + step;
    const double up = fn(probe);
    probe[i] = x - step;
    const double down = fn(probe);
    probe[i] = x;
    const double numeric = (up - down) / (2.0 * step);
    const double scale =
        std::max({std::abs(analytic[i]), std::abs(numeric), abs_floor});
    const double rel = std::abs(analytic[i] - numeric) / scale;
    if (rel > result.max_relative_error || std::isnan(rel)) {
      result.max_relative_error = rel;
      result.worst_index = i;
    }
  }
  result.passed = result.max_relative_error < tolerance;
  return result;
}

}  // namespace epd
