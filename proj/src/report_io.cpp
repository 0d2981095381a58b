#include "epd/report_io.hpp"

#include <cstdio>

#include <json.hpp>

namespace epd::io {
namespace {

using nlohmann::json;

std::string Fixed(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

void WriteRow(std::ostream& out, const std::string& name, const HardMetrics& h,
              const SoftMetrics& s, const std::string& excluded) {
  out << name << ',' << Fixed(h.accuracy) << ',' << Fixed(h.specificity) << ','
      << Fixed(h.sensitivity) << ',' << Fixed(h.precision) << ','
      << Fixed(h.dice) << ',' << Fixed(h.iou) << ',' << Fixed(s.dice) << ','
      << Fixed(s.rad) << ',' << Fixed(s.rd) << ',' << Fixed(s.rmse) << ','
      << excluded << '\n';
}

json Value(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json MetricsObject(const HardMetrics& h, const SoftMetrics& s) {
  return json{{"ACC", Value(h.accuracy)}, {"SPE", Value(h.specificity)},
              {"SEN", Value(h.sensitivity)}, {"PRE", Value(h.precision)},
              {"DSC_h", Value(h.dice)},     {"IoU", Value(h.iou)},
              {"DSC_s", Value(s.dice)},     {"RAD", Value(s.rad)},
              {"RD", Value(s.rd)},          {"RMSE", Value(s.rmse)}};
}

bool IsExcluded(const MetricsReport& report, int class_id) {
  for (int c : report.excluded_classes) {
    if (c == class_id) return true;
  }
  return false;
}

}  // namespace

void WriteMetricsCsv(std::ostream& out, const MetricsReport& report) {
  out << "# averaging=macro\n"
      << "# threshold=" << Fixed(report.chosen_threshold) << '\n'
      << "# degenerate_prediction="
      << (report.degenerate_prediction ? "true" : "false") << '\n'
      << "class,ACC,SPE,SEN,PRE,DSC_h,IoU,DSC_s,RAD,RD,RMSE,excluded\n";
  for (const auto& cm : report.per_class) {
    WriteRow(out, std::to_string(cm.class_id), cm.hard, cm.soft,
             IsExcluded(report, cm.class_id) ? "1" : "0");
  }
  std::string excluded;
  for (int c : report.excluded_classes) {
    if (!excluded.empty()) excluded += ';';
    excluded += std::to_string(c);
  }
  WriteRow(out, "mean", report.macro.hard, report.macro.soft, excluded);
}

std::string MetricsJson(const MetricsReport& report) {
  json classes = json::array();
  for (const auto& cm : report.per_class) {
    json entry = MetricsObject(cm.hard, cm.soft);
    entry["class"] = cm.class_id;
    entry["target_pixels"] = cm.target_pixels;
    entry["excluded"] = IsExcluded(report, cm.class_id);
    classes.push_back(std::move(entry));
  }
  const json doc = {
      {"averaging", "macro"},
      {"threshold", report.chosen_threshold},
      {"degenerate_prediction", report.degenerate_prediction},
      {"excluded_classes", report.excluded_classes},
      {"classes", std::move(classes)},
      {"mean", MetricsObject(report.macro.hard, report.macro.soft)},
  };
  return doc.dump(2) + "\n";
}

}  // namespace epd::io
