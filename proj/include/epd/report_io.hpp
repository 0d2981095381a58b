#ifndef EPD_REPORT_IO_HPP
#define EPD_REPORT_IO_HPP

#include <ostream>
#include <string>

#include "epd/metrics.hpp"

namespace epd::io {

/// CSV with '#' header lines (averaging mode, threshold, degenerate flag),
/// then columns class,ACC,SPE,SEN,PRE,DSC_h,IoU,DSC_s,RAD,RD,RMSE,excluded.
/// One row per class, then a "mean" row whose excluded cell lists the
/// excluded class ids joined by ';'. Values use 6 decimals; undefined is NA.
void WriteMetricsCsv(std::ostream& out, const MetricsReport& report);

// Same content at full precision; undefined values are null.
std::string MetricsJson(const MetricsReport& report);

}  // namespace epd::io

#endif  // EPD_REPORT_IO_HPP
