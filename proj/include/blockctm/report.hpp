#pragma once

#include <string>

#include "blockctm/evaluation.hpp"

namespace blockctm::eval {

enum class ReportFormat { Table, Csv };

[[nodiscard]] ReportFormat parse_report_format(const std::string& name);

/// Table: tab-separated rows (block, training %, Max/Min/Avg) with one
/// column per classifier, two decimals. Block and fraction labels appear
/// only on the first row of their group.
/// Csv: header `block,fraction,classifier,statistic,value`, one row per
/// cell statistic (max, min, avg, run1..runR), values in round-trip form.
[[nodiscard]] std::string render_report(const EvalReport& report, ReportFormat format);

/// Inverse of the csv rendering. Confusion counts and class names are not
/// part of the csv and come back empty.
[[nodiscard]] EvalReport parse_report_csv(const std::string& csv);

}  // namespace blockctm::eval
