#pragma once

#include <string>
#include <string_view>

#include "ontorules/session.hpp"

namespace ontorules {

enum class ReportFormat { kJson, kCsv };
ReportFormat parse_report_format(std::string_view text);

// JSON report, or a CSV bundle: `## section` headers each followed by a CSV
// table (params, log, then one table per result set). Rule rows use the
// columns Antecedent, Consequent, Confidence, Support.
std::string export_report(const Session& session, ReportFormat format);

}  // namespace ontorules
