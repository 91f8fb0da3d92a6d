#ifndef PRIORFORGE_REPORT_HPP
#define PRIORFORGE_REPORT_HPP

// Machine-readable prior report. The JSON layout is described by
// docs/report.schema.json; field order is fixed.

#include <string>

#include <json.hpp>

#include "priorforge/priors.hpp"

namespace priorforge {

inline constexpr const char* kReportSchemaId = "prior_forge.report/1";

struct PriorReport {
  std::string formula;
  Family family = Family::gaussian;
  PriorSet priors;
};

PriorReport make_report(const PriorSet& set);

nlohmann::ordered_json to_json(const PriorReport& report);
/// Inverse of to_json. Throws DataError on malformed documents.
PriorReport report_from_json(const nlohmann::ordered_json& j);

/// Pretty-printed JSON followed by a newline.
std::string render_json(const PriorReport& report);
/// Fixed-width text table, one prior per line.
std::string render_table(const PriorReport& report);

}  // namespace priorforge

#endif  // PRIORFORGE_REPORT_HPP
