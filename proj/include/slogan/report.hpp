#pragma once

#include <string>

#include <json.hpp>

#include "slogan/audit.hpp"

namespace slogan {

// Rounds to 6 significant digits (the precision of every serialized float).
double round6(double x);
// "%.6g" of the value.
std::string format6(double x);

nlohmann::json hyperparams_to_json(const Hyperparams& h);
nlohmann::json report_to_json(const AuditReport& report);

// Summary table, per-cluster table and characterization; rates in percent.
std::string report_to_markdown(const AuditReport& report);

// Per-cluster accuracy pairs with the global row appended last.
std::string clusters_to_csv(const AuditReport& report);

}  // namespace slogan
