#pragma once

#include <json.hpp>

#include <string>

#include "sda/inference.hpp"
#include "sda/lasso.hpp"
#include "sda/screening.hpp"
#include "sda/simgen.hpp"
#include "sda/slicing.hpp"

namespace sda {

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

// Serialized records index variables and slices 1-based.
nlohmann::json fit_to_json(const LassoFit& fit);
nlohmann::json plan_to_json(const SlicePlan& plan);
nlohmann::json outcome_to_json(const TestOutcome& out);
nlohmann::json screen_to_json(const ScreenSet& s);
nlohmann::json power_report_to_json(const PowerReport& report);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

void write_fdr_csv(const FdrReport& report, const std::vector<int>& variable_indices,
                   const std::string& path);
void write_power_csv(const PowerReport& report, const std::string& path);
void write_power_table_csv(const PowerReport& report, const std::string& path);

}  // namespace sda
