#pragma once

#include <optional>
#include <string>

#include "theory_monitor.hpp"

namespace relubias {

// Thrown when a persisted artifact does not match its schema
// (maps to RB_ERROR_INPUT / exit code 2).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);
std::string dataset_to_csv(const Dataset& ds);

std::string model_to_json(const ModelState& m);
ModelState model_from_json(const std::string& text);

// Columns: t,neuron,example,beta,alpha,active,risk (risk repeated per row).
std::string trajectory_to_csv(const Trajectory& traj);
// Reconstructs snapshots (beta/alpha/mask/risk); weights are not persisted.
Trajectory trajectory_from_csv(const std::string& text, double eta,
                               const std::vector<int>& signs);

std::string trajectory_summary_json(const Trajectory& traj, std::optional<long> t0);

// Columns: t,condition,holds,margin.
std::string ledger_to_csv(const ConditionLedger& ledger);

std::string minnorm_to_json(const MinNormSolution& sol);
std::string assumption_report_to_json(const AssumptionReport& r);
std::string gram_report_to_json(const GramReport& g, const EigenReport& e);
std::string verify_report_to_json(const VerifyReport& r);
std::string bound_report_to_json(const BoundReport& r);
std::string constants_to_json(const Constants& c);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace relubias
