#ifndef CRCA_SCENARIO_IO_HPP
#define CRCA_SCENARIO_IO_HPP

#include "crca/model.hpp"

#include <optional>
#include <string>

namespace crca {

/// One self-contained problem instance as stored on disk. Timing defaults
/// to the paper-2012 preset when the file omits the block. See README for
/// the exact JSON schema; unknown keys are rejected.
struct Scenario {
  std::string id;
  AvailabilityModel model;
  MacTiming timing = paper2012_timing();
  std::optional<SensingModel> sensing;
  std::optional<Assignment> assignment;
};

/// Parse / serialize the JSON scenario document. Channel and user indices
/// are 1-based on disk. Parse errors and invariant violations surface as
/// ValidationError.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// Writes content to path via a temporary file + rename, so readers never
/// observe a truncated file.
void atomic_write(const std::string& path, const std::string& content);

/// Edge-list CSV: header "user,channel,kind" then one row per (user,
/// channel) pair, kind in {exclusive, shared}; 1-based indices.
std::string assignment_csv(const Assignment& assignment);

}  // namespace crca

#endif
