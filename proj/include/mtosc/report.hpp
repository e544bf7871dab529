#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mtosc/harness.hpp"

namespace mtosc::report {

enum class Format { Json, Csv };

// Full structure with stable field ordering. Dumping the same report twice
// yields identical bytes; no timestamps or environment data are embedded.
nlohmann::ordered_json to_json(const harness::RunReport& report);
nlohmann::ordered_json to_json(const harness::ComparisonReport& report);
nlohmann::ordered_json to_json(const harness::SweepReport& report);

// Inverse of to_json for run reports; round trips to a structurally equal
// value. Throws SchemaError on shape violations.
harness::RunReport run_report_from_json(const nlohmann::json& j);

// One row per (transcript, turn) with the per-turn measurements.
std::string turns_csv(const harness::RunReport& report);

// Plotting-ready per-turn token curve: tokens by turn index summed across
// the sessions that reach that turn, plus the running total including
// background usage.
std::string curve_csv(const harness::RunReport& report);
std::string curve_csv(const harness::ComparisonReport& report);

std::string sweep_csv(const harness::SweepReport& report);

// Throws IoError when the file cannot be written.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

harness::RunReport load_run_report(const std::filesystem::path& path);

// Json writes the full structure, Csv the per-turn rows.
void emit_report(const harness::RunReport& report, Format format,
                 const std::filesystem::path& path);
void emit_report(const harness::ComparisonReport& report, Format format,
                 const std::filesystem::path& path);
void emit_report(const harness::SweepReport& report, Format format,
                 const std::filesystem::path& path);

}  // namespace mtosc::report
