#pragma once

// Serialization: CSV for tabular sweeps, JSON for nested estimates.  Writes
// are atomic (temp file + rename); the header embeds version, seed and the
// resolved config echo.  Timestamps are suppressed under --reproducible.

#include <map>
#include <string>

#include <json.hpp>

#include "nsreg/config.hpp"
#include "nsreg/detector.hpp"
#include "nsreg/energy.hpp"
#include "nsreg/harness.hpp"
#include "nsreg/pressure.hpp"
#include "nsreg/quantities.hpp"

namespace nsreg {

enum class OutputFormat { csv, json };

OutputFormat parse_format(const std::string& name);

struct ReportHeader {
    std::map<std::string, std::string> config_echo;
    bool reproducible = false; // true: omit the timestamp line
};

/// "# ..." comment banner shared by all CSV outputs.
std::string csv_banner(const ReportHeader& header);

/// {"version", "timestamp"?, "config"} prologue shared by all JSON outputs.
nlohmann::ordered_json json_header(const ReportHeader& header);

std::string sweep_to_csv(const SweepResult& sweep, const ReportHeader& header);
std::string energy_rows_to_csv(const std::vector<std::pair<TestFunction, EnergyResidual>>& rows,
                               const ReportHeader& header);
std::string constant_sweep_to_csv(const ConstantSweep& sweep, const ReportHeader& header);

std::string sweep_to_json(const SweepResult& sweep, const ReportHeader& header);
std::string singular_set_to_json(const SingularSetEstimate& est, const ReportHeader& header);
std::string constant_sweep_to_json(const ConstantSweep& sweep, const ReportHeader& header);
std::string schedule_to_json(const BootstrapSchedule& sched, const ReportHeader& header);
std::string schedule_to_csv(const BootstrapSchedule& sched, const ReportHeader& header);

/// Atomic write: temp file in the same directory, then rename.
void write_report(const std::string& content, const std::string& path);

} // namespace nsreg
