// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsdecay/pipeline.hpp"

namespace nlsdecay {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

struct CheckRecord {
  std::string name;
  std::string status;  // "pass", "fail" or "skipped"
  std::string detail;
};

bool any_failed(const std::vector<CheckRecord>& checks);

std::vector<CheckRecord> profile_checks(const ProfileStage& profile);
std::vector<CheckRecord> spectrum_checks(const RunConfig& cfg, const SpectrumStage& spectrum);
std::vector<CheckRecord> decay_checks(const DecayStage& decay);

Json config_json(const RunConfig& cfg);
Json profile_json(const ProfileStage& profile);
Json spectrum_json(const SpectrumStage& spectrum);
Json symmetry_json(const SymmetryReport& symmetry);
Json decay_json(const RunConfig& cfg, const DecayStage& decay);
Json checks_json(const std::vector<CheckRecord>& checks);

struct ReportParts {
  const ProfileStage* profile = nullptr;
  const SpectrumStage* spectrum = nullptr;
  const DecayStage* decay = nullptr;
  std::vector<CheckRecord> checks;
  std::map<std::string, double> timing;  // seconds per stage
};

// Missing stages serialize as null; timing is emptied for canonical reports.
Json make_report(const RunConfig& cfg, const ReportParts& parts);

// Renders the tabular sections of a report document as CSV files in `dir`:
// spectrum.csv, decay.csv, lemmas.csv and checks.csv, each only when its
// section is present. Returns the written paths.
std::vector<std::filesystem::path> write_report_csvs(const Json& report,
                                                     const std::filesystem::path& dir);

// Columns point,chain,position,x,abs_x,log_amplitude with amplitude
// |phi_1| + |phi_2|; nodes where it vanishes are omitted.
void write_tails_csv(std::ostream& out, const SpectrumStage& spectrum);
// Columns point,chain,position,x,re_first,im_first,re_second,im_second.
void write_eigenvectors_csv(std::ostream& out, const SpectrumStage& spectrum);

}  // namespace nlsdecay
