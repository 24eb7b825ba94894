#pragma once

// Dataset loading, JSON serialization of results and study configs, and CSV /
// table writers for reports.

#include "tobitls/diagnostics.hpp"
#include "tobitls/infer.hpp"
#include "tobitls/mcsim.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tobitls {

/// Malformed input or flags (exit code 2 in the CLI).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scale { Log, Natural };
Scale parse_scale(const std::string& s);
std::string scale_name(Scale s);

struct CsvLoadOptions {
  bool intercept = true;
  /// Threshold; when absent the minimum observed response is used.
  std::optional<double> gamma;
  Scale gamma_scale = Scale::Log;
  Scale response_scale = Scale::Log;
};

struct LoadedData {
  TobitDataset data;
  std::vector<std::string> warnings;
};

/// Header row with columns `y`, `censored` (0/1) and covariates, in any
/// order of y/censored; covariates keep their column order. Lines starting
/// with '#' and blank lines are skipped. Throws UsageError naming the line.
LoadedData load_dataset_csv(std::istream& in, const CsvLoadOptions& opts);
LoadedData load_dataset_csv(const std::string& path, const CsvLoadOptions& opts);

/// Writes y, censored and the covariates (intercept column dropped).
void write_dataset_csv(std::ostream& out, const TobitDataset& data);

/// Shortest decimal text that round-trips; used by every writer.
std::string format_number(double x);

nlohmann::ordered_json family_to_json(const GeneratorFamily& family);
nlohmann::ordered_json optim_to_json(const OptimOptions& opts);
OptimOptions optim_from_json(const nlohmann::json& j);
nlohmann::ordered_json fit_to_json(const FitResult& fit);
nlohmann::ordered_json test_to_json(const TestResult& test);
std::string test_kind_name(TestKind kind);

/// Study configs. Unknown keys are rejected. See docs/config-schema.md.
BiasMseConfig bias_config_from_json(const nlohmann::json& j);
PowerConfig power_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const BiasMseConfig& c);
nlohmann::ordered_json config_to_json(const PowerConfig& c);

void write_report_csv(std::ostream& out, const McReport& report);
nlohmann::ordered_json report_to_json(const McReport& report);
/// Publication-style layout: "bias (mse)" per parameter, or rejection rates in %.
void write_report_table(std::ostream& out, const McReport& report);

/// Columns index, residual, censored, theoretical_q, lower, median, upper;
/// rows sorted by residual. Band columns are empty without an envelope.
void write_residuals_csv(std::ostream& out, const ResidualReport& report);
void write_envelope_csv(std::ostream& out, const EnvelopeBand& band);

}  // namespace tobitls
