#pragma once

#include <json.hpp>

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geopath/background_ensemble.hpp"
#include "geopath/deviation_dynamics.hpp"
#include "geopath/interval_statistics.hpp"
#include "geopath/kernel_builder.hpp"
#include "geopath/wave_dynamics.hpp"

namespace geopath {

/// Shortest round-trip decimal form of a double; "nan"/"inf"/"-inf" for non-finite values.
std::string format_number(double value);

/// CSV with a header row and RFC-4180 quoting of fields containing ',', '"', CR or LF.
class CsvWriter {
 public:
  /// Writes the header row unless `write_header` is false (appending to an existing table).
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header, bool write_header = true);

  void row(std::initializer_list<double> values);
  void row(const std::vector<std::string>& fields);

  static std::string quote(std::string_view field);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

/// Ensemble as a JSON array of {j, R1010, omega, k, f}.
nlohmann::json ensemble_to_json(std::span<const FieldSample> fields);
/// Inverse of ensemble_to_json; throws ConfigError naming the offending record and key.
std::vector<FieldSample> ensemble_from_json(const nlohmann::json& records);

/// tau, ell0..ell3, rate0..rate3
void write_trajectory_csv(std::ostream& out, const DeviationTrajectory& trajectory);

struct KernelSweepRow {
  std::size_t ensemble_size = 0;
  double t_span = 0.0;
  KernelEstimate estimate;
};
/// J, t_span, Re K, Im K, std_error
void write_kernel_sweep_csv(std::ostream& out, std::span<const KernelSweepRow> rows);

/// Appends x, Re psi, Im psi, |psi|^2, S-unwrapped; the last column is empty when the field has
/// a node and no continuous action exists. Writes the header when `header` is set.
void write_snapshot_csv(std::ostream& out, const WaveField& field, bool header = true);

nlohmann::json to_json(const VelocityReport& report);
nlohmann::json to_json(const PropertyOutcome& outcome);
nlohmann::json to_json(const GaussianLaw& law);
nlohmann::json to_json(const KernelEstimate& estimate);

}  // namespace geopath
