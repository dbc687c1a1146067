#include "geopath/io.hpp"

#include <charconv>
#include <cmath>

#include "geopath/errors.hpp"

namespace geopath {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header, bool write_header)
    : out_(out), columns_(header.size()) {
  if (!write_header) return;
  bool first = true;
  for (auto h : header) {
    out_ << (first ? "" : ",") << quote(h);
    first = false;
  }
  out_ << "\r\n";
}

void CsvWriter::row(std::initializer_list<double> values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(format_number(v));
  row(fields);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw InvalidInput("CsvWriter: row width differs from header");
  for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << quote(fields[i]);
  out_ << "\r\n";
}

std::string CsvWriter::quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string q = "\"";
  for (char c : field) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

nlohmann::json ensemble_to_json(std::span<const FieldSample> fields) {
  auto arr = nlohmann::json::array();
  for (const auto& f : fields) {
    arr.push_back({{"j", f.index},
                   {"R1010", f.curvature_r1010},
                   {"omega", f.omega},
                   {"k", {f.wave_covector(0), f.wave_covector(1), f.wave_covector(2), f.wave_covector(3)}},
                   {"f", f.stochastic_f}});
  }
  return arr;
}

std::vector<FieldSample> ensemble_from_json(const nlohmann::json& records) {
  if (!records.is_array()) throw ConfigError("ensemble must be a JSON array", "/");
  std::vector<FieldSample> out;
  out.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string path = "/" + std::to_string(r);
    if (!rec.is_object()) throw ConfigError("field record must be an object", path);
    for (const auto& [key, _] : rec.items()) {
      if (key != "j" && key != "R1010" && key != "omega" && key != "k" && key != "f") {
        throw ConfigError("unknown key", path + "/" + key);
      }
    }
    auto number = [&](const char* key) {
      if (!rec.contains(key) || !rec[key].is_number()) throw ConfigError("missing or non-numeric", path + "/" + key);
      return rec[key].get<double>();
    };
    FieldSample f;
    if (!rec.contains("j") || !rec["j"].is_number_integer() || rec["j"].get<std::int64_t>() < 1) {
      throw ConfigError("j must be a positive integer", path + "/j");
    }
    f.index = rec["j"].get<std::size_t>();
    f.curvature_r1010 = number("R1010");
    f.omega = number("omega");
    f.stochastic_f = rec.contains("f") ? number("f") : 0.0;
    if (f.curvature_r1010 < 0.0) throw ConfigError("R1010 must be non-negative", path + "/R1010");
    if (rec.contains("k")) {
      const auto& k = rec["k"];
      if (!k.is_array() || k.size() != 4) throw ConfigError("k must have 4 components", path + "/k");
      for (int i = 0; i < 4; ++i) {
        if (!k[i].is_number()) throw ConfigError("non-numeric component", path + "/k/" + std::to_string(i));
        f.wave_covector(i) = k[i].get<double>();
      }
    }
    out.push_back(f);
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const DeviationTrajectory& trajectory) {
  CsvWriter csv(out, {"tau", "ell0", "ell1", "ell2", "ell3", "rate0", "rate1", "rate2", "rate3"});
  for (const auto& s : trajectory.samples) {
    csv.row({s.tau, s.ell(0), s.ell(1), s.ell(2), s.ell(3), s.ell_rate(0), s.ell_rate(1), s.ell_rate(2),
             s.ell_rate(3)});
  }
}

void write_kernel_sweep_csv(std::ostream& out, std::span<const KernelSweepRow> rows) {
  CsvWriter csv(out, {"J", "t_span", "Re K", "Im K", "std_error"});
  for (const auto& r : rows) {
    csv.row({std::to_string(r.ensemble_size), format_number(r.t_span), format_number(r.estimate.value.real()),
             format_number(r.estimate.value.imag()), format_number(r.estimate.std_error)});
  }
}

void write_snapshot_csv(std::ostream& out, const WaveField& field, bool header) {
  Eigen::VectorXd action;
  bool has_action = true;
  try {
    action = madelung_decompose(field).action;
  } catch (const DiagnosticError&) {
    has_action = false;
  }
  CsvWriter csv(out, {"x", "Re psi", "Im psi", "|psi|^2", "S-unwrapped"}, header);
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    csv.row({format_number(field.position(i)), format_number(field.psi(i).real()),
             format_number(field.psi(i).imag()), format_number(std::norm(field.psi(i))),
             has_action ? format_number(action(i)) : std::string()});
  }
}

nlohmann::json to_json(const VelocityReport& r) {
  nlohmann::json j{{"count", r.count},
                   {"mean", r.mean},
                   {"variance", r.variance},
                   {"ks_critical_95", r.ks_critical_95},
                   {"degenerate", r.degenerate},
                   {"ks_pass", r.ks_pass}};
  j["ks_statistic"] = std::isfinite(r.ks_statistic) ? nlohmann::json(r.ks_statistic) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const PropertyOutcome& o) {
  return {{"name", o.name}, {"passed", o.passed}, {"asserted", o.asserted}, {"detail", o.detail}};
}

nlohmann::json to_json(const GaussianLaw& law) {
  static constexpr const char* kinds[] = {"interval", "velocity", "action_ratio", "energy"};
  return {{"sigma", law.sigma},
          {"kind", kinds[static_cast<int>(law.kind)]},
          {"conventional_interval", law.conventional_interval}};
}

nlohmann::json to_json(const KernelEstimate& e) {
  return {{"re", e.value.real()}, {"im", e.value.imag()}, {"J", e.ensemble_size}, {"std_error", e.std_error}};
}

}  // namespace geopath
