#include "geopath/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <vector>

#include "geopath/background_ensemble.hpp"
#include "geopath/deviation_dynamics.hpp"
#include "geopath/errors.hpp"
#include "geopath/hilbert_geometry.hpp"
#include "geopath/interval_statistics.hpp"
#include "geopath/io.hpp"
#include "geopath/kernel_builder.hpp"
#include "geopath/parallel.hpp"
#include "geopath/random.hpp"
#include "geopath/wave_dynamics.hpp"

namespace geopath {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kExperimentNames[] = {"decompose", "ensemble", "deviation", "kernel",
                                                 "stats",     "evolve",   "check"};

// ---------------------------------------------------------------------------
// Config reading: every accessed key is copied (or defaulted) into the resolved
// document; keys never accessed are reported by finish().
// ---------------------------------------------------------------------------

class Reader {
 public:
  Reader(const json* src, json& dst, std::string path) : src_(src), dst_(dst), path_(std::move(path)) {
    if (src_ != nullptr && !src_->is_object()) throw ConfigError("expected an object", path_.empty() ? "/" : path_);
    if (!dst_.is_object()) dst_ = json::object();
  }

  double number(const std::string& key, double fallback, const std::function<bool(double)>& valid = {},
                const char* requirement = "") {
    const json* v = lookup(key);
    double x = fallback;
    if (v != nullptr) {
      if (!v->is_number()) throw ConfigError("expected a number", at(key));
      x = v->get<double>();
    }
    if (!std::isfinite(x) || (valid && !valid(x))) throw ConfigError(std::string("invalid value ") + requirement, at(key));
    dst_[key] = x;
    return x;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback, std::uint64_t minimum = 0) {
    const json* v = lookup(key);
    std::uint64_t x = fallback;
    if (v != nullptr) {
      // Accepts 5, 5.0 and 1e5 alike; documents written by hand use all three.
      const bool whole = v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0) ||
                         (v->is_number_float() && v->get<double>() >= 0.0 && v->get<double>() < 1.8e19 &&
                          std::floor(v->get<double>()) == v->get<double>());
      if (!whole) throw ConfigError("expected a non-negative integer", at(key));
      x = v->is_number_float() ? static_cast<std::uint64_t>(v->get<double>()) : v->get<std::uint64_t>();
    }
    if (x < minimum) throw ConfigError("must be >= " + std::to_string(minimum), at(key));
    dst_[key] = x;
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = lookup(key);
    bool x = fallback;
    if (v != nullptr) {
      if (!v->is_boolean()) throw ConfigError("expected true or false", at(key));
      x = v->get<bool>();
    }
    dst_[key] = x;
    return x;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = lookup(key);
    std::string x = fallback;
    if (v != nullptr) {
      if (!v->is_string()) throw ConfigError("expected a string", at(key));
      x = v->get<std::string>();
    }
    dst_[key] = x;
    return x;
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     std::initializer_list<std::string_view> allowed) {
    const std::string x = text(key, fallback);
    if (std::find(allowed.begin(), allowed.end(), x) == allowed.end()) {
      std::string list;
      for (auto a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
      throw ConfigError("expected one of " + list + ", got '" + x + "'", at(key));
    }
    return x;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback,
                              const std::function<bool(double)>& valid = {}, std::size_t exact_size = 0) {
    const json* v = lookup(key);
    std::vector<double> x = fallback;
    if (v != nullptr) {
      if (!v->is_array()) throw ConfigError("expected an array of numbers", at(key));
      x.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        if (!e.is_number()) throw ConfigError("expected a number", at(key) + "/" + std::to_string(i));
        x.push_back(e.get<double>());
      }
    }
    if (x.empty()) throw ConfigError("must not be empty", at(key));
    if (exact_size != 0 && x.size() != exact_size) {
      throw ConfigError("expected " + std::to_string(exact_size) + " components", at(key));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || (valid && !valid(x[i]))) {
        throw ConfigError("invalid value", at(key) + "/" + std::to_string(i));
      }
    }
    dst_[key] = x;
    return x;
  }

  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& fallback,
                                   const std::vector<std::string>& allowed) {
    const json* v = lookup(key);
    std::vector<std::string> x = fallback;
    if (v != nullptr) {
      if (!v->is_array()) throw ConfigError("expected an array of strings", at(key));
      x.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        const std::string p = at(key) + "/" + std::to_string(i);
        if (!e.is_string()) throw ConfigError("expected a string", p);
        if (std::find(allowed.begin(), allowed.end(), e.get<std::string>()) == allowed.end()) {
          throw ConfigError("unknown entry '" + e.get<std::string>() + "'", p);
        }
        x.push_back(e.get<std::string>());
      }
    }
    dst_[key] = x;
    return x;
  }

  /// Raw value copied verbatim; nullptr when absent.
  const json* raw(const std::string& key) {
    const json* v = lookup(key);
    if (v != nullptr) dst_[key] = *v;
    return v;
  }

  Reader block(const std::string& key, bool required) {
    const json* v = lookup(key);
    if (v == nullptr && required) throw ConfigError("missing config block", at(key));
    return Reader(v, dst_[key], at(key));
  }

  void finish() const {
    if (src_ == nullptr) return;
    for (const auto& [key, _] : src_->items()) {
      if (!known_.contains(key)) throw ConfigError("unknown key", at(key));
    }
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }

 private:
  const json* lookup(const std::string& key) {
    known_.insert(key);
    if (src_ == nullptr || !src_->contains(key)) return nullptr;
    return &(*src_)[key];
  }

  const json* src_;
  json& dst_;
  std::string path_;
  std::set<std::string> known_;
};

bool positive(double x) { return x > 0.0; }
bool non_negative(double x) { return x >= 0.0; }

void resolve_ensemble_block(Reader& r, std::uint64_t default_count, const std::string& default_kind,
                            double default_delta = 1.0) {
  r.integer("count", default_count, 1);
  Reader d = r.block("distribution", false);
  const std::string kind = d.choice("kind", default_kind, {"half_normal", "log_uniform", "delta"});
  if (kind == "half_normal") {
    d.number("scale", 1.0, positive, "(scale > 0)");
  } else if (kind == "log_uniform") {
    const double lo = d.number("lo", 0.01, positive, "(lo > 0)");
    d.number("hi", 1.0, [lo](double hi) { return hi > lo; }, "(hi > lo)");
  } else {
    d.number("value", default_delta, non_negative, "(value >= 0)");
  }
  d.finish();
  r.number("f", 0.0);
  r.finish();
}

void resolve_block(Experiment e, Reader& r) {
  switch (e) {
    case Experiment::decompose: {
      r.integer("pairs", 1000, 1);
      const auto lo = r.integer("min_dim", 2, 1);
      r.integer("max_dim", 16, lo);
      const json* p1 = r.raw("psi1");
      const json* p2 = r.raw("psi2");
      if ((p1 == nullptr) != (p2 == nullptr)) throw ConfigError("psi1 and psi2 must be given together", r.at("psi1"));
      break;
    }
    case Experiment::ensemble:
      resolve_ensemble_block(r, 1000, "half_normal");
      break;
    case Experiment::deviation: {
      Reader ens = r.block("ensemble", false);
      resolve_ensemble_block(ens, 16, "half_normal");
      const double dt = r.number("dt", 0.01, positive, "(dt > 0)");
      r.number("t_span", 10.0, [dt](double t) { return t >= dt; }, "(t_span >= dt)");
      Reader init = r.block("initial", false);
      init.numbers("ell", {0.0, 1.0, 0.0, 0.0}, {}, 4);
      init.numbers("rate", {0.0, 0.0, 0.0, 0.0}, {}, 4);
      init.finish();
      if (r.raw("velocity") != nullptr) r.numbers("velocity", {}, {}, 4);
      r.integer("export", 1);
      break;
    }
    case Experiment::kernel: {
      Reader ens = r.block("ensemble", false);
      resolve_ensemble_block(ens, 1000, "half_normal");
      r.numbers("counts", {1000.0}, [](double j) { return j >= 1.0 && j == std::floor(j); });
      r.numbers("t_spans", {1.0}, positive);
      r.choice("normalization", "mean", {"mean", "raw_sum"});
      r.choice("phase_scale", "hbar", {"hbar", "total_action"});
      r.number("amplitude", 1.0, non_negative, "(C >= 0)");
      break;
    }
    case Experiment::stats: {
      r.number("sigma", 1.0, positive, "(sigma > 0)");
      r.boolean("conventional_interval", false);
      r.number("action_scale", 1.0, positive, "(S0 > 0)");
      r.integer("velocity_samples", 100000, 100);
      r.number("velocity_sigma", 1.0, positive, "(sigma > 0)");
      Reader ens = r.block("ensemble", false);
      resolve_ensemble_block(ens, 200, "half_normal");
      const double dt = r.number("dt", 0.01, positive, "(dt > 0)");
      r.number("t_span", 5.0, [dt](double t) { return t >= dt; }, "(t_span >= dt)");
      break;
    }
    case Experiment::evolve: {
      Reader g = r.block("grid", false);
      const double lo = g.number("x_min", -20.0);
      g.number("x_max", 20.0, [lo](double hi) { return hi > lo; }, "(x_max > x_min)");
      g.integer("points", 512, 8);
      g.finish();
      r.number("mass", 1.0, positive, "(mass > 0)");
      r.number("action_scale", 0.5, positive, "(S0 > 0)");
      r.choice("formulation", "geometric", {"geometric", "standard"});
      r.number("dt", 5e-4, positive, "(dt > 0)");
      r.integer("steps", 1000, 1);
      r.choice("boundary", "periodic", {"periodic", "absorbing"});
      r.number("absorb_fraction", 0.1, [](double f) { return f >= 0.0 && f < 0.5; }, "(0 <= f < 0.5)");
      r.number("absorb_strength", 1.0, non_negative, "(W0 >= 0)");
      Reader p = r.block("packet", false);
      p.choice("kind", "gaussian", {"gaussian", "plane_wave"});
      p.number("center", 0.0);
      p.number("width", 1.0, positive, "(width > 0)");
      p.number("k", 0.0);
      p.finish();
      Reader u = r.block("potential", false);
      const std::string kind = u.choice("kind", "none", {"none", "harmonic"});
      u.number("omega", 1.0, positive, "(omega > 0)");
      u.finish();
      r.integer("snapshot_stride", 0);
      break;
    }
    case Experiment::check: {
      r.strings("criteria",
                {"inner_product", "deviation_order", "exp_residual", "kernel_lattice", "kernel_scaling",
                 "norm_conservation", "madelung", "statistics"},
                {"inner_product", "deviation_order", "exp_residual", "kernel_lattice", "kernel_scaling",
                 "norm_conservation", "madelung", "statistics"});
      r.integer("deviation_dt_divisor", 100, 1);
      r.integer("deviation_periods", 10, 1);
      Reader lat = r.block("lattice", false);
      const double lo = lat.number("x_min", -6.0);
      lat.number("x_max", 6.0, [lo](double hi) { return hi > lo; }, "(x_max > x_min)");
      lat.integer("points", 3101, 3);
      lat.number("edge_taper", 2.0, non_negative, "(taper >= 0)");
      lat.integer("slices", 64, 1);
      lat.finish();
      r.numbers("scaling_counts", {100.0, 1000.0, 10000.0, 100000.0}, [](double j) { return j >= 2.0; });
      r.integer("norm_steps", 10000, 1);
      r.integer("ks_seeds", 20, 1);
      r.integer("ks_samples", 100000, 100);
      break;
    }
  }
  r.finish();
}

// ---------------------------------------------------------------------------
// Typed views of the resolved config.
// ---------------------------------------------------------------------------

struct Common {
  std::uint64_t seed;
  unsigned threads;
  double c;
  double hbar;
  fs::path out_dir;
};

Common common_of(const json& cfg) {
  return {cfg["seed"].get<std::uint64_t>(), static_cast<unsigned>(cfg["threads"].get<std::uint64_t>()),
          cfg["constants"]["c"].get<double>(), cfg["constants"]["hbar"].get<double>(),
          fs::path(cfg["output_path"].get<std::string>())};
}

EnsembleConfig ensemble_of(const json& block, const Common& common) {
  EnsembleConfig e;
  e.count = block["count"].get<std::size_t>();
  e.seed = common.seed;
  e.light_speed = common.c;
  e.stochastic_f = block["f"].get<double>();
  const auto& d = block["distribution"];
  const auto kind = d["kind"].get<std::string>();
  if (kind == "half_normal")
    e.curvature = HalfNormal{d["scale"].get<double>()};
  else if (kind == "log_uniform")
    e.curvature = LogUniform{d["lo"].get<double>(), d["hi"].get<double>()};
  else
    e.curvature = Delta{d["value"].get<double>()};
  return e;
}

Eigen::Vector4d vec4(const json& a) { return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()}; }

ComplexState state_of(const json& a, const std::string& path) {
  if (!a.is_array() || a.empty()) throw ConfigError("state must be a non-empty array of [re, im] pairs", path);
  ComplexState::Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& z = a[i];
    if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
      throw ConfigError("expected [re, im]", path + "/" + std::to_string(i));
    }
    v(static_cast<Eigen::Index>(i)) = {z[0].get<double>(), z[1].get<double>()};
  }
  return ComplexState(v);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  body(out);
}

struct Produced {
  json outputs = json::object();
  json diagnostics = json::object();
  int exit_code = exit_code::ok;
};

ComplexState random_state(CounterStream& s, Eigen::Index dim) {
  ComplexState::Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = {s.normal(), s.normal()};
  return ComplexState::normalized(v);
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

Produced run_decompose(const json& cfg, const Common& common) {
  const json& b = cfg["decompose"];
  Produced p;
  const auto pairs = b["pairs"].get<std::size_t>();
  const auto lo = b["min_dim"].get<std::uint64_t>();
  const auto hi = b["max_dim"].get<std::uint64_t>();

  double recon = 0.0, sym = 0.0, antisym = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    CounterStream s(common.seed, "decompose.pairs", k);
    const auto dim = static_cast<Eigen::Index>(lo + s.next_u64() % (hi - lo + 1));
    const ComplexState a = random_state(s, dim);
    const ComplexState c = random_state(s, dim);
    const auto ab = decompose_inner_product(a, c);
    const auto ba = decompose_inner_product(c, a);
    recon = std::max(recon, std::abs(ab.reconstruct() - a.amplitudes().dot(c.amplitudes())));
    sym = std::max(sym, std::abs(ab.riemannian - ba.riemannian));
    antisym = std::max(antisym, std::abs(ab.symplectic + ba.symplectic));
  }
  p.outputs["random_pairs"] = {{"pairs", pairs},
                               {"max_reconstruction_error", recon},
                               {"max_symmetry_error", sym},
                               {"max_antisymmetry_error", antisym}};

  if (b.contains("psi1")) {
    const ComplexState a = state_of(b["psi1"], "/decompose/psi1");
    const ComplexState c = state_of(b["psi2"], "/decompose/psi2");
    if (a.dimension() != c.dimension()) throw ConfigError("psi1 and psi2 differ in dimension", "/decompose/psi2");
    const auto parts = decompose_inner_product(a, c);
    json given{{"G", parts.riemannian}, {"Omega", parts.symplectic}};
    try {
      given["fubini_study"] = fubini_study_distance(a, c);
    } catch (const InvalidInput& err) {
      p.diagnostics["fubini_study"] = err.what();
    }
    auto bloch = [&](const ComplexState& s, const char* name) {
      if (s.dimension() == 2 && s.is_normalized()) {
        const Eigen::Vector3d n = bloch_project(s);
        given[name] = {n(0), n(1), n(2)};
      }
    };
    bloch(a, "bloch1");
    bloch(c, "bloch2");
    p.outputs["given_pair"] = given;
  }
  return p;
}

Produced run_ensemble(const json& cfg, const Common& common) {
  const EnsembleConfig ec = ensemble_of(cfg["ensemble"], common);
  const auto fields = sample_ensemble(ec, common.threads);
  write_file(common.out_dir / "fields.json", [&](std::ostream& o) { o << ensemble_to_json(fields).dump(2) << "\n"; });

  double mean = 0.0, mean_omega = 0.0;
  for (const auto& f : fields) {
    mean += f.curvature_r1010;
    mean_omega += f.omega;
  }
  const auto n = static_cast<double>(fields.size());
  mean /= n;
  mean_omega /= n;
  double var = 0.0;
  for (const auto& f : fields) var += (f.curvature_r1010 - mean) * (f.curvature_r1010 - mean);
  var = fields.size() > 1 ? var / (n - 1.0) : 0.0;

  Produced p;
  p.outputs = {{"count", fields.size()},
               {"mean_R1010", mean},
               {"variance_R1010", var},
               {"mean_omega", mean_omega},
               {"files", {"fields.json"}}};
  return p;
}

std::vector<DeviationTrajectory> integrate_fields(const std::vector<FieldSample>& fields, const DeviationState& init,
                                                  const Eigen::Vector4d& velocity, double t_span, double dt,
                                                  double hbar, unsigned threads) {
  std::vector<DeviationTrajectory> out(fields.size());
  parallel_for(fields.size(), threads,
               [&](std::size_t j) { out[j] = integrate_deviation(fields[j], init, velocity, t_span, dt, hbar); });
  return out;
}

Produced run_deviation(const json& cfg, const Common& common) {
  const json& b = cfg["deviation"];
  const EnsembleConfig ec = ensemble_of(b["ensemble"], common);
  const auto fields = sample_ensemble(ec, common.threads);
  DeviationState init;
  init.ell = vec4(b["initial"]["ell"]);
  init.ell_rate = vec4(b["initial"]["rate"]);
  const Eigen::Vector4d velocity = b.contains("velocity") ? vec4(b["velocity"]) : Eigen::Vector4d(common.c, 0, 0, 0);
  const double t_span = b["t_span"].get<double>();
  const double dt = b["dt"].get<double>();

  const auto trajectories = integrate_fields(fields, init, velocity, t_span, dt, common.hbar, common.threads);

  Produced p;
  std::vector<double> actions;
  json per_field = json::array();
  for (const auto& t : trajectories) {
    actions.push_back(t.action);
    const auto& last = t.samples.back();
    per_field.push_back({{"j", t.field_index},
                         {"S", t.action},
                         {"Phi", t.phase},
                         {"final_ell", {last.ell(0), last.ell(1), last.ell(2), last.ell(3)}},
                         {"final_rate", {last.ell_rate(0), last.ell_rate(1), last.ell_rate(2), last.ell_rate(3)}}});
  }
  json files = json::array();
  const auto exported = std::min<std::size_t>(b["export"].get<std::size_t>(), trajectories.size());
  for (std::size_t j = 0; j < exported; ++j) {
    const std::string name = "trajectory_j" + std::to_string(trajectories[j].field_index) + ".csv";
    write_file(common.out_dir / name, [&](std::ostream& o) { write_trajectory_csv(o, trajectories[j]); });
    files.push_back(name);
  }
  p.outputs = {{"fields", per_field}, {"total_action", total_action(actions)}, {"steps", trajectories[0].samples.size() - 1},
               {"step", trajectories[0].step}, {"files", files}};
  return p;
}

Produced run_kernel(const json& cfg, const Common& common) {
  const json& b = cfg["kernel"];
  EnsembleConfig ec = ensemble_of(b["ensemble"], common);
  EnsembleKernelOptions opt;
  opt.hbar = common.hbar;
  opt.amplitude = b["amplitude"].get<double>();
  opt.normalization = b["normalization"].get<std::string>() == "mean" ? Normalization::mean : Normalization::raw_sum;
  opt.scale = b["phase_scale"].get<std::string>() == "hbar" ? PhaseScale::hbar : PhaseScale::total_action;
  opt.threads = common.threads;

  std::vector<KernelSweepRow> rows;
  json estimates = json::array();
  for (double count : b["counts"].get<std::vector<double>>()) {
    for (double t : b["t_spans"].get<std::vector<double>>()) {
      ec.count = static_cast<std::size_t>(count);
      opt.t_span = t;
      const KernelEstimate k = ensemble_kernel(ec, opt);
      rows.push_back({ec.count, t, k});
      json e = to_json(k);
      e["t_span"] = t;
      estimates.push_back(e);
    }
  }
  write_file(common.out_dir / "kernel_sweep.csv", [&](std::ostream& o) { write_kernel_sweep_csv(o, rows); });
  Produced p;
  p.outputs = {{"value", {{"re", rows.front().estimate.value.real()}, {"im", rows.front().estimate.value.imag()}}},
               {"estimates", estimates},
               {"files", {"kernel_sweep.csv"}}};
  p.diagnostics["endpoints"] =
      "the ensemble phases depend only on omega(j) and t_span; K(b,a) endpoints are not modeled";
  return p;
}

Produced run_stats(const json& cfg, const Common& common) {
  const json& b = cfg["stats"];
  const double sigma = b["sigma"].get<double>();
  const GaussianLaw interval{sigma, LawKind::interval, b["conventional_interval"].get<bool>()};
  const GaussianLaw velocity{sigma, LawKind::velocity};
  const double s0 = b["action_scale"].get<double>();

  json points = json::array();
  for (double d : {0.0, 1.0, std::sqrt(2.0), 2.0}) {
    points.push_back({{"x", d},
                      {"interval", interval_probability(d, interval)},
                      {"velocity", velocity_probability(d, velocity)},
                      {"action", action_probability(d * s0, s0, sigma)},
                      {"energy", energy_probability(d * 2.0 * sigma * sigma, sigma)}});
  }
  json properties = json::array();
  for (const auto& o : property_suite(interval, IntervalMetric())) properties.push_back(to_json(o));

  const auto n = b["velocity_samples"].get<std::size_t>();
  const double vs = b["velocity_sigma"].get<double>();
  std::vector<double> synthetic(n);
  parallel_for(n, common.threads, [&](std::size_t i) {
    CounterStream s(common.seed, "stats.synthetic_velocity", i);
    synthetic[i] = vs * s.normal();
  });
  const VelocityReport synthetic_report = velocity_sample_check(synthetic);

  const EnsembleConfig ec = ensemble_of(b["ensemble"], common);
  const auto fields = sample_ensemble(ec, common.threads);
  DeviationState init;
  init.ell = Eigen::Vector4d(0.0, 1.0, 0.0, 0.0);
  const auto trajectories = integrate_fields(fields, init, Eigen::Vector4d(common.c, 0, 0, 0), b["t_span"].get<double>(),
                                             b["dt"].get<double>(), common.hbar, common.threads);
  json ensemble_report;
  if (trajectories.size() >= 100) {
    ensemble_report = to_json(empirical_velocity_check(trajectories));
  } else {
    ensemble_report = {{"skipped", "fewer than 100 trajectories"}};
  }

  json report{{"law", to_json(interval)},
              {"action_scale", s0},
              {"point_values", points},
              {"properties", properties},
              {"synthetic_velocity", to_json(synthetic_report)},
              {"ensemble_velocity", ensemble_report}};
  write_file(common.out_dir / "stats_report.json", [&](std::ostream& o) { o << report.dump(2) << "\n"; });
  Produced p;
  p.outputs = report;
  p.outputs["files"] = {"stats_report.json"};
  return p;
}

Produced run_evolve(const json& cfg, const Common& common) {
  const json& b = cfg["evolve"];
  const auto& g = b["grid"];
  const bool standard = b["formulation"].get<std::string>() == "standard";
  const double s0 = standard ? 0.5 * common.hbar : b["action_scale"].get<double>();
  const double mass = b["mass"].get<double>();
  const auto& pk = b["packet"];
  const auto points = static_cast<Eigen::Index>(g["points"].get<std::uint64_t>());
  const double x_min = g["x_min"].get<double>(), x_max = g["x_max"].get<double>();

  WaveField field = gaussian_packet(points, x_min, x_max, pk["center"].get<double>(), pk["width"].get<double>(),
                                    pk["k"].get<double>(), mass, s0);
  if (pk["kind"].get<std::string>() == "plane_wave") {
    for (Eigen::Index i = 0; i < points; ++i) field.psi(i) = std::polar(1.0, pk["k"].get<double>() * field.position(i));
    field.psi /= std::sqrt(field.norm());
  }
  if (b["potential"]["kind"].get<std::string>() == "harmonic") {
    const double w = b["potential"]["omega"].get<double>();
    for (Eigen::Index i = 0; i < points; ++i) field.potential(i) = 0.5 * mass * w * w * field.position(i) * field.position(i);
  }

  EvolveOptions opt;
  opt.boundary = b["boundary"].get<std::string>() == "periodic" ? Boundary::periodic : Boundary::absorbing;
  opt.absorb_fraction = b["absorb_fraction"].get<double>();
  opt.absorb_strength = b["absorb_strength"].get<double>();
  const auto stride = b["snapshot_stride"].get<std::size_t>();
  json files = json::array();
  json snapshots = json::array();
  opt.snapshot_stride = stride;
  opt.observer = [&](const WaveField& f, std::size_t step) {
    const std::string name = "snapshot_" + std::to_string(step) + ".csv";
    write_file(common.out_dir / name, [&](std::ostream& o) { write_snapshot_csv(o, f); });
    files.push_back(name);
    snapshots.push_back({{"step", step}, {"time", f.time}, {"norm", f.norm()}, {"mean_x", position_mean(f)},
                         {"spread", position_spread(f)}});
  };

  const double dt = b["dt"].get<double>();
  const auto steps = b["steps"].get<std::size_t>();
  const double norm0 = field.norm();
  WaveField final_field = field;
  if (standard) {
    final_field.psi = evolve_schrodinger(field.psi, field.potential, field.x0, field.dx, mass, common.hbar, dt, steps, opt);
    final_field.time = dt * static_cast<double>(steps);
  } else {
    final_field = evolve(field, dt, steps, opt);
  }

  Produced p;
  p.outputs = {{"observables",
                {{"time", final_field.time},
                 {"norm_initial", norm0},
                 {"norm_final", final_field.norm()},
                 {"mean_x", position_mean(final_field)},
                 {"spread", position_spread(final_field)}}},
               {"snapshots", snapshots},
               {"files", files}};
  p.diagnostics["effective_hbar"] = 2.0 * s0;
  return p;
}

// ---------------------------------------------------------------------------
// Check suite: built-in oracle comparisons.
// ---------------------------------------------------------------------------

struct Criterion {
  std::string name;
  bool passed = false;
  json measured = json::object();
};

Criterion check_inner_product(const Common& common) {
  Criterion c{"inner_product"};
  double recon = 0.0, sym = 0.0, antisym = 0.0;
  for (std::size_t k = 0; k < 1000; ++k) {
    CounterStream s(common.seed, "check.inner_product", k);
    const auto dim = static_cast<Eigen::Index>(2 + s.next_u64() % 15);
    const ComplexState a = random_state(s, dim);
    const ComplexState b = random_state(s, dim);
    const auto ab = decompose_inner_product(a, b);
    const auto ba = decompose_inner_product(b, a);
    recon = std::max(recon, std::abs(ab.reconstruct() - a.amplitudes().dot(b.amplitudes())));
    sym = std::max(sym, std::abs(ab.riemannian - ba.riemannian));
    antisym = std::max(antisym, std::abs(ab.symplectic + ba.symplectic));
  }
  c.passed = recon < 1e-12 && sym < 1e-12 && antisym < 1e-12;
  c.measured = {{"max_reconstruction_error", recon}, {"max_symmetry_error", sym}, {"max_antisymmetry_error", antisym},
                {"tolerance", 1e-12}};
  return c;
}

/// Max |l^1 - closed form| relative to the oscillation amplitude, plus relative energy drift.
std::pair<double, double> oscillator_errors(double omega, double periods, double dt) {
  const double ell0 = 1.0, v0 = 0.5;
  FieldSample f;
  f.curvature_r1010 = omega * omega;
  f.omega = omega;
  DeviationState init;
  init.ell(1) = ell0;
  init.ell_rate(1) = v0;
  const double span = periods * 2.0 * std::numbers::pi / omega;
  const auto traj = integrate_deviation(f, init, Eigen::Vector4d(1.0, 0, 0, 0), span, dt);
  const double amplitude = std::sqrt(ell0 * ell0 + (v0 / omega) * (v0 / omega));
  const double e0 = 0.5 * v0 * v0 + 0.5 * omega * omega * ell0 * ell0;
  double err = 0.0, drift = 0.0;
  for (const auto& s : traj.samples) {
    err = std::max(err, std::abs(s.ell(1) - oscillator_closed_form(ell0, v0, omega, s.tau)));
    const double e = 0.5 * s.ell_rate(1) * s.ell_rate(1) + 0.5 * omega * omega * s.ell(1) * s.ell(1);
    drift = std::max(drift, std::abs(e - e0) / e0);
  }
  return {err / amplitude, drift};
}

Criterion check_deviation_order(std::size_t divisor, std::size_t periods) {
  Criterion c{"deviation_order"};
  const double omega = 2.0 * std::numbers::pi;
  const double period = 1.0;
  const auto p = static_cast<double>(periods);
  std::vector<double> errors;
  for (double d : {1.0, 2.0, 4.0}) errors.push_back(oscillator_errors(omega, p, period / (static_cast<double>(divisor) * d)).first);
  json exponents = json::array();
  bool order_ok = true;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double e = std::log2(errors[i] / errors[i + 1]);
    exponents.push_back(e);
    order_ok = order_ok && std::abs(e - 4.0) <= 0.2;
  }
  const auto [fine_error, drift] = oscillator_errors(omega, p, period / 1000.0);
  c.passed = order_ok && fine_error < 1e-6 && drift < 1e-6;
  c.measured = {{"dt_divisor", divisor},  {"errors", errors},       {"exponents", exponents},
                {"exponent_target", 4.0}, {"exponent_tolerance", 0.2}, {"relative_error_T_over_1000", fine_error},
                {"energy_drift_T_over_1000", drift}};
  return c;
}

Criterion check_exp_residual(const Common& common) {
  Criterion c{"exp_residual"};
  EnsembleConfig ec;
  ec.count = 100;
  ec.seed = common.seed;
  ec.light_speed = common.c;
  double worst = 0.0;
  for (const auto& f : sample_ensemble(ec, common.threads)) {
    CounterStream s(common.seed, "check.exp_residual", f.index);
    const Eigen::Vector4d x(0.0, 2.0 * s.uniform() - 1.0, 2.0 * s.uniform() - 1.0, 2.0 * s.uniform() - 1.0);
    worst = std::max(worst, exp_solution_residual(f, x, 10.0 * s.uniform(), common.c));
  }
  c.passed = worst < 1e-12;
  c.measured = {{"max_residual", worst}, {"tolerance", 1e-12}};
  return c;
}

Criterion check_kernel_lattice(const json& lat) {
  Criterion c{"kernel_lattice"};
  LatticeGrid grid{lat["x_min"].get<double>(), lat["x_max"].get<double>(), lat["points"].get<std::size_t>(),
                   lat["edge_taper"].get<double>()};
  const auto slices = lat["slices"].get<std::size_t>();
  const double m = 1.0, hbar = 1.0, t = 1.0, xa = 0.0, xb = 0.5, w = 1.0;
  const auto free_exact = analytic_free_kernel(m, t, xa, xb, hbar);
  const auto harm_exact = harmonic_kernel(m, w, t, xa, xb, hbar);
  const auto free_lat = lattice_path_integral([](double) { return 0.0; }, m, hbar, t, xa, xb, slices, grid);
  const auto harm_lat =
      lattice_path_integral([&](double x) { return 0.5 * m * w * w * x * x; }, m, hbar, t, xa, xb, slices, grid);
  const auto single = lattice_path_integral([](double) { return 0.0; }, m, hbar, t, xa, xb, 1, grid);
  const double free_rel = std::abs(free_lat - free_exact) / std::abs(free_exact);
  const double harm_rel = std::abs(harm_lat - harm_exact) / std::abs(harm_exact);
  const double single_abs = std::abs(single - free_exact);
  c.passed = free_rel < 0.02 && harm_rel < 0.02 && single_abs < 1e-8;
  c.measured = {{"slices", slices},          {"free_relative_error", free_rel}, {"harmonic_relative_error", harm_rel},
                {"single_slice_error", single_abs}, {"relative_tolerance", 0.02},     {"single_slice_tolerance", 1e-8}};
  return c;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

Criterion check_kernel_scaling(const Common& common, const std::vector<double>& counts) {
  Criterion c{"kernel_scaling"};
  EnsembleConfig ec;
  ec.seed = common.seed;
  ec.light_speed = common.c;
  ec.curvature = HalfNormal{1.0};
  EnsembleKernelOptions opt;
  opt.t_span = 3.0;
  opt.hbar = common.hbar;
  opt.threads = common.threads;
  std::vector<double> errors;
  for (double j : counts) {
    ec.count = static_cast<std::size_t>(j);
    errors.push_back(ensemble_kernel(ec, opt).std_error);
  }
  const double slope = loglog_slope(counts, errors);
  c.passed = std::abs(slope + 0.5) <= 0.1;
  c.measured = {{"counts", counts}, {"std_errors", errors}, {"slope", slope}, {"target", -0.5}, {"tolerance", 0.1}};
  return c;
}

Criterion check_norm_conservation(std::size_t steps) {
  Criterion c{"norm_conservation"};
  WaveField f = gaussian_packet(512, -20.0, 20.0, -5.0, 1.0, 1.0, 1.0, 0.5);
  double previous = f.norm();
  const double initial = previous;
  double worst_step = 0.0;
  EvolveOptions opt;
  opt.snapshot_stride = 1;
  opt.observer = [&](const WaveField& w, std::size_t step) {
    if (step == 0) return;
    const double n = w.norm();
    worst_step = std::max(worst_step, std::abs(n - previous));
    previous = n;
  };
  evolve(f, 5e-4, steps, opt);
  c.passed = worst_step <= 1e-10;
  c.measured = {{"steps", steps}, {"max_drift_per_step", worst_step}, {"total_drift", std::abs(previous - initial)},
                {"tolerance_per_step", 1e-10}};
  return c;
}

/// Smooth periodic WKB state a = exp(cos(2 pi x/L)/2), phase k x, evolved briefly.
WaveField wkb_state(Eigen::Index points, double length, double action_scale) {
  WaveField f;
  f.dx = length / static_cast<double>(points);
  f.x0 = -0.5 * length;
  f.mass = 1.0;
  f.action_scale = action_scale;
  f.potential = Eigen::VectorXd::Zero(points);
  f.psi.resize(points);
  const double k = 2.0 * std::numbers::pi * 2.0 / length;
  for (Eigen::Index i = 0; i < points; ++i) {
    const double x = f.position(i);
    f.psi(i) = std::polar(std::exp(0.5 * std::cos(2.0 * std::numbers::pi * x / length)), k * x);
  }
  return f;
}

/// Max-norm residuals (continuity, HJ + quantum potential) for an evolved WKB state.
std::pair<double, double> madelung_residuals(Eigen::Index points) {
  const double length = 20.0, s0 = 0.5;
  const WaveField evolved = evolve(wkb_state(points, length, s0), 5e-5, 400);
  const MadelungFields mf = madelung_decompose(evolved);
  const Eigen::VectorXcd rate = time_derivative(evolved);
  const Eigen::VectorXd density = mf.amplitude.cwiseAbs2();
  Eigen::VectorXd density_rate(points), action_rate(points);
  for (Eigen::Index i = 0; i < points; ++i) {
    density_rate(i) = 2.0 * (std::conj(evolved.psi(i)) * rate(i)).real();
    action_rate(i) = evolved.effective_hbar() * (rate(i) / evolved.psi(i)).imag();
  }
  const Eigen::VectorXd cont = continuity_residual(density, mf.action, evolved.mass, density_rate, evolved.dx);
  const Eigen::VectorXd hj = hamilton_jacobi_residual(mf.action, evolved.potential, evolved.mass, action_rate, evolved.dx);
  const Eigen::VectorXd q = quantum_potential(mf.amplitude, evolved.mass, s0, evolved.dx);
  return {cont.cwiseAbs().maxCoeff(), (hj + q).cwiseAbs().maxCoeff()};
}

Criterion check_madelung() {
  Criterion c{"madelung"};
  std::vector<double> h, cont, hj;
  for (Eigen::Index n : {128, 256, 512}) {
    const auto [rc, rh] = madelung_residuals(n);
    h.push_back(20.0 / static_cast<double>(n));
    cont.push_back(rc);
    hj.push_back(rh);
  }
  const double cont_order = loglog_slope(h, cont);
  const double hj_order = loglog_slope(h, hj);
  c.passed = std::abs(cont_order - 2.0) <= 0.3 && std::abs(hj_order - 2.0) <= 0.3;
  c.measured = {{"dx", h},
                {"continuity_residual", cont},
                {"hamilton_jacobi_plus_quantum_potential", hj},
                {"continuity_order", cont_order},
                {"hamilton_jacobi_order", hj_order},
                {"target", 2.0},
                {"tolerance", 0.3}};
  return c;
}

Criterion check_statistics(const Common& common, std::size_t seeds, std::size_t samples) {
  Criterion c{"statistics"};
  const double inv = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const GaussianLaw il{1.0, LawKind::interval};
  const GaussianLaw vl{1.0, LawKind::velocity};
  const double values[][2] = {
      {interval_probability(0.0, il), inv},
      {interval_probability(std::sqrt(2.0), il), std::exp(-1.0) * inv},
      {velocity_probability(0.0, vl), inv},
      {velocity_probability(1.0, vl), std::exp(-0.5) * inv},
      {action_probability(0.0, 1.0, 1.0), inv},
      {action_probability(1.0, 1.0, 1.0), std::exp(-1.0) * inv},
      {energy_probability(2.0, 1.0), std::exp(-1.0) * inv},
  };
  double point_error = 0.0;
  for (const auto& v : values) point_error = std::max(point_error, std::abs(v[0] - v[1]));

  bool properties_ok = true;
  for (const auto& o : property_suite(il, IntervalMetric()))
    if (o.asserted) properties_ok = properties_ok && o.passed;

  std::size_t passes = 0;
  std::vector<double> draws(samples);
  for (std::size_t seed = 0; seed < seeds; ++seed) {
    parallel_for(samples, common.threads, [&](std::size_t i) {
      CounterStream s(common.seed + seed, "check.ks", i);
      draws[i] = s.normal();
    });
    if (velocity_sample_check(draws).ks_pass) ++passes;
  }
  const double pass_fraction = static_cast<double>(passes) / static_cast<double>(seeds);
  c.passed = point_error < 1e-12 && properties_ok && pass_fraction >= 0.9;
  c.measured = {{"max_point_error", point_error}, {"properties_pass", properties_ok},
                {"ks_pass_fraction", pass_fraction}, {"ks_seeds", seeds}};
  return c;
}

Produced run_check(const json& cfg, const Common& common) {
  const json& b = cfg["check"];
  Produced p;
  json results = json::array();
  bool all = true;
  for (const auto& name : b["criteria"].get<std::vector<std::string>>()) {
    Criterion c;
    if (name == "inner_product")
      c = check_inner_product(common);
    else if (name == "deviation_order")
      c = check_deviation_order(b["deviation_dt_divisor"].get<std::size_t>(), b["deviation_periods"].get<std::size_t>());
    else if (name == "exp_residual")
      c = check_exp_residual(common);
    else if (name == "kernel_lattice")
      c = check_kernel_lattice(b["lattice"]);
    else if (name == "kernel_scaling")
      c = check_kernel_scaling(common, b["scaling_counts"].get<std::vector<double>>());
    else if (name == "norm_conservation")
      c = check_norm_conservation(b["norm_steps"].get<std::size_t>());
    else if (name == "madelung")
      c = check_madelung();
    else
      c = check_statistics(common, b["ks_seeds"].get<std::size_t>(), b["ks_samples"].get<std::size_t>());
    all = all && c.passed;
    results.push_back({{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}});
  }
  p.outputs = {{"criteria", results}, {"all_passed", all}};
  if (!all) p.exit_code = exit_code::oracle_mismatch;
  return p;
}

json error_record(Experiment e, const std::string& kind, const std::string& message, int code,
                  const std::string& key_path = {}) {
  json err{{"kind", kind}, {"message", message}, {"exit_code", code}};
  if (!key_path.empty()) err["key_path"] = key_path;
  return {{"schema_version", config_schema_version},
          {"experiment", experiment_name(e)},
          {"status", "error"},
          {"error", err}};
}

}  // namespace

std::optional<Experiment> experiment_from_name(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kExperimentNames); ++i)
    if (kExperimentNames[i] == name) return static_cast<Experiment>(i);
  return std::nullopt;
}

std::string_view experiment_name(Experiment e) { return kExperimentNames[static_cast<std::size_t>(e)]; }

json resolve_config(Experiment experiment, const json* document, const Overrides& overrides) {
  json out = json::object();
  Reader top(document, out, "");
  const auto version = top.integer("schema_version", config_schema_version);
  if (version != config_schema_version) {
    throw ConfigError("unsupported schema version " + std::to_string(version), "/schema_version");
  }
  const std::string name(experiment_name(experiment));
  const std::string declared = top.text("experiment", name);
  if (declared != name) throw ConfigError("config is for experiment '" + declared + "', not '" + name + "'", "/experiment");
  top.integer("seed", 0);
  top.integer("threads", 1, 1);
  Reader constants = top.block("constants", false);
  constants.number("c", 1.0, positive, "(c > 0)");
  constants.number("hbar", 1.0, positive, "(hbar > 0)");
  constants.finish();
  top.text("output_path", "out");
  Reader block = top.block(name, document != nullptr);
  resolve_block(experiment, block);
  top.finish();

  if (overrides.seed) out["seed"] = *overrides.seed;
  if (overrides.output_path) out["output_path"] = *overrides.output_path;
  if (out["output_path"].get<std::string>().empty()) throw ConfigError("must not be empty", "/output_path");
  return out;
}

RunOutcome execute(Experiment experiment, const json& resolved) {
  const auto start = std::chrono::steady_clock::now();
  const Common common = common_of(resolved);
  fs::create_directories(common.out_dir);

  Produced p;
  switch (experiment) {
    case Experiment::decompose: p = run_decompose(resolved, common); break;
    case Experiment::ensemble: p = run_ensemble(resolved, common); break;
    case Experiment::deviation: p = run_deviation(resolved, common); break;
    case Experiment::kernel: p = run_kernel(resolved, common); break;
    case Experiment::stats: p = run_stats(resolved, common); break;
    case Experiment::evolve: p = run_evolve(resolved, common); break;
    case Experiment::check: p = run_check(resolved, common); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunOutcome r;
  r.exit_code = p.exit_code;
  r.record = {{"schema_version", config_schema_version},
              {"experiment", experiment_name(experiment)},
              {"status", p.exit_code == exit_code::ok ? "ok" : "failed"},
              {"config", resolved},
              {"outputs", p.outputs},
              {"diagnostics", p.diagnostics},
              {"timing", {{"wall_time_s", wall}}}};
  return r;
}

RunOutcome run(Experiment experiment, const json* document, const Overrides& overrides) {
  RunOutcome r;
  std::optional<fs::path> out_dir;
  if (overrides.output_path) {
    out_dir = fs::path(*overrides.output_path);
  } else if (document != nullptr && document->is_object() && document->contains("output_path") &&
             (*document)["output_path"].is_string() && !(*document)["output_path"].get<std::string>().empty()) {
    // Lets a config error be recorded next to the outputs the document asked for.
    out_dir = fs::path((*document)["output_path"].get<std::string>());
  }
  try {
    const json resolved = resolve_config(experiment, document, overrides);
    out_dir = fs::path(resolved["output_path"].get<std::string>());
    r = execute(experiment, resolved);
  } catch (const ConfigError& e) {
    r = {exit_code::config, error_record(experiment, "config", e.what(), exit_code::config, e.key_path())};
  } catch (const DivergenceError& e) {
    r = {exit_code::divergence, error_record(experiment, "divergence", e.what(), exit_code::divergence)};
    r.record["error"]["tau"] = e.tau();
  } catch (const std::exception& e) {
    r = {exit_code::failure, error_record(experiment, "error", e.what(), exit_code::failure)};
  }
  if (out_dir) {
    try {
      fs::create_directories(*out_dir);
      write_file(*out_dir / (std::string(experiment_name(experiment)) + ".json"),
                 [&](std::ostream& o) { o << r.record.dump(2) << "\n"; });
    } catch (const std::exception&) {
      // The record is still returned to the caller, who reports it on stderr.
    }
  }
  return r;
}

}  // namespace geopath
