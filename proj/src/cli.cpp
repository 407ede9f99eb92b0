#include "aldi/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "aldi/darcy.hpp"
#include "aldi/diagnostics.hpp"
#include "aldi/errors.hpp"
#include "aldi/rng.hpp"

namespace aldi::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

/// A config field that is missing, mistyped or out of range.
class FieldError : public std::runtime_error {
 public:
  FieldError(const std::string& field, const std::string& msg)
      : std::runtime_error("field '" + field + "': " + msg) {}
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
  }
  fs::rename(tmp, path);
}

json preset_to_json(const BenchmarkPreset& p) {
  json families = json::array();
  for (auto f : p.families) families.push_back(std::string(to_string(f)));
  return json{{"preset", p.name},
              {"ensemble_sizes", p.ensemble_sizes},
              {"families", families},
              {"repetitions", p.repetitions},
              {"step_size", p.step_size},
              {"total_time", p.total_time},
              {"num_steps", p.num_steps()},
              {"tau", p.tau},
              {"window", p.window},
              {"snapshot_stride", 1},
              {"jitter", p.jitter},
              {"base_seed", p.base_seed}};
}

// Shared, read-only state of one benchmark: model, prior and synthetic data.
struct BenchmarkContext {
  darcy::DarcyModel model;
  Matrix prior_precision;
  darcy::TruthAndData data;
  std::optional<SamplingProblem> problem;

  explicit BenchmarkContext(const BenchmarkPreset& preset)
      : model(darcy::standard_model()),
        prior_precision(darcy::build_prior_precision(model)),
        data(darcy::make_truth_and_data(model, data_seed(preset.base_seed))) {
    problem.emplace(darcy::make_inverse_problem(model, data.y_obs, prior_precision));
  }
};

MetricRow run_cell(const BenchmarkContext& ctx, const BenchmarkPreset& preset,
                   SamplerFamily family, Index size, int repetition) {
  const ParticleEnsemble initial = darcy::sample_prior(
      ctx.model, ctx.prior_precision, size, initial_seed(preset.base_seed, size, repetition));
  SamplerConfig config;
  config.family = family;
  config.step_size = preset.step_size;
  config.num_steps = preset.num_steps();
  config.seed = noise_seed(preset.base_seed, size, repetition);
  config.jitter = preset.jitter;
  const RunRecord record =
      run(initial, config, *ctx.problem, RecordOptions{1, preset.window_start_step()});
  const WindowSpec window{preset.tau, preset.window, ctx.model.mesh()};
  return MetricRow{family,
                   size,
                   repetition,
                   bias(record, ctx.data.truth.log_perm, window),
                   spread(record, window),
                   config.seed};
}

std::string metric_row_csv(const MetricRow& r) {
  std::ostringstream os;
  os << method_name(r.family) << ',' << gradient_mode(r.family) << ',' << r.size << ','
     << r.repetition << ',' << fmt(r.bias) << ',' << fmt(r.spread) << ',' << r.seed << '\n';
  return os.str();
}

std::string table_csv(const BenchmarkPreset& preset, const std::vector<MetricRow>& rows,
                      bool use_bias, const std::string& config_line) {
  // Gradient-free columns first, EKS before ALDI.
  const SamplerFamily order[] = {SamplerFamily::eks_gradient_free,
                                 SamplerFamily::aldi_gradient_free, SamplerFamily::eks,
                                 SamplerFamily::aldi};
  std::vector<SamplerFamily> cols;
  for (auto f : order) {
    if (std::find(preset.families.begin(), preset.families.end(), f) != preset.families.end()) {
      cols.push_back(f);
    }
  }
  std::ostringstream os;
  os << config_line << "N";
  for (auto f : cols) os << ',' << table_label(f);
  os << '\n';
  for (Index n : preset.ensemble_sizes) {
    os << n;
    for (auto f : cols) os << ',' << fmt(aggregate(rows, f, n, use_bias));
    os << '\n';
  }
  return os.str();
}

// ---- JSON config helpers for `sample` ----

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) throw FieldError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FieldError(path.empty() ? key : path + "." + key, "is required");
  return *it;
}

double number_field(const json& obj, const std::string& path, const char* key,
                    std::optional<double> fallback = std::nullopt) {
  const std::string name = path + "." + key;
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw FieldError(name, "is required");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw FieldError(name, "expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_field(const json& obj, const std::string& path, const char* key,
                             std::optional<std::uint64_t> fallback = std::nullopt) {
  const std::string name = path + "." + key;
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw FieldError(name, "is required");
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw FieldError(name, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

Vector vector_field(const json& v, const std::string& name) {
  if (!v.is_array() || v.empty()) throw FieldError(name, "expected a non-empty array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw FieldError(name, "expected a non-empty array of numbers");
    out(static_cast<Index>(i)) = v[i].get<double>();
  }
  return out;
}

Matrix matrix_field(const json& v, const std::string& name) {
  if (!v.is_array() || v.empty()) throw FieldError(name, "expected an array of rows");
  const std::size_t rows = v.size();
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) throw FieldError(name, "expected an array of rows");
  Matrix out(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) throw FieldError(name, "rows must have equal length");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!v[i][j].is_number()) throw FieldError(name, "expected numbers");
      out(static_cast<Index>(i), static_cast<Index>(j)) = v[i][j].get<double>();
    }
  }
  return out;
}

struct SampleSetup {
  std::optional<SamplingProblem> problem;
  std::optional<ParticleEnsemble> initial;
  SamplerConfig config;
  std::size_t stride = 1;
};

template <typename F>
auto with_field(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidInput& e) {
    throw FieldError(name, e.what());
  }
}

SampleSetup parse_sample_config(json& cfg, const SampleOverrides& overrides) {
  SampleSetup setup;
  if (!cfg.is_object()) throw FieldError("<root>", "expected a JSON object");

  // sampler
  json& s = cfg["sampler"];
  if (!s.is_object()) throw FieldError("sampler", "expected an object");
  const json& fam = require(s, "sampler", "family");
  if (!fam.is_string()) throw FieldError("sampler.family", "expected a string");
  auto family = parse_family(fam.get<std::string>());
  if (!family) throw FieldError("sampler.family", "unknown family '" + fam.get<std::string>() + "'");
  if (overrides.seed) s["seed"] = *overrides.seed;
  if (overrides.step_size) s["step_size"] = *overrides.step_size;
  if (overrides.jitter) s["jitter"] = *overrides.jitter;
  if (!s.contains("seed")) s["seed"] = std::uint64_t{0};
  setup.config.family = *family;
  setup.config.step_size = number_field(s, "sampler", "step_size", 0.01);
  setup.config.num_steps = unsigned_field(s, "sampler", "num_steps");
  setup.config.seed = unsigned_field(s, "sampler", "seed");
  setup.config.jitter = number_field(s, "sampler", "jitter", 0.0);
  if (setup.config.step_size < 0.0) throw FieldError("sampler.step_size", "must be non-negative");
  if (setup.config.jitter < 0.0) throw FieldError("sampler.jitter", "must be non-negative");
  if (s.contains("const_preconditioner")) {
    setup.config.const_preconditioner =
        matrix_field(s["const_preconditioner"], "sampler.const_preconditioner");
  }

  if (overrides.stride) cfg["snapshot_stride"] = *overrides.stride;
  setup.stride = unsigned_field(cfg, "", "snapshot_stride", 1);
  if (setup.stride < 1) throw FieldError("snapshot_stride", "must be positive");

  // target
  const json& t = require(cfg, "", "target");
  const json& type = require(t, "target", "type");
  if (!type.is_string()) throw FieldError("target.type", "expected a string");
  const std::string kind = type.get<std::string>();

  const json ens = cfg.contains("ensemble") ? cfg["ensemble"] : json::object();
  if (!ens.is_object()) throw FieldError("ensemble", "expected an object");
  const auto size = static_cast<Index>(unsigned_field(ens, "ensemble", "size"));
  if (size < 1) throw FieldError("ensemble.size", "must be positive");
  const std::uint64_t ens_seed =
      unsigned_field(ens, "ensemble", "seed", derive_seed(setup.config.seed, {kInitStream}));
  const double scale = number_field(ens, "ensemble", "scale", 1.0);

  Vector center;
  if (kind == "gaussian") {
    const Vector mean = vector_field(require(t, "target", "mean"), "target.mean");
    const Matrix precision = matrix_field(require(t, "target", "precision"), "target.precision");
    setup.problem.emplace(with_field("target.precision", [&] { return gaussian_target(mean, precision); }));
    center = mean;
  } else if (kind == "linear") {
    const Matrix g = matrix_field(require(t, "target", "forward"), "target.forward");
    const Vector obs = vector_field(require(t, "target", "obs"), "target.obs");
    const Vector offset = t.contains("offset") ? vector_field(t["offset"], "target.offset")
                                               : Vector::Zero(g.rows());
    const Matrix noise = matrix_field(require(t, "target", "noise_cov"), "target.noise_cov");
    const Vector mu0 = vector_field(require(t, "target", "prior_mean"), "target.prior_mean");
    const Matrix p0 =
        matrix_field(require(t, "target", "prior_precision"), "target.prior_precision");
    setup.problem.emplace(with_field("target", [&] {
      return linear_gaussian_problem(g, offset, noise, obs, mu0, p0);
    }));
    center = mu0;
  } else if (kind == "darcy") {
    const auto grid = static_cast<Index>(unsigned_field(t, "target", "grid_size", 50));
    const auto obs = static_cast<Index>(unsigned_field(t, "target", "obs_count", 10));
    const double noise_var = number_field(t, "target", "noise_var", 1e-4);
    const double mu = number_field(t, "target", "prior_mu", 100.0);
    const std::uint64_t dseed = unsigned_field(t, "target", "data_seed", 1);
    const bool adjoint = t.value("adjoint", true);
    darcy::DarcyModel model =
        with_field("target", [&] { return darcy::standard_model(grid, obs, noise_var, mu); });
    const Matrix precision = darcy::build_prior_precision(model);
    const darcy::TruthAndData data = darcy::make_truth_and_data(model, dseed);
    GaussianInverseProblem problem = darcy::make_inverse_problem(model, data.y_obs, precision);
    if (!adjoint) {
      problem = GaussianInverseProblem(problem.dim(), problem.forward_map(), problem.noise_cov(),
                                       problem.obs(), problem.prior_mean(),
                                       problem.prior_precision());
    }
    setup.problem.emplace(std::move(problem));
    setup.initial.emplace(darcy::sample_prior(model, precision, size, ens_seed));
  } else {
    throw FieldError("target.type", "unknown target type '" + kind + "'");
  }

  if (!setup.initial) {
    if (ens.contains("mean")) center = vector_field(ens["mean"], "ensemble.mean");
    if (center.size() != setup.problem->dim()) {
      throw FieldError("ensemble.mean", "length must match the target dimension");
    }
    RandomStream rng(ens_seed);
    Matrix states = scale * rng.standard_normal(center.size(), size);
    states.colwise() += center;
    setup.initial.emplace(std::move(states));
  }
  return setup;
}

}  // namespace

std::size_t BenchmarkPreset::num_steps() const {
  return static_cast<std::size_t>(std::llround(total_time / step_size));
}

std::size_t BenchmarkPreset::window_start_step() const {
  return static_cast<std::size_t>(std::llround(tau / step_size));
}

void BenchmarkPreset::validate() const {
  if (!(step_size > 0.0)) throw InvalidInput("step size must be positive");
  if (!(total_time > 0.0)) throw InvalidInput("total time must be positive");
  if (std::abs(static_cast<double>(num_steps()) * step_size - total_time) > 1e-9 * total_time) {
    throw InvalidInput("total time must be an integer multiple of the step size");
  }
  if (repetitions < 1) throw InvalidInput("repetitions must be at least 1");
  if (ensemble_sizes.empty()) throw InvalidInput("at least one ensemble size is required");
  for (Index n : ensemble_sizes) {
    if (n < 1) throw InvalidInput("ensemble sizes must be positive");
  }
  if (families.empty()) throw InvalidInput("at least one family is required");
  for (auto f : families) {
    if (f != SamplerFamily::aldi && f != SamplerFamily::eks &&
        f != SamplerFamily::aldi_gradient_free && f != SamplerFamily::eks_gradient_free) {
      throw InvalidInput("benchmark families are aldi, eks, aldi_gradient_free, eks_gradient_free");
    }
  }
  if (!(tau >= 0.0) || !(window > 0.0)) throw InvalidInput("window needs tau >= 0 and T > 0");
  if (tau + window > total_time * (1.0 + 1e-12)) {
    throw InvalidInput("metric window extends past the end of the run");
  }
  if (!(jitter >= 0.0)) throw InvalidInput("jitter must be non-negative");
}

std::optional<BenchmarkPreset> preset_by_name(const std::string& name) {
  BenchmarkPreset p;
  p.name = name;
  if (name == "default") return p;
  if (name == "gradient-free") {
    p.families = {SamplerFamily::aldi_gradient_free, SamplerFamily::eks_gradient_free};
    return p;
  }
  if (name == "smoke") {
    p.families = {SamplerFamily::aldi_gradient_free};
    p.ensemble_sizes = {25};
    p.repetitions = 1;
    return p;
  }
  return std::nullopt;
}

std::uint64_t data_seed(std::uint64_t base_seed) { return derive_seed(base_seed, {kDataStream}); }

std::uint64_t initial_seed(std::uint64_t base_seed, Index size, int repetition) {
  return derive_seed(base_seed, {kInitStream, static_cast<std::uint64_t>(size),
                                 static_cast<std::uint64_t>(repetition)});
}

std::uint64_t noise_seed(std::uint64_t base_seed, Index size, int repetition) {
  return derive_seed(base_seed, {kNoiseStream, static_cast<std::uint64_t>(size),
                                 static_cast<std::uint64_t>(repetition)});
}

std::string method_name(SamplerFamily family) {
  switch (family) {
    case SamplerFamily::aldi:
    case SamplerFamily::aldi_gradient_free:
      return "aldi";
    case SamplerFamily::eks:
    case SamplerFamily::eks_gradient_free:
      return "eks";
    default:
      return std::string(to_string(family));
  }
}

std::string gradient_mode(SamplerFamily family) {
  return is_gradient_free(family) ? "gradient_free" : "gradient";
}

std::string table_label(SamplerFamily family) {
  std::string method = method_name(family);
  for (auto& c : method) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return (is_gradient_free(family) ? "gf-" : "g-") + method;
}

MetricRow run_benchmark_cell(const BenchmarkPreset& preset, SamplerFamily family, Index size,
                             int repetition) {
  preset.validate();
  const BenchmarkContext ctx(preset);
  return run_cell(ctx, preset, family, size, repetition);
}

double aggregate(const std::vector<MetricRow>& rows, SamplerFamily family, Index size,
                 bool use_bias) {
  double total = 0.0;
  int count = 0;
  for (const auto& r : rows) {
    if (r.family == family && r.size == size) {
      total += use_bias ? r.bias : r.spread;
      ++count;
    }
  }
  return count > 0 ? total / count : std::nan("");
}

int cmd_darcy(const BenchmarkPreset& preset, const fs::path& out_dir, std::ostream& log,
              std::vector<MetricRow>* rows_out) {
  try {
    preset.validate();
  } catch (const InvalidInput& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    log << "error: cannot create " << out_dir << ": " << ec.message() << '\n';
    return kConfigError;
  }
  fs::remove(out_dir / "FAILED", ec);

  const BenchmarkContext ctx(preset);
  const json config = preset_to_json(preset);
  const std::string config_line = "# config: " + config.dump() + "\n";

  json manifest = config;
  manifest["model"] = {{"grid_size", ctx.model.grid_size},
                       {"obs_count", ctx.model.obs_count},
                       {"noise_var", ctx.model.noise_var},
                       {"prior_mu", ctx.model.prior_mu},
                       {"initial_ensemble", "prior samples"}};
  manifest["data_seed"] = data_seed(preset.base_seed);
  manifest["y_obs"] = std::vector<double>(ctx.data.y_obs.data(),
                                          ctx.data.y_obs.data() + ctx.data.y_obs.size());
  json cells = json::array();
  for (Index n : preset.ensemble_sizes) {
    for (int rep = 0; rep < preset.repetitions; ++rep) {
      cells.push_back({{"N", n},
                       {"repetition", rep},
                       {"initial_seed", initial_seed(preset.base_seed, n, rep)},
                       {"noise_seed", noise_seed(preset.base_seed, n, rep)}});
    }
  }
  manifest["cells"] = cells;
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");

  std::ofstream metrics(out_dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  metrics << config_line << "family,gradient_mode,N,repetition,bias,spread,seed\n";
  metrics.flush();

  std::vector<MetricRow> rows;
  for (Index n : preset.ensemble_sizes) {
    for (int rep = 0; rep < preset.repetitions; ++rep) {
      for (SamplerFamily family : preset.families) {
        try {
          const MetricRow row = run_cell(ctx, preset, family, n, rep);
          rows.push_back(row);
          metrics << metric_row_csv(row);
          metrics.flush();
          log << table_label(family) << " N=" << n << " rep=" << rep << " bias=" << fmt(row.bias)
              << " spread=" << fmt(row.spread) << '\n';
        } catch (const std::exception& e) {
          const std::string msg = "run aborted: " + table_label(family) + " N=" +
                                  std::to_string(n) + " rep=" + std::to_string(rep) + ": " +
                                  e.what() + "\n";
          log << "error: " << msg;
          write_file_atomic(out_dir / "FAILED", msg);
          if (rows_out) *rows_out = rows;
          return kRunAborted;
        }
      }
    }
  }
  write_file_atomic(out_dir / "table_bias.csv", table_csv(preset, rows, true, config_line));
  write_file_atomic(out_dir / "table_spread.csv", table_csv(preset, rows, false, config_line));
  if (rows_out) *rows_out = std::move(rows);
  return kOk;
}

int cmd_sample(const fs::path& config_path, const SampleOverrides& overrides,
               const fs::path& out_dir, std::ostream& log) {
  std::ifstream in(config_path);
  if (!in) {
    log << "error: cannot open config " << config_path << '\n';
    return kConfigError;
  }
  json cfg;
  SampleSetup setup;
  try {
    cfg = json::parse(in);
    setup = parse_sample_config(cfg, overrides);
  } catch (const json::parse_error& e) {
    log << "error: config parse error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FieldError& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    log << "error: config: " << e.what() << '\n';
    return kConfigError;
  }

  RunRecord record;
  try {
    record = run(*setup.initial, setup.config, *setup.problem, setup.stride);
  } catch (const ConfigError& e) {
    log << "error: incompatible configuration: " << e.what() << '\n';
    return kIncompatible;
  } catch (const InvalidInput& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    log << "error: run aborted: " << e.what() << '\n';
    return kRunAborted;
  }
  for (const auto& w : record.warnings) log << "warning: " << w << '\n';

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    log << "error: cannot create " << out_dir << ": " << ec.message() << '\n';
    return kConfigError;
  }
  const std::string config_line = "# config: " + cfg.dump() + "\n";
  std::ostringstream traj;
  traj << config_line << "step,particle,component,value\n";
  for (const auto& snap : record.snapshots) {
    const Matrix& u = snap.ensemble.states();
    for (Index i = 0; i < u.cols(); ++i) {
      for (Index c = 0; c < u.rows(); ++c) {
        traj << snap.step << ',' << i << ',' << c << ',' << fmt(u(c, i)) << '\n';
      }
    }
  }
  write_file_atomic(out_dir / "trajectory.csv", traj.str());

  std::ostringstream eig;
  eig << config_line << "time,min_eigenvalue\n";
  for (const auto& [t, v] : record.min_eig_series) eig << fmt(t) << ',' << fmt(v) << '\n';
  write_file_atomic(out_dir / "min_eig.csv", eig.str());
  log << "wrote " << record.snapshots.size() << " snapshots to " << out_dir.string() << '\n';
  return kOk;
}

int cmd_check(const fs::path& out_dir, std::ostream& log, const CheckFixture& fixture) {
  const std::vector<CheckResult> results = run_property_checks(fixture);
  std::ostringstream report;
  report << "# fixture: flip_correction_sign=" << fixture.flip_correction_sign
         << " symmetric_root=" << fixture.symmetric_root << '\n';
  bool all = true;
  for (const auto& r : results) {
    report << (r.passed ? "PASS " : "FAIL ") << r.name << " measured=" << fmt(r.measured)
           << " band=" << r.band << '\n';
    all = all && r.passed;
  }
  log << report.str();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    log << "error: cannot create " << out_dir << ": " << ec.message() << '\n';
    return kConfigError;
  }
  write_file_atomic(out_dir / "check_report.txt", report.str());
  if (!all) {
    log << "failed properties:";
    for (const auto& r : results) {
      if (!r.passed) log << ' ' << r.name;
    }
    log << '\n';
  }
  return all ? kOk : kCheckFailed;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Affine-invariant interacting Langevin samplers"};
  app.require_subcommand(1);

  // darcy
  auto* darcy_cmd = app.add_subcommand("darcy", "Run the Darcy-flow bias/spread benchmark grid");
  std::string preset_name = "default";
  std::string darcy_out = "darcy_out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> families;
  std::vector<Index> sizes;
  std::optional<int> reps;
  std::optional<double> dt, t_end, tau, window, jitter;
  std::size_t stride = 1;
  darcy_cmd->add_option("--preset", preset_name, "default | gradient-free | smoke");
  darcy_cmd->add_option("--out", darcy_out, "Output directory");
  darcy_cmd->add_option("--seed", seed, "Base seed");
  darcy_cmd->add_option("--families", families, "Comma-separated families")->delimiter(',');
  darcy_cmd->add_option("--sizes", sizes, "Comma-separated ensemble sizes")->delimiter(',');
  darcy_cmd->add_option("--reps", reps, "Repetitions per cell");
  darcy_cmd->add_option("--dt", dt, "Step size");
  darcy_cmd->add_option("--t-end", t_end, "Final time");
  darcy_cmd->add_option("--tau", tau, "Metric window start");
  darcy_cmd->add_option("--window", window, "Metric window length T");
  darcy_cmd->add_option("--stride", stride, "Snapshot stride (must be 1 for the benchmark)");
  darcy_cmd->add_option("--jitter", jitter, "Covariance jitter");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Run one sampler from a JSON config");
  std::string config_path;
  std::string sample_out = "sample_out";
  SampleOverrides overrides;
  sample_cmd->add_option("--config", config_path, "JSON config file")->required();
  sample_cmd->add_option("--out", sample_out, "Output directory");
  sample_cmd->add_option("--seed", overrides.seed, "Sampler seed");
  sample_cmd->add_option("--dt", overrides.step_size, "Step size");
  sample_cmd->add_option("--stride", overrides.stride, "Snapshot stride");
  sample_cmd->add_option("--jitter", overrides.jitter, "Covariance jitter");

  // check
  auto* check_cmd = app.add_subcommand("check", "Run the property suite");
  std::string check_out = "check_out";
  std::string mutate;
  check_cmd->add_option("--out", check_out, "Output directory");
  check_cmd->add_option("--mutate", mutate, "Inject a defect: flip-correction | symmetric-root")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*darcy_cmd) {
      auto preset = preset_by_name(preset_name);
      if (!preset) {
        std::cerr << "error: unknown preset '" << preset_name << "'\n";
        return kConfigError;
      }
      if (stride != 1) {
        std::cerr << "error: the benchmark metrics need snapshot stride 1\n";
        return kConfigError;
      }
      if (seed) preset->base_seed = *seed;
      if (!families.empty()) {
        preset->families.clear();
        for (const auto& f : families) {
          auto parsed = parse_family(f);
          if (!parsed) {
            std::cerr << "error: --families: unknown family '" << f << "'\n";
            return kConfigError;
          }
          preset->families.push_back(*parsed);
        }
      }
      if (!sizes.empty()) preset->ensemble_sizes = sizes;
      if (reps) preset->repetitions = *reps;
      if (dt) preset->step_size = *dt;
      if (t_end) preset->total_time = *t_end;
      if (tau) preset->tau = *tau;
      if (window) preset->window = *window;
      if (jitter) preset->jitter = *jitter;
      return cmd_darcy(*preset, darcy_out, std::cerr);
    }
    if (*sample_cmd) return cmd_sample(config_path, overrides, sample_out, std::cerr);
    if (*check_cmd) {
      CheckFixture fixture;
      if (mutate == "flip-correction") {
        fixture.flip_correction_sign = true;
      } else if (mutate == "symmetric-root") {
        fixture.symmetric_root = true;
      } else if (!mutate.empty()) {
        std::cerr << "error: unknown mutation '" << mutate << "'\n";
        return kConfigError;
      }
      return cmd_check(check_out, std::cerr, fixture);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunAborted;
  }
  return kOk;
}

}  // namespace aldi::cli
