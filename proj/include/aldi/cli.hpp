#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aldi/checks.hpp"
#include "aldi/samplers.hpp"

namespace aldi::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kIncompatible = 3,
  kRunAborted = 4,
};

/// Grid of Darcy benchmark runs: families x ensemble sizes x repetitions.
struct BenchmarkPreset {
  std::string name = "default";
  std::vector<Index> ensemble_sizes{25, 52, 100, 200};
  std::vector<SamplerFamily> families{SamplerFamily::aldi, SamplerFamily::eks,
                                      SamplerFamily::aldi_gradient_free,
                                      SamplerFamily::eks_gradient_free};
  int repetitions = 10;
  double step_size = 0.01;
  double total_time = 20.0;
  double tau = 12.0;
  double window = 8.0;
  std::uint64_t base_seed = 20190101;
  double jitter = 0.0;

  /// round(total_time / step_size); validate() rejects a mismatch.
  std::size_t num_steps() const;
  /// First step of the metric window, round(tau / step_size).
  std::size_t window_start_step() const;
  void validate() const;
};

/// "default" (full grid), "gradient-free" (gf families only) or "smoke"
/// (N=25, one repetition, gf-ALDI). Returns nullopt for unknown names.
std::optional<BenchmarkPreset> preset_by_name(const std::string& name);

/// Seeds of one benchmark cell. Pure functions of the base seed and the grid
/// indices; every family at the same (N, repetition) shares them.
std::uint64_t data_seed(std::uint64_t base_seed);
std::uint64_t initial_seed(std::uint64_t base_seed, Index size, int repetition);
std::uint64_t noise_seed(std::uint64_t base_seed, Index size, int repetition);

struct MetricRow {
  SamplerFamily family;
  Index size;
  int repetition;
  double bias;
  double spread;
  std::uint64_t seed;
};

/// "aldi"/"eks" and "gradient"/"gradient_free" for the CSV columns.
std::string method_name(SamplerFamily family);
std::string gradient_mode(SamplerFamily family);
/// Table column label: g-ALDI, gf-EKS, ...
std::string table_label(SamplerFamily family);

/// Runs one grid cell.
MetricRow run_benchmark_cell(const BenchmarkPreset& preset, SamplerFamily family, Index size,
                             int repetition);

/// Arithmetic mean over repetitions for (family, N).
double aggregate(const std::vector<MetricRow>& rows, SamplerFamily family, Index size,
                 bool use_bias);

/// Runs the grid, writing metrics.csv, table_bias.csv, table_spread.csv and
/// manifest.json into out_dir. On an aborted run, keeps the completed rows
/// and writes FAILED with the diagnostic.
int cmd_darcy(const BenchmarkPreset& preset, const std::filesystem::path& out_dir,
              std::ostream& log, std::vector<MetricRow>* rows_out = nullptr);

struct SampleOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> step_size;
  std::optional<std::size_t> stride;
  std::optional<double> jitter;
};

/// Runs the sampler described by a JSON config file and writes
/// trajectory.csv and min_eig.csv into out_dir.
int cmd_sample(const std::filesystem::path& config_path, const SampleOverrides& overrides,
               const std::filesystem::path& out_dir, std::ostream& log);

/// Runs the property suite and writes check_report.txt into out_dir.
int cmd_check(const std::filesystem::path& out_dir, std::ostream& log,
              const CheckFixture& fixture = {});

/// Full command-line entry point.
int run_cli(int argc, char** argv);

}  // namespace aldi::cli
