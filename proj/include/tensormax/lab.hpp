#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tensormax/asymptotics.hpp"
#include "tensormax/populations.hpp"

namespace tmax {

struct Cell {
  std::size_t n = 0;
  std::size_t p = 0;
  int m = 2;
  PopulationSpec spec;
  Sided sided = Sided::Two;

  bool operator==(const Cell&) const = default;
};

/// 101 points on [-6, 12].
std::vector<double> default_z_grid();

inline constexpr double kDefaultTotalBudget = 1e13;

struct ExperimentConfig {
  std::vector<Cell> grid;
  std::uint64_t reps = 0;  // per cell
  std::uint64_t master_seed = 0;
  std::vector<double> z_grid = default_z_grid();
  std::string output_path;
  unsigned workers = 1;                // 0 = all cores; does not affect results
  double cost_ceiling = 1e10;          // multiply-adds per replicate
  double total_budget = kDefaultTotalBudget;  // multiply-adds over the whole run

  /// Throws ParameterError/DimensionError naming the offending field, or
  /// BudgetError when the estimated total cost is over budget.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct ReplicateRecord {
  std::size_t cell_id = 0;
  std::uint64_t replicate = 0;
  double w_abs = 0.0;
  double w_signed = 0.0;
  double t_value = 0.0;  // w_abs^2 - 2m log p + log log p
  double ratio = 0.0;    // w_abs / sqrt(log p)

  bool operator==(const ReplicateRecord&) const = default;
};

struct LevelRate {
  double level = 0.0;
  double rejection_rate = 0.0;
  bool operator==(const LevelRate&) const = default;
};

struct CellSummary {
  std::size_t cell_id = 0;
  Cell cell;
  std::vector<double> ecdf;  // empirical CDF of the normalized statistic on z_grid
  double ks_distance = 0.0;
  std::vector<LevelRate> type1;
  double ratio_mean = 0.0;
  double ratio_sd = 0.0;
  double runtime_seconds = 0.0;

  bool operator==(const CellSummary&) const = default;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellSummary> cells;
  std::vector<ReplicateRecord> records;  // sorted by (cell_id, replicate)

  bool operator==(const ExperimentReport&) const = default;
};

/// Exact one-sample Kolmogorov-Smirnov statistic against `limit`.
/// Samples equal to -inf are treated as lying below every z.
double ks_distance(std::span<const double> samples, const GumbelLimit& limit);

/// Replicate r of every cell draws its matrix from stream r of master_seed.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Summary as persisted in summary.json (config plus per-cell results, no timings).
nlohmann::json summary_json(const ExperimentReport& report);

/// Writes <dir>/records.csv, <dir>/summary.json and <dir>/timing.json.
/// records.csv and summary.json are byte-identical for equal (config, seed).
void persist(const ExperimentReport& report, const std::filesystem::path& dir);
ExperimentReport load(const std::filesystem::path& dir);

}  // namespace tmax
