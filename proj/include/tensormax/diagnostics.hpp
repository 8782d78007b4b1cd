#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>

#include <json.hpp>

#include "tensormax/populations.hpp"

namespace tmax {

/// Monte Carlo proportion with its binomial standard error.
struct TailEstimate {
  double probability = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t reps = 0;
  double std_error = 0.0;

  static TailEstimate from_counts(std::uint64_t hits, std::uint64_t reps);
  bool operator==(const TailEstimate&) const = default;
};

void to_json(nlohmann::json& j, const TailEstimate& t);

/// 1 - Phi(x) through erfc; no cancellation for large x.
double gaussian_upper_tail(double x) noexcept;

/// Two-sided P(|sum_{k<=n} psi_k| / sqrt(n) > threshold) where psi_k is a
/// product of m i.i.d. draws from `spec`. Replicate r uses the stream
/// (seed.master_seed, seed.stream_id, r), so equal seeds give common random
/// numbers across thresholds. threshold == 0 returns probability 1 without sampling.
TailEstimate estimate_single_tail(const PopulationSpec& spec, std::size_t n, int m, double threshold,
                                  std::uint64_t reps, SeedSpec seed, unsigned workers = 1);

struct LambdaEstimate {
  double z = 0.0;
  double nu = 0.0;
  double threshold = 0.0;  // sqrt(2m) * nu_p
  TailEstimate single_tail;
  double lambda_hat = 0.0;    // C(p, m) * single-tail probability
  double lambda_limit = 0.0;  // e^{-z/2}
  double expected_hits = 0.0; // Gaussian approximation, reps * P(|N| > threshold)
  bool low_hits = false;      // expected_hits < 50
  double c_n = 0.0;           // sqrt(2m / log n) * nu_p
  std::size_t n = 0;
  std::size_t p = 0;
  int m = 0;
};

void to_json(nlohmann::json& j, const LambdaEstimate& e);

LambdaEstimate estimate_lambda(double z, std::size_t n, std::size_t p, int m, const PopulationSpec& spec,
                               std::uint64_t reps, SeedSpec seed, unsigned workers = 1);

/// Counting bound C(p,m) * m^2 * p^{m-1} * single_tail^2 on the Stein-Chen b1 term.
double b1_bound(std::size_t p, int m, double single_tail);

/// Joint tail of two tuple sums sharing s indices:
/// P(|sum xi*eta| >= a_n sqrt(n log p), |sum xi*zeta| >= a_n sqrt(n log p)),
/// xi = prod of s draws, eta = prod of m - s draws, zeta = prod of m - s further draws.
struct PairTailSpec {
  int s = 1;
  double a_n = 1.0;
  std::size_t n = 0;
  double p = 0.0;  // only enters through log p
  int m = 2;
  PopulationSpec spec;
};

TailEstimate estimate_pair_tail(const PairTailSpec& spec, std::uint64_t reps, SeedSpec seed,
                                unsigned workers = 1);

/// One-sided P(S_n / sqrt(n) >= x) against 1 - Phi(x).
struct MdrReport {
  double x = 0.0;
  TailEstimate p_hat;
  double gaussian_tail = 0.0;
  double ratio = 0.0;
  double ratio_se = 0.0;
  double expected_hits = 0.0;
  bool low_hits = false;  // expected_hits < 10
};

void to_json(nlohmann::json& j, const MdrReport& r);

MdrReport moderate_deviation_ratio(const PopulationSpec& spec, int m, std::size_t n, double x,
                                   std::uint64_t reps, SeedSpec seed, unsigned workers = 1);

/// Lambda, b1 and pair-tail estimates at one threshold, with the counting
/// bound on b2 and the analytic decay rates of the pair tail.
struct SteinChenReport {
  double z = 0.0;
  double lambda_hat = 0.0;
  double lambda_limit = 0.0;
  double b1_bound = 0.0;
  double b2_bound = 0.0;  // C(p,m) * sum_s m^s p^{m-s} * psi_s
  double b3 = 0.0;        // vanishes: X_alpha is independent of tuples sharing no index
  double a_n = 0.0;
  std::map<int, TailEstimate> psi_estimates;  // keyed by shared index count s
  double rate_subexponential = 0.0;  // p^{-a^2} with a = a_n
  double rate_polynomial = 0.0;      // p^{-2m}
  std::size_t n = 0;
  std::size_t p = 0;
  int m = 0;
};

void to_json(nlohmann::json& j, const SteinChenReport& r);

/// a_n defaults to sqrt(2m) nu_p / sqrt(log p), where the pair tail is rarely observable.
SteinChenReport stein_chen_report(double z, std::size_t n, std::size_t p, int m, const PopulationSpec& spec,
                                  std::uint64_t reps, SeedSpec seed, unsigned workers = 1,
                                  std::optional<double> a_n = std::nullopt);

}  // namespace tmax
