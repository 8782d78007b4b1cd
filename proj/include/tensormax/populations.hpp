#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <json.hpp>

#include "tensormax/error.hpp"

namespace tmax {

enum class Family {
  StandardNormal,
  Rademacher,
  UniformScaled,        // sqrt(3) * U(-1, 1)
  CenteredExponential,  // Exp(1) - 1
  StudentTStandardized  // t_df / sqrt(df / (df - 2)), heavy tails
};

std::string_view family_name(Family f) noexcept;
Family parse_family(std::string_view name);

/// A standardized (mean 0, variance 1) distribution family.
struct PopulationSpec {
  Family family = Family::StandardNormal;
  int df = 0;  // StudentTStandardized only
  std::string label;

  static PopulationSpec standard_normal() { return {Family::StandardNormal, 0, "StandardNormal"}; }
  static PopulationSpec rademacher() { return {Family::Rademacher, 0, "Rademacher"}; }
  static PopulationSpec uniform_scaled() { return {Family::UniformScaled, 0, "UniformScaled"}; }
  static PopulationSpec centered_exponential() {
    return {Family::CenteredExponential, 0, "CenteredExponential"};
  }
  static PopulationSpec student_t(int df);

  /// Throws ParameterError for df <= 2 on the Student family.
  void validate() const;

  /// Analytic moments; always 0 and 1 for a valid spec.
  double mean() const noexcept { return 0.0; }
  double variance() const noexcept { return 1.0; }

  bool operator==(const PopulationSpec& o) const noexcept {
    return family == o.family && (family != Family::StudentTStandardized || df == o.df);
  }
};

void to_json(nlohmann::json& j, const PopulationSpec& spec);
void from_json(const nlohmann::json& j, PopulationSpec& spec);

/// Calls fn(sampler) with a callable `sampler(engine) -> double` for the
/// family of `spec`. Hoists the family dispatch out of inner sampling loops.
template <class Fn>
decltype(auto) visit_sampler(const PopulationSpec& spec, Fn&& fn) {
  switch (spec.family) {
    case Family::StandardNormal:
      return fn([d = boost::random::normal_distribution<double>(0.0, 1.0)](auto& g) mutable { return d(g); });
    case Family::Rademacher:
      return fn([](auto& g) { return (g() >> 63) != 0 ? 1.0 : -1.0; });
    case Family::UniformScaled:
      return fn([](auto& g) {
        return std::numbers::sqrt3 * (2.0 * boost::random::uniform_01<double>()(g) - 1.0);
      });
    case Family::CenteredExponential:
      return fn([d = boost::random::exponential_distribution<double>(1.0)](auto& g) mutable { return d(g) - 1.0; });
    case Family::StudentTStandardized: {
      const double df = spec.df;
      const double scale = std::sqrt(df / (df - 2.0));
      return fn([d = boost::random::student_t_distribution<double>(df), scale](auto& g) mutable {
        return d(g) / scale;
      });
    }
  }
  throw ParameterError("unknown population family");
}

/// Draws one standardized variate from `spec` using engine `g`.
template <class Engine>
double draw(const PopulationSpec& spec, Engine& g) {
  return visit_sampler(spec, [&](auto sampler) { return sampler(g); });
}

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  bool operator==(const SeedSpec&) const = default;
};

void to_json(nlohmann::json& j, const SeedSpec& seed);
void from_json(const nlohmann::json& j, SeedSpec& seed);

/// n x p real matrix, rows are observations. Values are stored column-major
/// so that each coordinate's n observations are contiguous.
class DataMatrix {
 public:
  DataMatrix() = default;
  DataMatrix(std::size_t n, std::size_t p);  // zero-filled

  /// Builds from row-major values; throws DimensionError on a size mismatch
  /// and ParameterError on non-finite entries.
  static DataMatrix from_rows(std::size_t n, std::size_t p, std::span<const double> row_major);
  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }

  double operator()(std::size_t row, std::size_t col) const noexcept { return values_[col * n_ + row]; }
  double& operator()(std::size_t row, std::size_t col) noexcept { return values_[col * n_ + row]; }

  std::span<const double> column(std::size_t col) const noexcept {
    return {values_.data() + col * n_, n_};
  }
  std::span<double> column(std::size_t col) noexcept { return {values_.data() + col * n_, n_}; }

  std::vector<double> row_major() const;

  bool operator==(const DataMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> values_;
};

/// n x p i.i.d. draws. The value at (row, col) is a pure function of
/// (spec, seed.master_seed, seed.stream_id, row, col), so the result does
/// not depend on `workers`.
DataMatrix sample_matrix(const PopulationSpec& spec, std::size_t n, std::size_t p, SeedSpec seed,
                         unsigned workers = 1);

/// Moment assumptions of the two limit theorems. `alpha` and `t0` describe
/// E exp(t0 |x|^alpha) < inf; `growth_exponent` is the exponent of p = O(n^a).
struct AssumptionProfile {
  double alpha = 1.0;
  double t0 = 1.0;
  double growth_exponent = 1.0;

  double beta(int m) const noexcept { return alpha / (2.0 * m - alpha); }
  double tau1(int m) const noexcept { return 4.0 * m * growth_exponent + 2.0; }
  double tau2(int m) const noexcept { return 2.0 * m * growth_exponent + 1.5; }
};

enum class Regime { UltraHigh, Polynomial, Outside };

std::string_view regime_name(Regime r) noexcept;

struct RegimeReport {
  Regime regime = Regime::Outside;
  bool ultra_high = false;  // log p <= n^beta
  bool polynomial = false;  // p <= n^growth_exponent
  double log_p = 0.0;
  double n_pow_beta = 0.0;
  double n_pow_growth = 0.0;
  double beta = 0.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
};

void to_json(nlohmann::json& j, const RegimeReport& r);

/// Advisory classification; never throws for positive dimensions.
RegimeReport check_regime(std::size_t n, double p, int m, const AssumptionProfile& profile);

}  // namespace tmax
