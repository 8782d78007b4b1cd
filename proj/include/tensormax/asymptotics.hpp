#pragma once

#include <cstddef>
#include <string_view>

#include <json.hpp>

#include "tensormax/error.hpp"

namespace tmax {

enum class Sided { Two, One };

std::string_view sided_name(Sided s) noexcept;
Sided parse_sided(std::string_view name);  // "two" / "one"

inline constexpr int kMaxOrder = 20;  // m! stays exact in double up to 20!

/// log(m! * sqrt(m*pi)), computed with lgamma.
double log_norm_constant(int m);

/// Gumbel-type limit law exp(-c e^{-z/2}) of the normalized maximum.
/// c = 1/(m! sqrt(m pi)) for |.| (two-sided) and half that for the signed maximum.
class GumbelLimit {
 public:
  GumbelLimit(int m, Sided sided);

  int m() const noexcept { return m_; }
  Sided sided() const noexcept { return sided_; }
  double rate() const noexcept { return rate_; }

  double cdf(double z) const noexcept;
  /// 1 - cdf(z) evaluated without cancellation.
  double sf(double z) const noexcept;
  /// Closed-form inverse; q must lie in (0, 1).
  double quantile(double q) const;

 private:
  int m_;
  Sided sided_;
  double rate_;
};

/// T = w^2 - 2m log p + log log p (natural logs).
struct NormalizedStat {
  double t_value = 0.0;
  double w = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  int m = 0;
};

void to_json(nlohmann::json& j, const NormalizedStat& s);

/// Throws DomainError for p < 3.
double normalized_value(double w, double p, int m);
NormalizedStat normalize(double w, std::size_t n, std::size_t p, int m);

/// Tail level [log p - (log log p + 2 log(m! sqrt(m pi)) - z) / (2m)]^{1/2}.
/// P(W <= sqrt(2m) nu_p) approaches exp(-e^{-z/2}). Throws DomainError
/// when the radicand is not positive.
double nu_p(double z, double p, int m);

/// Poisson intensity limit e^{-z/2}.
double lambda_limit(double z) noexcept;

/// In-probability limit sqrt(2m) of W / sqrt(log p).
double ratio_target(int m);

}  // namespace tmax
