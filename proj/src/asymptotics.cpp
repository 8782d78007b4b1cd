#include "tensormax/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tensormax/error.hpp"

namespace tmax {

namespace {

void check_order(int m) {
  if (m < 2 || m > kMaxOrder) {
    throw ParameterError("tensor order m must be in [2, " + std::to_string(kMaxOrder) + "] (got " +
                         std::to_string(m) + ")");
  }
}

double factorial(int m) {
  double f = 1.0;
  for (int j = 2; j <= m; ++j) f *= j;
  return f;
}

}  // namespace

std::string_view sided_name(Sided s) noexcept { return s == Sided::Two ? "two" : "one"; }

Sided parse_sided(std::string_view name) {
  if (name == "two") return Sided::Two;
  if (name == "one") return Sided::One;
  throw ParameterError("sided must be 'two' or 'one' (got '" + std::string(name) + "')");
}

double log_norm_constant(int m) {
  check_order(m);
  return std::lgamma(m + 1.0) + 0.5 * std::log(m * std::numbers::pi);
}

GumbelLimit::GumbelLimit(int m, Sided sided) : m_(m), sided_(sided) {
  check_order(m);
  const double two_sided = 1.0 / (factorial(m) * std::sqrt(m * std::numbers::pi));
  rate_ = sided == Sided::Two ? two_sided : two_sided / 2.0;
}

double GumbelLimit::cdf(double z) const noexcept { return std::exp(-rate_ * lambda_limit(z)); }

double GumbelLimit::sf(double z) const noexcept { return -std::expm1(-rate_ * lambda_limit(z)); }

double GumbelLimit::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("quantile level must lie in (0, 1) (got " + std::to_string(q) + ")");
  }
  return -2.0 * std::log(-std::log(q) / rate_);
}

void to_json(nlohmann::json& j, const NormalizedStat& s) {
  j = nlohmann::json{{"t_value", s.t_value}, {"w", s.w}, {"n", s.n}, {"p", s.p}, {"m", s.m}};
}

double normalized_value(double w, double p, int m) {
  if (!(p >= 3.0)) {
    throw DomainError("p must be >= 3 so that log log p > 0 (got " + std::to_string(p) + ")");
  }
  const double log_p = std::log(p);
  return w * w - 2.0 * m * log_p + std::log(log_p);
}

NormalizedStat normalize(double w, std::size_t n, std::size_t p, int m) {
  return {normalized_value(w, static_cast<double>(p), m), w, n, p, m};
}

double nu_p(double z, double p, int m) {
  if (!(p >= 3.0)) {
    throw DomainError("p must be >= 3 so that log log p > 0 (got " + std::to_string(p) + ")");
  }
  const double log_p = std::log(p);
  const double radicand = log_p - (std::log(log_p) + 2.0 * log_norm_constant(m) - z) / (2.0 * m);
  if (!(radicand > 0.0)) {
    throw DomainError("nu_p radicand is not positive (" + std::to_string(radicand) + ") for z=" +
                      std::to_string(z) + ", p=" + std::to_string(p) + ", m=" + std::to_string(m));
  }
  return std::sqrt(radicand);
}

double lambda_limit(double z) noexcept { return std::exp(-z / 2.0); }

double ratio_target(int m) {
  if (m < 2) throw ParameterError("tensor order m must be >= 2 (got " + std::to_string(m) + ")");
  return std::sqrt(2.0 * m);
}

}  // namespace tmax
