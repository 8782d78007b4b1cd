#include "tensormax/hypotest.hpp"

#include <cmath>
#include <string>

namespace tmax {

void to_json(nlohmann::json& j, const TestResult& r) {
  nlohmann::json decisions = nlohmann::json::object();
  for (const auto& d : r.decisions) {
    char key[16];
    std::snprintf(key, sizeof key, "%.2f", d.level);
    decisions[key] = d.reject ? "reject" : "accept";
  }
  j = nlohmann::json{{"stat", r.stat},
                     {"sided", std::string(sided_name(r.sided))},
                     {"t_value", r.t_defined ? nlohmann::json(r.t_value) : nlohmann::json(nullptr)},
                     {"t_defined", r.t_defined},
                     {"p_value", r.p_value},
                     {"decisions", decisions},
                     {"regime", r.regime}};
}

double asymptotic_p_value(double w, std::size_t p, int m, Sided sided) {
  const GumbelLimit limit(m, sided);
  return limit.sf(normalized_value(w, static_cast<double>(p), m));
}

namespace {

TestResult decide(StatResult stat, Sided sided, const TestOptions& opts) {
  const int m = static_cast<int>(stat.m);
  if (stat.p < 3) throw DomainError("p must be >= 3 for the asymptotic test (got " + std::to_string(stat.p) + ")");
  TestResult r;
  r.sided = sided;
  const double w = sided == Sided::Two ? stat.w_abs : stat.w_signed;
  if (sided == Sided::One && !(w > 0.0)) {
    r.t_defined = false;
    r.p_value = 1.0;
  } else {
    r.t_value = normalized_value(w, static_cast<double>(stat.p), m);
    r.p_value = GumbelLimit(m, sided).sf(r.t_value);
  }
  for (std::size_t i = 0; i < kDecisionLevels.size(); ++i) {
    r.decisions[i] = {kDecisionLevels[i], r.p_value < kDecisionLevels[i]};
  }
  r.regime = check_regime(stat.n, static_cast<double>(stat.p), m, opts.profile);
  r.stat = std::move(stat);
  return r;
}

void check_test_shape(const DataMatrix& x, int m) {
  if (x.p() < 3) throw DomainError("p must be >= 3 for the asymptotic test (got " + std::to_string(x.p()) + ")");
  if (m < 2 || m > kMaxOrder) {
    throw DimensionError("tensor order m must be in [2, " + std::to_string(kMaxOrder) + "] (got " +
                         std::to_string(m) + ")");
  }
}

}  // namespace

TestResult test_independence(const DataMatrix& x, int m, Sided sided, const TestOptions& opts) {
  check_test_shape(x, m);
  return decide(max_entry(x, static_cast<std::size_t>(m), opts.enumeration), sided, opts);
}

TestResult test_independence_multi(std::span<const DataMatrix> matrices, Sided sided,
                                   const TestOptions& opts) {
  if (matrices.empty()) throw DimensionError("no populations given");
  check_test_shape(matrices.front(), static_cast<int>(matrices.size()));
  return decide(max_entry_multi(matrices, opts.enumeration), sided, opts);
}

DataMatrix studentize(const DataMatrix& x) {
  const std::size_t n = x.n();
  if (n < 2) throw DimensionError("studentize needs at least 2 rows");
  DataMatrix out = x;
  for (std::size_t i = 0; i < x.p(); ++i) {
    auto col = out.column(i);
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw ParameterError("column " + std::to_string(i + 1) + " is constant; cannot studentize");
    for (double& v : col) v = (v - mean) / sd;
  }
  return out;
}

}  // namespace tmax
