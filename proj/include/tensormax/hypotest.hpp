#pragma once

#include <array>
#include <span>

#include <json.hpp>

#include "tensormax/asymptotics.hpp"
#include "tensormax/populations.hpp"
#include "tensormax/statcore.hpp"

namespace tmax {

inline constexpr std::array<double, 3> kDecisionLevels{0.01, 0.05, 0.10};

struct Decision {
  double level = 0.0;
  bool reject = false;
};

/// Asymptotic test of coordinate independence built on the largest tensor entry.
struct TestResult {
  StatResult stat;
  Sided sided = Sided::Two;
  double t_value = 0.0;
  // One-sided only: false when the signed maximum is <= 0, in which case
  // t_value is not computed and p_value is 1.
  bool t_defined = true;
  double p_value = 1.0;
  std::array<Decision, 3> decisions{};
  RegimeReport regime;
};

void to_json(nlohmann::json& j, const TestResult& r);

struct TestOptions {
  EnumerationOptions enumeration;
  AssumptionProfile profile;  // only used for the advisory regime report
};

/// p-value for an observed statistic w (W_n, or W~_n when one-sided).
/// Strictly decreasing in w wherever it is representable.
double asymptotic_p_value(double w, std::size_t p, int m, Sided sided);

/// Expects standardized coordinates (mean 0, variance 1); see studentize().
TestResult test_independence(const DataMatrix& x, int m, Sided sided = Sided::Two,
                             const TestOptions& opts = {});

TestResult test_independence_multi(std::span<const DataMatrix> matrices, Sided sided = Sided::Two,
                                   const TestOptions& opts = {});

/// Heuristic column standardization (sample mean, sample sd with n-1).
/// Not covered by the limit theorems. Throws ParameterError on a constant column.
DataMatrix studentize(const DataMatrix& x);

}  // namespace tmax
