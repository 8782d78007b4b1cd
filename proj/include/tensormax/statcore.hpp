#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "tensormax/populations.hpp"

namespace tmax {

/// 1-based, strictly increasing index tuple (i_1 < ... < i_m).
using TupleIndex = std::vector<std::size_t>;

/// Largest off-diagonal entries of the sample tensor, scaled by 1/sqrt(n).
struct StatResult {
  double w_abs = 0.0;     // max |sum_k prod_j x_{k,i_j}| / sqrt(n)
  double w_signed = 0.0;  // max of the same sum without the absolute value
  TupleIndex argmax_abs;
  TupleIndex argmax_signed;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t m = 0;
  std::uint64_t tuple_count = 0;  // C(p, m)

  bool operator==(const StatResult&) const = default;
};

void to_json(nlohmann::json& j, const StatResult& r);
void from_json(const nlohmann::json& j, StatResult& r);

struct CostEstimate {
  std::uint64_t tuples = 0;          // C(p, m)
  std::uint64_t multiply_adds = 0;   // n * sum_{s=1..m} C(p, s)
  bool saturated = false;            // a count overflowed; fields hold UINT64_MAX
};

/// Binomial coefficient, saturating at UINT64_MAX (flagged through `overflow`).
std::uint64_t binomial(std::uint64_t p, std::uint64_t m, bool* overflow = nullptr) noexcept;

CostEstimate enumeration_cost(std::size_t p, std::size_t m, std::size_t n) noexcept;

inline constexpr double kDefaultCostCeiling = 1e10;
inline constexpr double kOracleCeiling = 1e7;

struct EnumerationOptions {
  unsigned workers = 1;  // 0 = all cores
  double cost_ceiling = kDefaultCostCeiling;
};

/// W_n and W~_n by depth-first enumeration with shared prefix products.
/// Ties go to the lexicographically smallest tuple. The result is bit-identical
/// to max_entry_bruteforce for every worker count.
StatResult max_entry(const DataMatrix& x, std::size_t m, const EnumerationOptions& opts = {});

/// Multi-population variant: the factor at depth s is taken from matrices[s].
StatResult max_entry_multi(std::span<const DataMatrix> matrices, const EnumerationOptions& opts = {});

/// Reference evaluation: every tuple's sum is recomputed from scratch in the
/// canonical order (k ascending, factors left to right). Limited to
/// C(p,m) * n <= 1e7.
StatResult max_entry_bruteforce(const DataMatrix& x, std::size_t m);
StatResult max_entry_multi_bruteforce(std::span<const DataMatrix> matrices);

}  // namespace tmax
