#include "tensormax/statcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tensormax/matrix_io.hpp"
#include "tensormax/parallel.hpp"

namespace tmax {

void to_json(nlohmann::json& j, const StatResult& r) {
  j = nlohmann::json{{"w_abs", r.w_abs},
                     {"w_signed", r.w_signed},
                     {"argmax_abs", r.argmax_abs},
                     {"argmax_signed", r.argmax_signed},
                     {"n", r.n},
                     {"p", r.p},
                     {"m", r.m},
                     {"tuple_count", r.tuple_count}};
}

void from_json(const nlohmann::json& j, StatResult& r) {
  j.at("w_abs").get_to(r.w_abs);
  j.at("w_signed").get_to(r.w_signed);
  j.at("argmax_abs").get_to(r.argmax_abs);
  j.at("argmax_signed").get_to(r.argmax_signed);
  j.at("n").get_to(r.n);
  j.at("p").get_to(r.p);
  j.at("m").get_to(r.m);
  j.at("tuple_count").get_to(r.tuple_count);
}

std::uint64_t binomial(std::uint64_t p, std::uint64_t m, bool* overflow) noexcept {
  if (overflow) *overflow = false;
  if (m > p) return 0;
  m = std::min(m, p - m);
  // C(p, j) = C(p, j-1) * (p - j + 1) / j stays integral at every step.
  unsigned __int128 acc = 1;
  for (std::uint64_t j = 1; j <= m; ++j) {
    acc = acc * (p - j + 1) / j;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      if (overflow) *overflow = true;
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(acc);
}

CostEstimate enumeration_cost(std::size_t p, std::size_t m, std::size_t n) noexcept {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  CostEstimate c;
  bool ovf = false;
  c.tuples = binomial(p, m, &ovf);
  if (ovf) {
    c.tuples = c.multiply_adds = kMax;
    c.saturated = true;
    return c;
  }
  unsigned __int128 prefixes = 0;
  for (std::size_t s = 1; s <= m; ++s) {
    prefixes += binomial(p, s, &ovf);
    if (ovf) break;
  }
  const unsigned __int128 total = prefixes * n;
  if (ovf || total > kMax) {
    c.multiply_adds = kMax;
    c.saturated = true;
  } else {
    c.multiply_adds = static_cast<std::uint64_t>(total);
  }
  return c;
}

namespace {

struct Best {
  double value = -std::numeric_limits<double>::infinity();
  TupleIndex tuple;  // 0-based while enumerating

  // Strictly larger wins; equal values keep the lexicographically smaller tuple.
  void merge(const Best& other) {
    if (other.tuple.empty()) return;
    if (tuple.empty() || other.value > value || (other.value == value && other.tuple < tuple)) {
      *this = other;
    }
  }
};

struct Extremes {
  Best abs;
  Best sig;
};

using Factors = std::vector<const DataMatrix*>;  // factor matrix per tuple position

void check_shapes(const Factors& matrices) {
  const std::size_t m = matrices.size();
  if (m < 2) throw DimensionError("tensor order m must be >= 2 (got " + std::to_string(m) + ")");
  const std::size_t n = matrices.front()->n();
  const std::size_t p = matrices.front()->p();
  for (std::size_t s = 1; s < m; ++s) {
    if (matrices[s]->n() != n || matrices[s]->p() != p) {
      throw DimensionError("population " + std::to_string(s + 1) + " is " +
                           std::to_string(matrices[s]->n()) + "x" + std::to_string(matrices[s]->p()) +
                           ", expected " + std::to_string(n) + "x" + std::to_string(p));
    }
  }
  if (n == 0) throw DimensionError("matrix has no rows");
  if (m > p) {
    throw DimensionError("tensor order m=" + std::to_string(m) + " exceeds dimension p=" +
                         std::to_string(p));
  }
}

StatResult finish(const Extremes& e, std::size_t n, std::size_t p, std::size_t m) {
  StatResult r;
  r.w_abs = e.abs.value;
  r.w_signed = e.sig.value;
  r.argmax_abs = e.abs.tuple;
  r.argmax_signed = e.sig.tuple;
  for (auto& i : r.argmax_abs) ++i;
  for (auto& i : r.argmax_signed) ++i;
  r.n = n;
  r.p = p;
  r.m = m;
  r.tuple_count = binomial(p, m);
  return r;
}

// Depth-first enumeration over increasing tuples whose first index is in a
// given set. prefix[d] holds prod_{t<=d} x^{(t)}_{k,i_t} for k = 0..n-1.
class Enumerator {
 public:
  explicit Enumerator(const Factors& matrices)
      : mats_(matrices),
        n_(matrices.front()->n()),
        p_(matrices.front()->p()),
        m_(matrices.size()),
        root_scale_(std::sqrt(static_cast<double>(n_))),
        prefix_(m_ > 2 ? m_ - 2 : 0, std::vector<double>(n_)),
        tuple_(m_) {}

  void run_first_index(std::size_t i1) {
    tuple_[0] = i1;
    const double* first = mats_[0]->column(i1).data();
    if (m_ == 2) {
      leaves(first, i1 + 1);
    } else {
      descend(1, i1 + 1, first);
    }
  }

  const Extremes& extremes() const noexcept { return best_; }

 private:
  void descend(std::size_t depth, std::size_t start, const double* prev) {
    // Indices at depth `depth` must leave room for the m - depth - 1 that follow.
    const std::size_t last = p_ - (m_ - depth);
    double* cur = prefix_[depth - 1].data();
    for (std::size_t i = start; i <= last; ++i) {
      tuple_[depth] = i;
      const double* col = mats_[depth]->column(i).data();
      for (std::size_t k = 0; k < n_; ++k) cur[k] = prev[k] * col[k];
      if (depth + 2 == m_) {
        leaves(cur, i + 1);
      } else {
        descend(depth + 1, i + 1, cur);
      }
    }
  }

  // Final index: four independent accumulators, each summing k ascending.
  void leaves(const double* prev, std::size_t start) {
    const DataMatrix& last_mat = *mats_[m_ - 1];
    std::size_t i = start;
    for (; i + 4 <= p_; i += 4) {
      const double* c0 = last_mat.column(i).data();
      const double* c1 = last_mat.column(i + 1).data();
      const double* c2 = last_mat.column(i + 2).data();
      const double* c3 = last_mat.column(i + 3).data();
      double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        const double f = prev[k];
        a0 += f * c0[k];
        a1 += f * c1[k];
        a2 += f * c2[k];
        a3 += f * c3[k];
      }
      offer(i, a0);
      offer(i + 1, a1);
      offer(i + 2, a2);
      offer(i + 3, a3);
    }
    for (; i < p_; ++i) {
      const double* c = last_mat.column(i).data();
      double a = 0.0;
      for (std::size_t k = 0; k < n_; ++k) a += prev[k] * c[k];
      offer(i, a);
    }
  }

  void offer(std::size_t last_index, double sum) {
    const double v = sum / root_scale_;
    const double a = std::fabs(v);
    // Lexicographic enumeration: strict comparison keeps the earliest tuple on ties.
    if (a > best_.abs.value || best_.abs.tuple.empty()) {
      tuple_[m_ - 1] = last_index;
      best_.abs.value = a;
      best_.abs.tuple = tuple_;
    }
    if (v > best_.sig.value || best_.sig.tuple.empty()) {
      tuple_[m_ - 1] = last_index;
      best_.sig.value = v;
      best_.sig.tuple = tuple_;
    }
  }

  const Factors& mats_;
  std::size_t n_, p_, m_;
  double root_scale_;
  std::vector<std::vector<double>> prefix_;
  TupleIndex tuple_;
  Extremes best_;
};

void check_budget(std::size_t p, std::size_t m, std::size_t n, double ceiling) {
  const CostEstimate cost = enumeration_cost(p, m, n);
  const double est = static_cast<double>(cost.multiply_adds);
  if (cost.saturated || est > ceiling) {
    const std::string amount =
        cost.saturated ? std::string("more than 2^64") : std::to_string(cost.multiply_adds);
    throw BudgetError("estimated cost " + amount + " multiply-adds (C(" + std::to_string(p) + "," +
                          std::to_string(m) + ") tuples, n=" + std::to_string(n) + ") exceeds ceiling " +
                          format_double(ceiling),
                      est);
  }
}

StatResult enumerate(const Factors& mats, const EnumerationOptions& opts) {
  check_shapes(mats);
  const std::size_t n = mats.front()->n();
  const std::size_t p = mats.front()->p();
  const std::size_t m = mats.size();
  check_budget(p, m, n, opts.cost_ceiling);

  const std::size_t first_count = p - m + 1;  // admissible values of i_1
  const unsigned workers = std::max(
      1U, std::min<unsigned>(resolve_workers(opts.workers), static_cast<unsigned>(first_count)));
  std::vector<Extremes> partial(workers);
  // Round-robin over i_1: early first indices carry most of the tuples.
  parallel_blocks(workers, workers, [&](unsigned, std::size_t wb, std::size_t we) {
    for (std::size_t w = wb; w < we; ++w) {
      Enumerator e(mats);
      for (std::size_t i1 = w; i1 < first_count; i1 += workers) e.run_first_index(i1);
      partial[w] = e.extremes();
    }
  });
  Extremes total;
  for (const auto& e : partial) {
    total.abs.merge(e.abs);
    total.sig.merge(e.sig);
  }
  return finish(total, n, p, m);
}

// Next combination of {0..p-1} in lexicographic order; false when exhausted.
bool next_combination(TupleIndex& t, std::size_t p) {
  const std::size_t m = t.size();
  std::size_t j = m;
  while (j > 0) {
    --j;
    if (t[j] < p - m + j) {
      ++t[j];
      for (std::size_t r = j + 1; r < m; ++r) t[r] = t[r - 1] + 1;
      return true;
    }
  }
  return false;
}

Factors factors_of(std::span<const DataMatrix> matrices) {
  if (matrices.empty()) throw DimensionError("no populations given");
  Factors f;
  for (const auto& mat : matrices) f.push_back(&mat);
  return f;
}

StatResult bruteforce(const Factors& mats) {
  check_shapes(mats);
  const std::size_t n = mats.front()->n();
  const std::size_t p = mats.front()->p();
  const std::size_t m = mats.size();
  const double work = static_cast<double>(binomial(p, m)) * static_cast<double>(n);
  if (work > kOracleCeiling) {
    throw BudgetError("brute-force oracle limited to C(p,m)*n <= 1e7, got " + std::to_string(work), work);
  }
  const double root_scale = std::sqrt(static_cast<double>(n));
  Extremes best;
  TupleIndex t(m);
  for (std::size_t j = 0; j < m; ++j) t[j] = j;
  do {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double prod = (*mats[0])(k, t[0]);
      for (std::size_t j = 1; j < m; ++j) prod *= (*mats[j])(k, t[j]);
      sum += prod;
    }
    const double v = sum / root_scale;
    Best a{std::fabs(v), t};
    Best s{v, t};
    best.abs.merge(a);
    best.sig.merge(s);
  } while (next_combination(t, p));
  return finish(best, n, p, m);
}

}  // namespace

StatResult max_entry(const DataMatrix& x, std::size_t m, const EnumerationOptions& opts) {
  if (m < 2) throw DimensionError("tensor order m must be >= 2 (got " + std::to_string(m) + ")");
  if (m > x.p()) {
    throw DimensionError("tensor order m=" + std::to_string(m) + " exceeds dimension p=" +
                         std::to_string(x.p()));
  }
  return enumerate(Factors(m, &x), opts);
}

StatResult max_entry_multi(std::span<const DataMatrix> matrices, const EnumerationOptions& opts) {
  return enumerate(factors_of(matrices), opts);
}

StatResult max_entry_bruteforce(const DataMatrix& x, std::size_t m) {
  if (m < 2) throw DimensionError("tensor order m must be >= 2 (got " + std::to_string(m) + ")");
  if (m > x.p()) {
    throw DimensionError("tensor order m=" + std::to_string(m) + " exceeds dimension p=" +
                         std::to_string(x.p()));
  }
  return bruteforce(Factors(m, &x));
}

StatResult max_entry_multi_bruteforce(std::span<const DataMatrix> matrices) {
  return bruteforce(factors_of(matrices));
}

}  // namespace tmax
