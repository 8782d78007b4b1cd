#include "tensormax/diagnostics.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tensormax/asymptotics.hpp"
#include "tensormax/parallel.hpp"
#include "tensormax/rng.hpp"
#include "tensormax/statcore.hpp"

namespace tmax {

TailEstimate TailEstimate::from_counts(std::uint64_t hits, std::uint64_t reps) {
  if (reps == 0) throw ParameterError("reps must be >= 1");
  if (hits > reps) throw ParameterError("hits exceed reps");
  TailEstimate t;
  t.hits = hits;
  t.reps = reps;
  t.probability = static_cast<double>(hits) / static_cast<double>(reps);
  t.std_error = std::sqrt(t.probability * (1.0 - t.probability) / static_cast<double>(reps));
  return t;
}

void to_json(nlohmann::json& j, const TailEstimate& t) {
  j = nlohmann::json{
      {"probability", t.probability}, {"hits", t.hits}, {"reps", t.reps}, {"std_error", t.std_error}};
}

double gaussian_upper_tail(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace {

void check_mc(std::uint64_t reps, int m) {
  if (reps == 0) throw ParameterError("reps must be >= 1");
  if (m < 2) throw ParameterError("tensor order m must be >= 2 (got " + std::to_string(m) + ")");
}

// Counts replicates r in [0, reps) with hit(engine_r) true. Each replicate owns
// its stream, so the count does not depend on the worker count.
template <class Hit>
std::uint64_t count_hits(std::uint64_t reps, SeedSpec seed, unsigned workers, Hit&& hit) {
  const std::uint64_t base = derive_key({seed.master_seed, seed.stream_id});
  std::vector<std::uint64_t> per_worker(resolve_workers(workers), 0);
  parallel_blocks(reps, workers, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::uint64_t local = 0;
    for (std::size_t r = begin; r < end; ++r) {
      Xoshiro256pp g(derive_key({base, r}));
      if (hit(g)) ++local;
    }
    per_worker[w] = local;
  });
  std::uint64_t total = 0;
  for (auto h : per_worker) total += h;
  return total;
}

// sum_{k<n} prod_{t<m} x_{k,t}. Rademacher products are sign parities, so
// 64 observations are handled per machine word.
template <class Sampler, class Engine>
double sum_of_products(Family family, Sampler& sample, std::size_t n, int m, Engine& g) {
  if (family == Family::Rademacher) {
    std::int64_t sum = 0;
    std::size_t k = 0;
    while (k < n) {
      const std::size_t block = std::min<std::size_t>(64, n - k);
      std::uint64_t negative = 0;
      for (int t = 0; t < m; ++t) negative ^= g();
      if (block < 64) negative &= (std::uint64_t{1} << block) - 1;
      sum += static_cast<std::int64_t>(block) - 2 * std::popcount(negative);
      k += block;
    }
    return static_cast<double>(sum);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double prod = sample(g);
    for (int t = 1; t < m; ++t) prod *= sample(g);
    sum += prod;
  }
  return sum;
}

}  // namespace

TailEstimate estimate_single_tail(const PopulationSpec& spec, std::size_t n, int m, double threshold,
                                  std::uint64_t reps, SeedSpec seed, unsigned workers) {
  spec.validate();
  check_mc(reps, m);
  if (n == 0) throw ParameterError("n must be >= 1");
  if (!(threshold >= 0.0)) throw ParameterError("threshold must be >= 0");
  if (threshold == 0.0) return TailEstimate::from_counts(reps, reps);
  const double root_n = std::sqrt(static_cast<double>(n));
  const auto hits = visit_sampler(spec, [&](auto sampler) {
    return count_hits(reps, seed, workers, [&, sampler](auto& g) mutable {
      return std::fabs(sum_of_products(spec.family, sampler, n, m, g)) / root_n > threshold;
    });
  });
  return TailEstimate::from_counts(hits, reps);
}

void to_json(nlohmann::json& j, const LambdaEstimate& e) {
  j = nlohmann::json{{"z", e.z},
                     {"nu_p", e.nu},
                     {"threshold", e.threshold},
                     {"single_tail", e.single_tail},
                     {"lambda_hat", e.lambda_hat},
                     {"lambda_limit", e.lambda_limit},
                     {"expected_hits", e.expected_hits},
                     {"low_hits", e.low_hits},
                     {"c_n", e.c_n},
                     {"n", e.n},
                     {"p", e.p},
                     {"m", e.m}};
}

LambdaEstimate estimate_lambda(double z, std::size_t n, std::size_t p, int m, const PopulationSpec& spec,
                               std::uint64_t reps, SeedSpec seed, unsigned workers) {
  LambdaEstimate e;
  e.z = z;
  e.n = n;
  e.p = p;
  e.m = m;
  e.nu = nu_p(z, static_cast<double>(p), m);
  e.threshold = std::sqrt(2.0 * m) * e.nu;
  e.lambda_limit = lambda_limit(z);
  e.expected_hits = static_cast<double>(reps) * 2.0 * gaussian_upper_tail(e.threshold);
  e.low_hits = e.expected_hits < 50.0;
  e.c_n = n > 1 ? std::sqrt(2.0 * m / std::log(static_cast<double>(n))) * e.nu : 0.0;
  e.single_tail = estimate_single_tail(spec, n, m, e.threshold, reps, seed, workers);
  e.lambda_hat = static_cast<double>(binomial(p, static_cast<std::uint64_t>(m))) * e.single_tail.probability;
  return e;
}

double b1_bound(std::size_t p, int m, double single_tail) {
  if (!(single_tail >= 0.0 && single_tail <= 1.0)) throw ParameterError("single_tail must lie in [0, 1]");
  if (m < 2) throw ParameterError("tensor order m must be >= 2");
  const double tuples = static_cast<double>(binomial(p, static_cast<std::uint64_t>(m)));
  const double neighbours = static_cast<double>(m) * m * std::pow(static_cast<double>(p), m - 1);
  return tuples * neighbours * single_tail * single_tail;
}

TailEstimate estimate_pair_tail(const PairTailSpec& spec, std::uint64_t reps, SeedSpec seed, unsigned workers) {
  spec.spec.validate();
  check_mc(reps, spec.m);
  if (spec.s < 1 || spec.s > spec.m - 1) {
    throw ParameterError("shared index count s must lie in [1, m-1] (got " + std::to_string(spec.s) + ")");
  }
  if (!(spec.a_n > 0.0)) throw ParameterError("a_n must be > 0");
  if (spec.n == 0) throw ParameterError("n must be >= 1");
  if (!(spec.p > 1.0)) throw ParameterError("p must be > 1 so that log p > 0");
  const double cut = spec.a_n * std::sqrt(static_cast<double>(spec.n) * std::log(spec.p));
  const int s = spec.s;
  const int m = spec.m;
  const auto hits = visit_sampler(spec.spec, [&](auto sampler) {
    return count_hits(reps, seed, workers, [&, sampler](auto& g) mutable {
      double sum_eta = 0.0;
      double sum_zeta = 0.0;
      for (std::size_t k = 0; k < spec.n; ++k) {
        double xi = sampler(g);
        for (int t = 1; t < s; ++t) xi *= sampler(g);
        double eta = sampler(g);
        for (int t = s + 1; t < m; ++t) eta *= sampler(g);
        double zeta = sampler(g);
        for (int t = m + 1; t < 2 * m - s; ++t) zeta *= sampler(g);
        sum_eta += xi * eta;
        sum_zeta += xi * zeta;
      }
      return std::fabs(sum_eta) >= cut && std::fabs(sum_zeta) >= cut;
    });
  });
  return TailEstimate::from_counts(hits, reps);
}

void to_json(nlohmann::json& j, const MdrReport& r) {
  j = nlohmann::json{{"x", r.x},
                     {"p_hat", r.p_hat},
                     {"gaussian_tail", r.gaussian_tail},
                     {"ratio", r.ratio},
                     {"ratio_se", r.ratio_se},
                     {"expected_hits", r.expected_hits},
                     {"low_hits", r.low_hits}};
}

MdrReport moderate_deviation_ratio(const PopulationSpec& spec, int m, std::size_t n, double x,
                                   std::uint64_t reps, SeedSpec seed, unsigned workers) {
  spec.validate();
  check_mc(reps, m);
  if (n == 0) throw ParameterError("n must be >= 1");
  if (!(x >= 0.0)) throw ParameterError("x must be >= 0");
  MdrReport r;
  r.x = x;
  r.gaussian_tail = gaussian_upper_tail(x);
  r.expected_hits = static_cast<double>(reps) * r.gaussian_tail;
  r.low_hits = r.expected_hits < 10.0;
  const double root_n = std::sqrt(static_cast<double>(n));
  const auto hits = visit_sampler(spec, [&](auto sampler) {
    return count_hits(reps, seed, workers, [&, sampler](auto& g) mutable {
      return sum_of_products(spec.family, sampler, n, m, g) / root_n >= x;
    });
  });
  r.p_hat = TailEstimate::from_counts(hits, reps);
  r.ratio = r.p_hat.probability / r.gaussian_tail;
  r.ratio_se = r.p_hat.std_error / r.gaussian_tail;
  return r;
}

void to_json(nlohmann::json& j, const SteinChenReport& r) {
  nlohmann::json psi = nlohmann::json::object();
  for (const auto& [s, est] : r.psi_estimates) psi[std::to_string(s)] = est;
  j = nlohmann::json{{"z", r.z},
                     {"lambda_hat", r.lambda_hat},
                     {"lambda_limit", r.lambda_limit},
                     {"b1_bound", r.b1_bound},
                     {"b2_bound", r.b2_bound},
                     {"b3", r.b3},
                     {"a_n", r.a_n},
                     {"psi_estimates", psi},
                     {"rate_subexponential", r.rate_subexponential},
                     {"rate_polynomial", r.rate_polynomial},
                     {"n", r.n},
                     {"p", r.p},
                     {"m", r.m}};
}

SteinChenReport stein_chen_report(double z, std::size_t n, std::size_t p, int m, const PopulationSpec& spec,
                                  std::uint64_t reps, SeedSpec seed, unsigned workers,
                                  std::optional<double> a_n) {
  const LambdaEstimate lam = estimate_lambda(z, n, p, m, spec, reps, seed, workers);
  SteinChenReport r;
  r.z = z;
  r.n = n;
  r.p = p;
  r.m = m;
  r.lambda_hat = lam.lambda_hat;
  r.lambda_limit = lam.lambda_limit;
  r.b1_bound = b1_bound(p, m, lam.single_tail.probability);
  const double pd = static_cast<double>(p);
  const double log_p = std::log(pd);
  r.a_n = a_n.value_or(lam.threshold / std::sqrt(log_p));
  r.rate_subexponential = std::pow(pd, -r.a_n * r.a_n);
  r.rate_polynomial = std::pow(pd, -2.0 * m);
  const double tuples = static_cast<double>(binomial(p, static_cast<std::uint64_t>(m)));
  double b2 = 0.0;
  for (int s = 1; s <= m - 1; ++s) {
    PairTailSpec ps{s, r.a_n, n, pd, m, spec};
    SeedSpec sub{seed.master_seed, seed.stream_id + static_cast<std::uint64_t>(s)};
    const TailEstimate psi = estimate_pair_tail(ps, reps, sub, workers);
    r.psi_estimates.emplace(s, psi);
    b2 += std::pow(static_cast<double>(m), s) * std::pow(pd, m - s) * psi.probability;
  }
  r.b2_bound = tuples * b2;
  return r;
}

}  // namespace tmax
