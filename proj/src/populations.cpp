#include "tensormax/populations.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tensormax/parallel.hpp"
#include "tensormax/rng.hpp"

namespace tmax {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 5> kFamilyNames{{
    {Family::StandardNormal, "StandardNormal"},
    {Family::Rademacher, "Rademacher"},
    {Family::UniformScaled, "UniformScaled"},
    {Family::CenteredExponential, "CenteredExponential"},
    {Family::StudentTStandardized, "StudentTStandardized"},
}};

}  // namespace

std::string_view family_name(Family f) noexcept {
  for (const auto& [family, name] : kFamilyNames) {
    if (family == f) return name;
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (const auto& [family, known] : kFamilyNames) {
    if (known == name) return family;
  }
  throw ParameterError("unknown population family '" + std::string(name) + "'");
}

PopulationSpec PopulationSpec::student_t(int df) {
  PopulationSpec spec{Family::StudentTStandardized, df, "StudentTStandardized(" + std::to_string(df) + ")"};
  spec.validate();
  return spec;
}

void PopulationSpec::validate() const {
  if (family == Family::StudentTStandardized && df <= 2) {
    throw ParameterError("df must be > 2 for StudentTStandardized (got " + std::to_string(df) + ")");
  }
}

void to_json(nlohmann::json& j, const PopulationSpec& spec) {
  j = nlohmann::json{{"family", std::string(family_name(spec.family))}};
  if (spec.family == Family::StudentTStandardized) j["df"] = spec.df;
  if (!spec.label.empty()) j["label"] = spec.label;
}

void from_json(const nlohmann::json& j, PopulationSpec& spec) {
  if (!j.is_object() || !j.contains("family")) {
    throw ParameterError("population spec must be an object with a \"family\" field");
  }
  spec.family = parse_family(j.at("family").get<std::string>());
  spec.df = j.value("df", 0);
  spec.label = j.value("label", std::string(family_name(spec.family)));
  spec.validate();
}

void to_json(nlohmann::json& j, const SeedSpec& seed) {
  j = nlohmann::json{{"master_seed", seed.master_seed}, {"stream_id", seed.stream_id}};
}

void from_json(const nlohmann::json& j, SeedSpec& seed) {
  seed.master_seed = j.at("master_seed").get<std::uint64_t>();
  seed.stream_id = j.value("stream_id", std::uint64_t{0});
}

DataMatrix::DataMatrix(std::size_t n, std::size_t p) : n_(n), p_(p), values_(n * p, 0.0) {
  if (n == 0 || p == 0) throw DimensionError("matrix dimensions must be positive");
}

DataMatrix DataMatrix::from_rows(std::size_t n, std::size_t p, std::span<const double> row_major) {
  if (row_major.size() != n * p) {
    throw DimensionError("expected " + std::to_string(n * p) + " values for a " + std::to_string(n) +
                         "x" + std::to_string(p) + " matrix, got " + std::to_string(row_major.size()));
  }
  DataMatrix m(n, p);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < p; ++i) {
      const double v = row_major[k * p + i];
      if (!std::isfinite(v)) {
        throw ParameterError("non-finite value at row " + std::to_string(k + 1) + ", column " +
                             std::to_string(i + 1));
      }
      m(k, i) = v;
    }
  }
  return m;
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DimensionError("matrix has no rows");
  const std::size_t p = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * p);
  for (const auto& r : rows) {
    if (r.size() != p) throw DimensionError("ragged rows: expected " + std::to_string(p) + " columns");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return from_rows(rows.size(), p, flat);
}

std::vector<double> DataMatrix::row_major() const {
  std::vector<double> out(n_ * p_);
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t i = 0; i < p_; ++i) out[k * p_ + i] = (*this)(k, i);
  }
  return out;
}

DataMatrix sample_matrix(const PopulationSpec& spec, std::size_t n, std::size_t p, SeedSpec seed,
                         unsigned workers) {
  spec.validate();
  if (n < 1) throw DimensionError("n must be >= 1");
  if (p < 3) throw DimensionError("p must be >= 3 (got " + std::to_string(p) + ")");

  DataMatrix out(n, p);
  const std::uint64_t stream_key = derive_key({seed.master_seed, seed.stream_id});
  visit_sampler(spec, [&](auto sampler) {
    parallel_blocks(p, workers, [&, sampler](unsigned, std::size_t begin, std::size_t end) mutable {
      for (std::size_t i = begin; i < end; ++i) {
        auto col = out.column(i);
        for (std::size_t k = 0; k < n; ++k) {
          SplitMix64 g(derive_key({stream_key, k, i}));
          col[k] = sampler(g);
        }
      }
    });
  });
  return out;
}

std::string_view regime_name(Regime r) noexcept {
  switch (r) {
    case Regime::UltraHigh: return "ultra_high";
    case Regime::Polynomial: return "polynomial";
    case Regime::Outside: return "outside";
  }
  return "outside";
}

void to_json(nlohmann::json& j, const RegimeReport& r) {
  j = nlohmann::json{{"regime", std::string(regime_name(r.regime))},
                     {"ultra_high", r.ultra_high},
                     {"polynomial", r.polynomial},
                     {"log_p", r.log_p},
                     {"n_pow_beta", r.n_pow_beta},
                     {"n_pow_growth", r.n_pow_growth},
                     {"beta", r.beta},
                     {"tau1", r.tau1},
                     {"tau2", r.tau2}};
}

RegimeReport check_regime(std::size_t n, double p, int m, const AssumptionProfile& profile) {
  RegimeReport r;
  r.beta = profile.beta(m);
  r.tau1 = profile.tau1(m);
  r.tau2 = profile.tau2(m);
  r.log_p = std::log(p);
  const double nd = static_cast<double>(n);
  r.n_pow_beta = std::pow(nd, r.beta);
  r.n_pow_growth = std::pow(nd, profile.growth_exponent);
  r.ultra_high = r.log_p <= r.n_pow_beta;
  r.polynomial = p <= r.n_pow_growth;
  r.regime = r.ultra_high ? Regime::UltraHigh : (r.polynomial ? Regime::Polynomial : Regime::Outside);
  return r;
}

}  // namespace tmax
