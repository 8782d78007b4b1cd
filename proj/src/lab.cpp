#include "tensormax/lab.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tensormax/error.hpp"
#include "tensormax/hypotest.hpp"
#include "tensormax/matrix_io.hpp"
#include "tensormax/parallel.hpp"
#include "tensormax/statcore.hpp"

namespace tmax {

std::vector<double> default_z_grid() {
  std::vector<double> z(101);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (-600.0 + 18.0 * static_cast<double>(i)) / 100.0;
  return z;
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw ParameterError("reps must be >= 1 (got " + std::to_string(reps) + ")");
  if (grid.empty()) throw ParameterError("grid must contain at least one cell");
  if (z_grid.empty()) throw ParameterError("z_grid must not be empty");
  double total = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const Cell& cell = grid[c];
    const std::string where = "grid[" + std::to_string(c) + "]";
    cell.spec.validate();
    if (cell.n < 1) throw DimensionError(where + ".n must be >= 1");
    if (cell.p < 3) throw DimensionError(where + ".p must be >= 3 (got " + std::to_string(cell.p) + ")");
    if (cell.m < 2 || static_cast<std::size_t>(cell.m) > cell.p || cell.m > kMaxOrder) {
      throw DimensionError(where + ".m must satisfy 2 <= m <= min(p, 20) (got " + std::to_string(cell.m) + ")");
    }
    const CostEstimate cost = enumeration_cost(cell.p, static_cast<std::size_t>(cell.m), cell.n);
    const double per_rep = static_cast<double>(cost.multiply_adds);
    if (cost.saturated || per_rep > cost_ceiling) {
      throw BudgetError(where + ": estimated cost " + format_double(per_rep) +
                            " multiply-adds per replicate exceeds cost_ceiling " + format_double(cost_ceiling),
                        per_rep);
    }
    total += per_rep * static_cast<double>(reps);
  }
  if (total > total_budget) {
    throw BudgetError("estimated total cost " + format_double(total) + " multiply-adds exceeds total_budget " +
                          format_double(total_budget),
                      total);
  }
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& cell : c.grid) {
    grid.push_back({{"n", cell.n},
                    {"p", cell.p},
                    {"m", cell.m},
                    {"spec", cell.spec},
                    {"sided", std::string(sided_name(cell.sided))}});
  }
  j = nlohmann::json{{"grid", grid},
                     {"reps", c.reps},
                     {"master_seed", c.master_seed},
                     {"z_grid", c.z_grid},
                     {"output_path", c.output_path},
                     {"cost_ceiling", c.cost_ceiling},
                     {"total_budget", c.total_budget}};
}

namespace {

template <class T>
T field(const nlohmann::json& j, const char* name, const std::string& where) {
  if (!j.contains(name)) throw ParameterError("missing field '" + where + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParameterError("field '" + where + name + "' has the wrong type");
  }
}

}  // namespace

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ParameterError("experiment config must be a JSON object");
  const auto& grid = j.contains("grid") ? j.at("grid") : throw ParameterError("missing field 'grid'");
  if (!grid.is_array()) throw ParameterError("field 'grid' must be an array");
  c.grid.clear();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& g = grid[i];
    const std::string where = "grid[" + std::to_string(i) + "].";
    Cell cell;
    // Negative sizes are rejected before the unsigned conversion.
    const auto n = field<std::int64_t>(g, "n", where);
    const auto p = field<std::int64_t>(g, "p", where);
    if (n < 1) throw DimensionError(where + "n must be >= 1");
    if (p < 3) throw DimensionError(where + "p must be >= 3");
    cell.n = static_cast<std::size_t>(n);
    cell.p = static_cast<std::size_t>(p);
    cell.m = field<int>(g, "m", where);
    cell.spec = g.contains("spec") ? g.at("spec").get<PopulationSpec>() : PopulationSpec::standard_normal();
    cell.sided = parse_sided(g.value("sided", std::string("two")));
    c.grid.push_back(cell);
  }
  const auto reps = field<std::int64_t>(j, "reps", "");
  if (reps < 1) throw ParameterError("reps must be >= 1 (got " + std::to_string(reps) + ")");
  c.reps = static_cast<std::uint64_t>(reps);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.z_grid = j.value("z_grid", default_z_grid());
  c.output_path = j.value("output_path", c.output_path);
  c.workers = j.value("workers", c.workers);
  c.cost_ceiling = j.value("cost_ceiling", c.cost_ceiling);
  c.total_budget = j.value("total_budget", c.total_budget);
}

double ks_distance(std::span<const double> samples, const GumbelLimit& limit) {
  if (samples.empty()) throw ParameterError("ks_distance needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double r = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = std::isinf(sorted[i]) && sorted[i] < 0 ? 0.0 : limit.cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / r - f, f - static_cast<double>(i) / r});
  }
  return d;
}

namespace {

CellSummary summarize(std::size_t cell_id, const Cell& cell, std::span<const ReplicateRecord> recs,
                      std::span<const double> w_signed_norm, const std::vector<double>& z_grid) {
  CellSummary s;
  s.cell_id = cell_id;
  s.cell = cell;
  const GumbelLimit limit(cell.m, cell.sided);
  std::vector<double> stat;
  stat.reserve(recs.size());
  if (cell.sided == Sided::Two) {
    for (const auto& r : recs) stat.push_back(r.t_value);
  } else {
    stat.assign(w_signed_norm.begin(), w_signed_norm.end());
  }
  std::vector<double> sorted = stat;
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());
  for (double z : z_grid) {
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin();
    s.ecdf.push_back(static_cast<double>(below) / count);
  }
  s.ks_distance = ks_distance(stat, limit);
  for (double level : kDecisionLevels) {
    std::size_t rejected = 0;
    for (double t : stat) {
      if (!std::isinf(t) && limit.sf(t) < level) ++rejected;
    }
    s.type1.push_back({level, static_cast<double>(rejected) / count});
  }
  double mean = 0.0;
  for (const auto& r : recs) mean += r.ratio;
  mean /= count;
  double ss = 0.0;
  for (const auto& r : recs) ss += (r.ratio - mean) * (r.ratio - mean);
  s.ratio_mean = mean;
  s.ratio_sd = recs.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  return s;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  const std::size_t reps = static_cast<std::size_t>(config.reps);
  for (std::size_t c = 0; c < config.grid.size(); ++c) {
    const Cell& cell = config.grid[c];
    const auto start = std::chrono::steady_clock::now();
    std::vector<ReplicateRecord> recs(reps);
    std::vector<double> signed_norm(reps);
    const double log_p = std::log(static_cast<double>(cell.p));
    EnumerationOptions eopts{1, config.cost_ceiling};
    try {
      parallel_blocks(reps, config.workers, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
          const DataMatrix x = sample_matrix(cell.spec, cell.n, cell.p, SeedSpec{config.master_seed, r});
          const StatResult st = max_entry(x, static_cast<std::size_t>(cell.m), eopts);
          ReplicateRecord& rec = recs[r];
          rec.cell_id = c;
          rec.replicate = r;
          rec.w_abs = st.w_abs;
          rec.w_signed = st.w_signed;
          rec.t_value = normalized_value(st.w_abs, static_cast<double>(cell.p), cell.m);
          rec.ratio = st.w_abs / std::sqrt(log_p);
          signed_norm[r] = st.w_signed > 0.0
                               ? normalized_value(st.w_signed, static_cast<double>(cell.p), cell.m)
                               : -std::numeric_limits<double>::infinity();
        }
      });
    } catch (const BudgetError&) {
      throw;
    } catch (const Error& e) {
      throw Error("cell " + std::to_string(c) + " failed: " + e.what());
    }
    CellSummary summary = summarize(c, cell, recs, signed_norm, config.z_grid);
    summary.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.cells.push_back(std::move(summary));
    report.records.insert(report.records.end(), recs.begin(), recs.end());
  }
  return report;
}

namespace {

constexpr const char* kCsvHeader = "cell_id,replicate,w_abs,w_signed,t_value,ratio";

}  // namespace

nlohmann::json summary_json(const ExperimentReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& s : report.cells) {
    nlohmann::json type1 = nlohmann::json::array();
    for (const auto& lr : s.type1) type1.push_back({{"level", lr.level}, {"rejection_rate", lr.rejection_rate}});
    cells.push_back({{"cell_id", s.cell_id},
                     {"n", s.cell.n},
                     {"p", s.cell.p},
                     {"m", s.cell.m},
                     {"spec", s.cell.spec},
                     {"sided", std::string(sided_name(s.cell.sided))},
                     {"ecdf", s.ecdf},
                     {"ks_distance", s.ks_distance},
                     {"type1", type1},
                     {"ratio_mean", s.ratio_mean},
                     {"ratio_sd", s.ratio_sd}});
  }
  nlohmann::json config = report.config;
  return nlohmann::json{{"config", config}, {"cells", cells}};
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw IoError(where + ": bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

void persist(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::string csv = std::string(kCsvHeader) + "\n";
  for (const auto& r : report.records) {
    csv += std::to_string(r.cell_id) + ',' + std::to_string(r.replicate) + ',' + format_double(r.w_abs, 17) + ',' +
           format_double(r.w_signed, 17) + ',' + format_double(r.t_value, 17) + ',' + format_double(r.ratio, 17) +
           '\n';
  }
  write_file(dir / "records.csv", csv);
  write_file(dir / "summary.json", summary_json(report).dump(2) + "\n");

  nlohmann::json timing = nlohmann::json::array();
  for (const auto& s : report.cells) timing.push_back({{"cell_id", s.cell_id}, {"runtime_seconds", s.runtime_seconds}});
  write_file(dir / "timing.json", timing.dump(2) + "\n");
}

ExperimentReport load(const std::filesystem::path& dir) {
  ExperimentReport report;
  nlohmann::json summary;
  try {
    summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    report.config = summary.at("config").get<ExperimentConfig>();
    for (const auto& c : summary.at("cells")) {
      CellSummary s;
      s.cell_id = c.at("cell_id").get<std::size_t>();
      s.cell.n = c.at("n").get<std::size_t>();
      s.cell.p = c.at("p").get<std::size_t>();
      s.cell.m = c.at("m").get<int>();
      s.cell.spec = c.at("spec").get<PopulationSpec>();
      s.cell.sided = parse_sided(c.at("sided").get<std::string>());
      s.ecdf = c.at("ecdf").get<std::vector<double>>();
      s.ks_distance = c.at("ks_distance").get<double>();
      for (const auto& lr : c.at("type1")) s.type1.push_back({lr.at("level"), lr.at("rejection_rate")});
      s.ratio_mean = c.at("ratio_mean").get<double>();
      s.ratio_sd = c.at("ratio_sd").get<double>();
      report.cells.push_back(std::move(s));
    }
    const auto timing = nlohmann::json::parse(read_file(dir / "timing.json"));
    for (const auto& t : timing) {
      const auto id = t.at("cell_id").get<std::size_t>();
      for (auto& s : report.cells) {
        if (s.cell_id == id) s.runtime_seconds = t.at("runtime_seconds").get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed report in " + dir.string() + ": " + e.what());
  }
  // The workers field is not persisted; it never affects results.
  report.config.workers = 1;

  std::istringstream csv(read_file(dir / "records.csv"));
  std::string line;
  std::getline(csv, line);
  if (line != kCsvHeader) throw IoError((dir / "records.csv").string() + ": unexpected header '" + line + "'");
  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = (dir / "records.csv").string() + ":" + std::to_string(line_no);
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (auto pos = rest.find(','); pos != std::string_view::npos; pos = rest.find(',')) {
      f.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    f.push_back(rest);
    if (f.size() != 6) throw IoError(where + ": expected 6 fields");
    ReplicateRecord r;
    r.cell_id = static_cast<std::size_t>(parse_double(f[0], where));
    r.replicate = static_cast<std::uint64_t>(parse_double(f[1], where));
    r.w_abs = parse_double(f[2], where);
    r.w_signed = parse_double(f[3], where);
    r.t_value = parse_double(f[4], where);
    r.ratio = parse_double(f[5], where);
    report.records.push_back(r);
  }
  return report;
}

}  // namespace tmax
