#include "rgg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace rgg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double region_extent(const ConvexRegion& region) {
  const Box3& b = region.bounding_box();
  return std::max({b.hi.x - b.lo.x, b.hi.y - b.lo.y, b.hi.z - b.lo.z});
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_flag(const std::string& text, bool& out) {
  if (text == "0") {
    out = false;
    return true;
  }
  if (text == "1") {
    out = true;
    return true;
  }
  return false;
}

}  // namespace

void validate(const ExperimentConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.k < 1) throw std::invalid_argument("k must be >= 1");
  if (config.n < static_cast<std::uint64_t>(config.k) + 2) throw std::invalid_argument("n must be >= k + 2");
  if (config.n < 3) throw std::invalid_argument("n must be >= 3");
  if (config.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (!std::isfinite(config.c)) throw std::invalid_argument("c must be finite");
}

std::string to_string(ProcessKind kind) { return kind == ProcessKind::kPoisson ? "poisson" : "binomial"; }

ProcessKind parse_process_kind(const std::string& token) {
  if (token == "binomial") return ProcessKind::kBinomial;
  if (token == "poisson") return ProcessKind::kPoisson;
  throw std::invalid_argument("unknown process `" + token + "` (expected binomial or poisson)");
}

std::mt19937_64 trial_stream(std::uint64_t master_seed, std::uint64_t trial) {
  return std::mt19937_64(splitmix64(splitmix64(master_seed) ^ splitmix64(~trial)));
}

PointSample sample_binomial_process(const ConvexRegion& region, std::uint64_t n, std::mt19937_64& rng) {
  PointSample s;
  s.region = region;
  s.process = ProcessKind::kBinomial;
  s.n_param = n;
  s.points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) s.points.push_back(sample_uniform(region, rng));
  return s;
}

PointSample sample_poisson_process(const ConvexRegion& region, double intensity, std::mt19937_64& rng) {
  if (!(intensity > 0.0) || !std::isfinite(intensity)) {
    throw DomainError("Poisson intensity must be positive and finite");
  }
  std::poisson_distribution<std::uint64_t> count_dist(intensity * region.volume());
  const std::uint64_t count = count_dist(rng);
  PointSample s;
  s.region = region;
  s.process = ProcessKind::kPoisson;
  s.n_param = static_cast<std::uint64_t>(intensity);
  s.points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) s.points.push_back(sample_uniform(region, rng));
  return s;
}

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)), region_(normalize_unit_volume(parse_region_spec(config_.region))) {
  validate(config_);
  params_ = theory::make_params(static_cast<double>(config_.n), config_.k, config_.c, region_.surface_area());
  const double extent = region_extent(region_);
  cell_size_ = std::clamp(params_.r_n, extent / 128.0, extent / 4.0);
}

TrialRecord Experiment::run_trial(std::uint64_t trial) const {
  std::mt19937_64 rng = trial_stream(config_.master_seed, trial);
  const PointSample sample = config_.process == ProcessKind::kPoisson
                                 ? sample_poisson_process(region_, static_cast<double>(config_.n), rng)
                                 : sample_binomial_process(region_, config_.n, rng);
  TrialRecord rec;
  rec.trial = trial;
  rec.count = sample.size();
  rec.r_n = params_.r_n;
  // Min degree >= k + 1 needs at least k + 2 points; smaller Poisson
  // samples have no critical radius and count as exceedances.
  if (sample.size() < static_cast<std::size_t>(config_.k) + 2) return rec;
  const CriticalRadii radii = critical_radii(sample, config_.k, cell_size_);
  rec.rho_delta = radii.rho_delta;
  rec.rho_kappa = radii.rho_kappa;
  rec.below_delta = radii.rho_delta <= rec.r_n;
  rec.below_kappa = radii.rho_kappa <= rec.r_n;
  rec.equal = radii.equal;
  return rec;
}

ExperimentResult Experiment::run() const {
  ExperimentResult result;
  result.config = config_;
  result.theory = params_;
  result.theory_limit = theory::limit_probability(config_.c);
  result.records.resize(config_.trials);

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::optional<std::uint64_t> failed_trial;
  std::string failure;

  auto worker = [&] {
    while (!failed.load()) {
      const std::uint64_t t = next.fetch_add(1);
      if (t >= config_.trials) break;
      try {
        result.records[t] = run_trial(t);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed_trial || t < *failed_trial) {
          failed_trial = t;
          failure = e.what();
        }
        failed.store(true);
      }
    }
  };
  const auto threads = static_cast<std::uint64_t>(config_.workers);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::uint64_t w = 0; w < std::min(threads, config_.trials); ++w) pool.emplace_back(worker);
  }
  if (failed_trial) throw TrialError(*failed_trial, failure);
  result.aggregates = aggregate(result.records);
  return result;
}

TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t trial) {
  return Experiment(config).run_trial(trial);
}

ExperimentResult run_experiment(const ExperimentConfig& config) { return Experiment(config).run(); }

double empirical_cdf_at(std::span<const TrialRecord> records, RadiusField field, double r) {
  if (records.empty()) throw std::invalid_argument("empirical_cdf_at needs at least one record");
  std::size_t hits = 0;
  for (const auto& rec : records) {
    const auto& rho = field == RadiusField::kDelta ? rec.rho_delta : rec.rho_kappa;
    if (rho && *rho <= r) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double equality_rate(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("equality_rate needs at least one record");
  const auto eq = std::count_if(records.begin(), records.end(), [](const TrialRecord& r) { return r.equal; });
  return static_cast<double>(eq) / static_cast<double>(records.size());
}

Aggregates aggregate(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate needs at least one record");
  const auto total = static_cast<double>(records.size());
  const auto delta = std::count_if(records.begin(), records.end(), [](const TrialRecord& r) { return r.below_delta; });
  const auto kappa = std::count_if(records.begin(), records.end(), [](const TrialRecord& r) { return r.below_kappa; });
  Aggregates a;
  a.p_hat_delta = static_cast<double>(delta) / total;
  a.p_hat_kappa = static_cast<double>(kappa) / total;
  a.se_delta = std::sqrt(a.p_hat_delta * (1.0 - a.p_hat_delta) / total);
  a.se_kappa = std::sqrt(a.p_hat_kappa * (1.0 - a.p_hat_kappa) / total);
  a.equality_rate = equality_rate(records);
  return a;
}

std::string shortest_decimal(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, ptr);
}

void write_results_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.trial << ',' << r.count << ',' << (r.rho_delta ? shortest_decimal(*r.rho_delta) : "") << ','
        << (r.rho_kappa ? shortest_decimal(*r.rho_kappa) : "") << ',' << shortest_decimal(r.r_n) << ','
        << (r.below_delta ? 1 : 0) << ',' << (r.below_kappa ? 1 : 0) << ',' << (r.equal ? 1 : 0) << '\n';
  }
}

std::string summary_json(const ExperimentResult& result) {
  nlohmann::ordered_json j;
  const auto& cfg = result.config;
  // Worker count and output path are left out: they must not change the bytes.
  j["config"] = {{"region", cfg.region},
                 {"n", cfg.n},
                 {"k", cfg.k},
                 {"c", cfg.c},
                 {"process", to_string(cfg.process)},
                 {"trials", cfg.trials},
                 {"master_seed", cfg.master_seed}};
  j["theory"] = {{"area", result.theory.area}, {"xi", result.theory.xi}, {"r_n", result.theory.r_n}};
  const auto& a = result.aggregates;
  j["p_hat_delta"] = a.p_hat_delta;
  j["p_hat_kappa"] = a.p_hat_kappa;
  j["se_delta"] = a.se_delta;
  j["se_kappa"] = a.se_kappa;
  j["equality_rate"] = a.equality_rate;
  j["theory_limit"] = result.theory_limit;
  return j.dump(2) + "\n";
}

std::string summary_path_for(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return csv_path.substr(0, dot) + ".json";
  }
  return csv_path + ".json";
}

void save_result(const ExperimentResult& result, const std::string& csv_path) {
  {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open `" + csv_path + "` for writing");
    write_results_csv(csv, result.records);
    if (!csv) throw std::runtime_error("write to `" + csv_path + "` failed");
  }
  const std::string json_path = summary_path_for(csv_path);
  std::ofstream json(json_path, std::ios::binary);
  if (!json) throw std::runtime_error("cannot open `" + json_path + "` for writing");
  json << summary_json(result);
  if (!json) throw std::runtime_error("write to `" + json_path + "` failed");
}

std::vector<TrialRecord> read_results_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw CsvError(1, "empty file (missing header)");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw CsvError(line_no, "unexpected header `" + line + "`");

  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw CsvError(line_no, "expected 8 fields, found " + std::to_string(f.size()));
    TrialRecord r;
    if (!parse_number(f[0], r.trial)) throw CsvError(line_no, "bad trial index `" + f[0] + "`");
    if (!parse_number(f[1], r.count)) throw CsvError(line_no, "bad count `" + f[1] + "`");
    for (int idx : {2, 3}) {
      const auto& text = f[static_cast<std::size_t>(idx)];
      if (text.empty()) continue;
      double v = 0.0;
      if (!parse_number(text, v)) throw CsvError(line_no, "bad radius `" + text + "`");
      (idx == 2 ? r.rho_delta : r.rho_kappa) = v;
    }
    if (!parse_number(f[4], r.r_n)) throw CsvError(line_no, "bad r_n `" + f[4] + "`");
    if (!parse_flag(f[5], r.below_delta) || !parse_flag(f[6], r.below_kappa) || !parse_flag(f[7], r.equal)) {
      throw CsvError(line_no, "boolean fields must be 0 or 1");
    }
    records.push_back(r);
  }
  if (records.empty()) throw CsvError(line_no, "no trial rows");
  return records;
}

std::vector<std::string> check_records(std::span<const TrialRecord> records) {
  std::vector<std::string> problems;
  for (const auto& r : records) {
    const std::string tag = "trial " + std::to_string(r.trial) + ": ";
    if (r.rho_delta.has_value() != r.rho_kappa.has_value()) {
      problems.push_back(tag + "exactly one radius is undefined");
    }
    if (r.rho_delta && r.rho_kappa && *r.rho_kappa < *r.rho_delta) {
      problems.push_back(tag + "rho_kappa < rho_delta");
    }
    if (r.below_kappa && !r.below_delta) problems.push_back(tag + "below_kappa without below_delta");
    if (r.below_delta != (r.rho_delta && *r.rho_delta <= r.r_n)) {
      problems.push_back(tag + "below_delta disagrees with rho_delta <= r_n");
    }
    if (r.below_kappa != (r.rho_kappa && *r.rho_kappa <= r.r_n)) {
      problems.push_back(tag + "below_kappa disagrees with rho_kappa <= r_n");
    }
    if (r.equal != (r.rho_delta && r.rho_kappa && *r.rho_delta == *r.rho_kappa)) {
      problems.push_back(tag + "equal flag disagrees with the radii");
    }
  }
  return problems;
}

}  // namespace rgg
