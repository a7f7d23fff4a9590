// Monte Carlo harness: seeded trials of critical radii against the
// theoretical threshold r_n, with CSV/JSON persistence.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rgg/geometry.hpp"
#include "rgg/graph.hpp"
#include "rgg/spatial_index.hpp"
#include "rgg/theory.hpp"

namespace rgg {

struct ExperimentConfig {
  std::string region = "cube";
  std::uint64_t n = 2000;
  int k = 1;
  double c = 0.0;
  ProcessKind process = ProcessKind::kBinomial;
  std::uint64_t trials = 100;
  std::uint64_t master_seed = 42;
  int workers = 1;
  std::string output_path;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const ExperimentConfig& config);

std::string to_string(ProcessKind kind);
ProcessKind parse_process_kind(const std::string& token);

struct TrialRecord {
  std::uint64_t trial = 0;
  std::size_t count = 0;
  std::optional<double> rho_delta;  // empty when the sample is too small
  std::optional<double> rho_kappa;
  double r_n = 0.0;
  bool below_delta = false;
  bool below_kappa = false;
  bool equal = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct Aggregates {
  double p_hat_delta = 0.0;
  double p_hat_kappa = 0.0;
  double se_delta = 0.0;
  double se_kappa = 0.0;
  double equality_rate = 0.0;

  friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

struct ExperimentResult {
  ExperimentConfig config;
  theory::TheoryParams theory;
  std::vector<TrialRecord> records;
  Aggregates aggregates;
  double theory_limit = 0.0;
};

/// A trial that threw; carries the failing trial index.
class TrialError : public std::runtime_error {
 public:
  TrialError(std::uint64_t trial, const std::string& what)
      : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}
  std::uint64_t trial() const { return trial_; }

 private:
  std::uint64_t trial_;
};

/// Malformed results file; `line` is 1-based.
class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Independent engine for (master_seed, trial), derived by SplitMix64
/// mixing so the stream does not depend on scheduling.
std::mt19937_64 trial_stream(std::uint64_t master_seed, std::uint64_t trial);

PointSample sample_binomial_process(const ConvexRegion& region, std::uint64_t n, std::mt19937_64& rng);

/// Poisson(intensity * volume) points, then that many uniform points.
PointSample sample_poisson_process(const ConvexRegion& region, double intensity, std::mt19937_64& rng);

/// Region, theory chain (c -> xi -> r_n) and grid cell size resolved once
/// per configuration.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const ConvexRegion& region() const { return region_; }
  const theory::TheoryParams& params() const { return params_; }
  double cell_size() const { return cell_size_; }

  TrialRecord run_trial(std::uint64_t trial) const;
  ExperimentResult run() const;

 private:
  ExperimentConfig config_;
  ConvexRegion region_;
  theory::TheoryParams params_;
  double cell_size_ = 0.0;
};

TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t trial);
ExperimentResult run_experiment(const ExperimentConfig& config);

enum class RadiusField { kDelta, kKappa };

/// Fraction of records whose radius is defined and <= r.
double empirical_cdf_at(std::span<const TrialRecord> records, RadiusField field, double r);

double equality_rate(std::span<const TrialRecord> records);

/// Proportions with normal-approximation standard errors.
Aggregates aggregate(std::span<const TrialRecord> records);

// --- Persistence ----------------------------------------------------------

inline constexpr const char* kCsvHeader = "trial,count,rho_delta,rho_kappa,r_n,below_delta,below_kappa,equal";

void write_results_csv(std::ostream& out, std::span<const TrialRecord> records);
std::string summary_json(const ExperimentResult& result);

/// JSON path paired with a CSV path: same stem, `.json` extension.
std::string summary_path_for(const std::string& csv_path);

/// Writes the CSV and its summary JSON. Throws std::runtime_error on I/O failure.
void save_result(const ExperimentResult& result, const std::string& csv_path);

/// Parses a results CSV. Throws CsvError naming the offending line.
std::vector<TrialRecord> read_results_csv(std::istream& in);

/// Invariant violations in parsed records, one message per problem.
std::vector<std::string> check_records(std::span<const TrialRecord> records);

/// Shortest decimal that round-trips to the same double.
std::string shortest_decimal(double v);

}  // namespace rgg
