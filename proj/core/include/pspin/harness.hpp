#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pspin/hamiltonian.hpp"
#include "pspin/mixture.hpp"
#include "pspin/optimizers.hpp"

namespace pspin {

/// How replicate i derives its seeds from the bases.
///  SameInstance: instance seed fixed, algorithm seed = base + i.
///  Iid:          both seeds = base + i.
enum class SeedMode { SameInstance, Iid };

std::string to_string(SeedMode mode);
SeedMode parse_seed_mode(const std::string& text);

struct AlgorithmSpec {
  std::string id = "hessian-ascent";
  std::map<std::string, double> params;
};

/// Algorithms the harness can run and the parameters each accepts.
const std::map<std::string, std::vector<std::string>>& known_algorithms();

/// Experiment description. Stored as JSON:
///
///   {
///     "mixture": {"2": 1.0, "3": 0.5},
///     "domain": "sphere",
///     "n": [150, 300],
///     "delta": 0.02,
///     "algorithm": {"id": "hessian-ascent", "params": {}},
///     "instance_seed": 1,
///     "algorithm_seed": 1000,
///     "replicates": 20,
///     "seed_mode": "iid",
///     "output": "runs.jsonl",
///     "memory_cap": 2147483648,
///     "threads": 1,
///     "rho_grid": [0, 0.25, 0.5, 0.75, 1],
///     "overlap_std_bound": 0.5,
///     "census_bin": 0.05
///   }
///
/// Every key is optional except "mixture"; unknown keys are rejected.
struct ExperimentConfig {
  std::map<int, double> mixture;
  SpinDomain domain = SpinDomain::Sphere;
  std::vector<int> n_values{100};
  double delta = 0.02;
  AlgorithmSpec algorithm;
  std::uint64_t instance_seed = 1;
  std::uint64_t algorithm_seed = 1000;
  int replicates = 1;
  SeedMode seed_mode = SeedMode::Iid;
  std::string output;
  std::size_t memory_cap = memory_cap_from_env();
  int threads = 1;
  std::vector<double> rho_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  double overlap_std_bound = 0.5;
  double census_bin = 0.05;

  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  /// Sorted-key JSON of every field that affects results (output path and
  /// thread count are left out). The digest below is taken over this string.
  std::string canonical_json() const;
  /// FNV-1a 64 of canonical_json(), as 16 hex digits.
  std::string hash() const;

  Mixture make_mixture() const { return Mixture(mixture); }

  /// Throws DomainError for unknown algorithms or parameters, out-of-range
  /// values, and N that would exceed the memory cap at the largest degree.
  void validate() const;

  std::uint64_t instance_seed_for(int replicate) const;
  std::uint64_t algorithm_seed_for(int replicate) const;
};

/// Bytes needed for the symmetrized tensors of `m` at size n.
std::size_t required_storage_bytes(const Mixture& m, int n);

std::string git_describe();

struct RunRecord {
  std::string config_hash;
  std::string algorithm;
  int n = 0;
  int replicate = 0;
  double delta = 0.0;
  std::uint64_t instance_seed = 0;
  std::uint64_t algorithm_seed = 0;
  double energy_per_n = 0.0;
  double target_alg = 0.0;
  double target_opt = 0.0;
  bool heuristic = false;
  double wall_time = 0.0;
  std::string git_describe;

  /// One JSON object, no trailing newline. NaN targets are written as null.
  std::string to_json_line() const;
  static RunRecord from_json_line(const std::string& line);

  /// Equality over every field except wall time.
  bool same_result(const RunRecord& other) const;
};

struct RunOutput {
  RunRecord record;
  Configuration config;
};

/// Run the configured algorithm on one Hamiltonian.
OptimizerReport run_algorithm(const AlgorithmSpec& spec, const Hamiltonian& h, double delta, std::uint64_t seed);

/// Replicate `replicate` at size n. When `shared` is given it is used as the
/// instance (same-instance mode).
RunOutput run_replicate(const ExperimentConfig& cfg, int n, int replicate, const Hamiltonian* shared = nullptr);

/// All (n, replicate) runs on a pool of cfg.threads workers. Each finished
/// run is handed to `append` from a single thread, in (n, replicate) order.
std::vector<RunOutput> run_sweep(const ExperimentConfig& cfg,
                                 const std::function<void(const RunOutput&)>& append = {});

/// Writes records as JSON lines, one per run, flushing after each.
class RecordAppender {
 public:
  explicit RecordAppender(std::ostream& out) : out_(&out) {}
  void operator()(const RunOutput& r);
  int count() const { return count_; }

 private:
  std::ostream* out_;
  int count_ = 0;
};

double overlap(const Configuration& a, const Configuration& b);

struct OverlapHistogram {
  double bin_width = 0.0;
  std::vector<double> edges;  // bins [edges[i], edges[i+1]); the last bin is closed
  std::vector<int> counts;
  std::vector<double> overlaps;  // all pairwise values, a < b
  SeedMode mode = SeedMode::Iid;

  void write_csv(std::ostream& out) const;  // columns lo,hi,count
};

/// Histogram of pairwise overlaps over bins of width `bin_width` on [-1,1].
/// Needs at least 20 configurations.
OverlapHistogram overlap_histogram(const std::vector<Configuration>& pool, double bin_width,
                                   SeedMode mode = SeedMode::Iid);

/// Runs cfg.replicates optimizations at cfg.n_values[0] in cfg.seed_mode and
/// bins their pairwise overlaps.
OverlapHistogram overlap_census(const ExperimentConfig& cfg);

struct ConcentrationRow {
  double rho = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double std_error = 0.0;
  std::vector<double> overlaps;
};

struct ConcentrationTable {
  std::vector<ConcentrationRow> rows;
  bool monotone = false;  // mean[k+1] >= mean[k] - SE of the difference
  bool std_within_bound = false;

  void write_csv(std::ostream& out) const;  // columns rho,mean,std,se,pairs
};

/// For every rho, cfg.replicates correlated pairs at cfg.n_values[0]; both
/// copies are optimized with the same algorithm seed.
ConcentrationTable overlap_concentration(const ExperimentConfig& cfg);

struct InvariantResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// Fast self-checks across the library; each entry reports one invariant.
std::vector<InvariantResult> run_invariant_suite();

}  // namespace pspin
