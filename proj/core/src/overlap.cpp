#include <algorithm>
#include <cmath>
#include <ostream>

#include "pspin/errors.hpp"
#include "pspin/harness.hpp"

namespace pspin {

namespace {

constexpr int kMinCensusPool = 20;

}  // namespace

double overlap(const Configuration& a, const Configuration& b) {
  if (a.values.size() != b.values.size() || a.values.size() == 0)
    throw DomainError("overlap needs two configurations of the same positive length");
  return a.values.dot(b.values) / static_cast<double>(a.values.size());
}

void OverlapHistogram::write_csv(std::ostream& out) const {
  out << "lo,hi,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) out << edges[i] << ',' << edges[i + 1] << ',' << counts[i] << '\n';
}

OverlapHistogram overlap_histogram(const std::vector<Configuration>& pool, double bin_width, SeedMode mode) {
  if (static_cast<int>(pool.size()) < kMinCensusPool) {
    throw DomainError("overlap census needs a pool of at least " + std::to_string(kMinCensusPool) +
                      " runs, got " + std::to_string(pool.size()));
  }
  if (!(bin_width > 0.0 && bin_width <= 2.0)) throw DomainError("bin width must lie in (0,2]");
  OverlapHistogram hist;
  hist.bin_width = bin_width;
  hist.mode = mode;
  const int bins = static_cast<int>(std::ceil(2.0 / bin_width - 1e-12));
  for (int i = 0; i <= bins; ++i) hist.edges.push_back(std::min(1.0, -1.0 + i * bin_width));
  hist.counts.assign(bins, 0);
  for (std::size_t a = 0; a < pool.size(); ++a) {
    for (std::size_t b = a + 1; b < pool.size(); ++b) {
      const double q = overlap(pool[a], pool[b]);
      hist.overlaps.push_back(q);
      int idx = static_cast<int>(std::floor((q + 1.0) / bin_width));
      hist.counts[std::clamp(idx, 0, bins - 1)] += 1;
    }
  }
  return hist;
}

OverlapHistogram overlap_census(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.n_values = {cfg.n_values.at(0)};
  if (c.replicates < kMinCensusPool) {
    throw DomainError("overlap census needs at least " + std::to_string(kMinCensusPool) + " replicates, got " +
                      std::to_string(c.replicates));
  }
  std::vector<Configuration> pool;
  for (auto& r : run_sweep(c)) pool.push_back(std::move(r.config));
  return overlap_histogram(pool, c.census_bin, c.seed_mode);
}

void ConcentrationTable::write_csv(std::ostream& out) const {
  out << "rho,mean,std,se,pairs\n";
  for (const auto& r : rows)
    out << r.rho << ',' << r.mean << ',' << r.stddev << ',' << r.std_error << ',' << r.overlaps.size() << '\n';
}

ConcentrationTable overlap_concentration(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_values.at(0);
  const Mixture mix = cfg.make_mixture();
  ConcentrationTable table;
  for (double rho : cfg.rho_grid) {
    ConcentrationRow row;
    row.rho = rho;
    for (int p = 0; p < cfg.replicates; ++p) {
      const std::uint64_t iseed = cfg.instance_seed + static_cast<std::uint64_t>(p);
      const std::uint64_t aseed = cfg.algorithm_seed_for(p);
      const auto [h1, h2] = Hamiltonian::sample_correlated(mix, n, iseed, cfg.domain, rho, cfg.memory_cap);
      const auto r1 = run_algorithm(cfg.algorithm, h1, cfg.delta, aseed);
      const auto r2 = run_algorithm(cfg.algorithm, h2, cfg.delta, aseed);
      row.overlaps.push_back(overlap(r1.final_config, r2.final_config));
    }
    const double k = static_cast<double>(row.overlaps.size());
    double sum = 0.0;
    for (double q : row.overlaps) sum += q;
    row.mean = sum / k;
    double ss = 0.0;
    for (double q : row.overlaps) ss += (q - row.mean) * (q - row.mean);
    row.stddev = k > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
    row.std_error = row.stddev / std::sqrt(k);
    table.rows.push_back(std::move(row));
  }
  table.monotone = true;
  table.std_within_bound = true;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].stddev > cfg.overlap_std_bound) table.std_within_bound = false;
    if (i == 0) continue;
    const auto& a = table.rows[i - 1];
    const auto& b = table.rows[i];
    const double se = std::hypot(a.std_error, b.std_error);
    if (b.mean < a.mean - se) table.monotone = false;
  }
  return table;
}

}  // namespace pspin
