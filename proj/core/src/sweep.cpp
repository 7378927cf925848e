#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "pspin/errors.hpp"
#include "pspin/harness.hpp"

namespace pspin {

namespace {

double param(const AlgorithmSpec& spec, const char* key, double fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

int int_param(const AlgorithmSpec& spec, const char* key, int fallback) {
  const double v = param(spec, key, fallback);
  if (v != std::floor(v)) throw DomainError(std::string("parameter '") + key + "' must be an integer");
  return static_cast<int>(v);
}

}  // namespace

OptimizerReport run_algorithm(const AlgorithmSpec& spec, const Hamiltonian& h, double delta, std::uint64_t seed) {
  if (spec.id == "hessian-ascent") return hessian_ascent(h, delta, seed);
  if (spec.id == "iamp") {
    IampOptions o;
    if (spec.params.count("t0")) o.t0 = spec.params.at("t0");
    o.normalization = param(spec, "empirical", 1.0) != 0.0 ? IampNormalization::Empirical
                                                          : IampNormalization::StateEvolution;
    o.allow_heuristic_hypercube = param(spec, "heuristic_hypercube", 0.0) != 0.0;
    o.record_state_evolution = false;
    return iamp(h, delta, seed, o);
  }
  if (spec.id == "gradient-ascent") {
    GradientAscentOptions o;
    o.step = param(spec, "step", o.step);
    o.iters = int_param(spec, "iters", o.iters);
    return gradient_ascent(h, seed, o);
  }
  if (spec.id == "simulated-annealing") {
    AnnealingOptions o;
    o.schedule.beta_start = param(spec, "beta_start", o.schedule.beta_start);
    o.schedule.beta_end = param(spec, "beta_end", o.schedule.beta_end);
    o.schedule.langevin_step = param(spec, "langevin_step", o.schedule.langevin_step);
    o.iters = int_param(spec, "iters", o.iters);
    return simulated_annealing(h, seed, o);
  }
  throw DomainError("unknown algorithm '" + spec.id + "'");
}

RunOutput run_replicate(const ExperimentConfig& cfg, int n, int replicate, const Hamiltonian* shared) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t iseed = cfg.instance_seed_for(replicate);
  const std::uint64_t aseed = cfg.algorithm_seed_for(replicate);
  std::optional<Hamiltonian> own;
  if (!shared) own.emplace(Hamiltonian::sample(cfg.make_mixture(), n, iseed, cfg.domain, cfg.memory_cap));
  const Hamiltonian& h = shared ? *shared : *own;

  const OptimizerReport rep = run_algorithm(cfg.algorithm, h, cfg.delta, aseed);

  RunOutput out;
  out.config = rep.final_config;
  RunRecord& r = out.record;
  r.config_hash = cfg.hash();
  r.algorithm = cfg.algorithm.id;
  r.n = n;
  r.replicate = replicate;
  r.delta = cfg.delta;
  r.instance_seed = h.seed();
  r.algorithm_seed = aseed;
  r.energy_per_n = rep.energy_per_n;
  r.target_alg = rep.target_alg;
  r.target_opt = rep.target_opt_upper;
  r.heuristic = rep.heuristic;
  r.git_describe = git_describe();
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<RunOutput> run_sweep(const ExperimentConfig& cfg, const std::function<void(const RunOutput&)>& append) {
  cfg.validate();
  struct Task {
    int n;
    int replicate;
    const Hamiltonian* shared;
  };

  // Same-instance mode: one immutable instance per N, shared by all replicates.
  std::vector<Hamiltonian> instances;
  instances.reserve(cfg.n_values.size());
  std::vector<Task> tasks;
  for (int n : cfg.n_values) {
    const Hamiltonian* shared = nullptr;
    if (cfg.seed_mode == SeedMode::SameInstance) {
      instances.push_back(Hamiltonian::sample(cfg.make_mixture(), n, cfg.instance_seed, cfg.domain, cfg.memory_cap));
      shared = &instances.back();
    }
    for (int r = 0; r < cfg.replicates; ++r) tasks.push_back({n, r, shared});
  }

  std::vector<std::optional<RunOutput>> slots(tasks.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || abort.load()) break;
      try {
        RunOutput out = run_replicate(cfg, tasks[i].n, tasks[i].replicate, tasks[i].shared);
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = std::move(out);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        abort = true;
      }
      cv.notify_all();
    }
  };

  const int workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);

  // Single appender: this thread writes results strictly in task order.
  std::vector<RunOutput> results;
  results.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return slots[i].has_value() || error; });
    if (!slots[i]) break;
    RunOutput out = std::move(*slots[i]);
    slots[i].reset();
    lock.unlock();
    if (append) append(out);
    results.push_back(std::move(out));
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace pspin
