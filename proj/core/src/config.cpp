#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pspin/errors.hpp"
#include "pspin/harness.hpp"

namespace pspin {

using nlohmann::json;

namespace {

const std::vector<std::string> kKeys = {"mixture",      "domain",    "n",          "delta",    "algorithm",
                                        "instance_seed", "algorithm_seed", "replicates", "seed_mode", "output",
                                        "memory_cap",   "threads",   "rho_grid",   "overlap_std_bound", "census_bin"};

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DomainError(std::string("config key '") + key + "': " + e.what());
  }
}

std::map<int, double> parse_mixture_json(const json& j) {
  if (j.is_string()) return Mixture::parse(j.get<std::string>()).coefficients();
  if (!j.is_object()) throw DomainError("config key 'mixture' must be an object {degree: coefficient} or a string");
  std::map<int, double> out;
  for (const auto& [k, v] : j.items()) {
    int degree = 0;
    try {
      std::size_t used = 0;
      degree = std::stoi(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      throw DomainError("mixture degree '" + k + "' is not an integer");
    }
    if (!v.is_number()) throw DomainError("mixture coefficient for degree " + k + " is not a number");
    out[degree] = v.get<double>();
  }
  return out;
}

}  // namespace

std::string to_string(SeedMode mode) { return mode == SeedMode::SameInstance ? "same-instance" : "iid"; }

SeedMode parse_seed_mode(const std::string& text) {
  if (text == "same-instance" || text == "same") return SeedMode::SameInstance;
  if (text == "iid" || text == "cross-instance") return SeedMode::Iid;
  throw DomainError("unknown seed mode '" + text + "' (expected same-instance|iid)");
}

const std::map<std::string, std::vector<std::string>>& known_algorithms() {
  static const std::map<std::string, std::vector<std::string>> algs = {
      {"hessian-ascent", {}},
      {"iamp", {"t0", "empirical", "heuristic_hypercube"}},
      {"gradient-ascent", {"step", "iters"}},
      {"simulated-annealing", {"beta_start", "beta_end", "langevin_step", "iters"}},
  };
  return algs;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) throw DomainError("unknown config key '" + k + "'");
  }
  if (!j.contains("mixture")) throw DomainError("config is missing 'mixture'");

  ExperimentConfig c;
  c.mixture = parse_mixture_json(j["mixture"]);
  if (j.contains("domain")) c.domain = parse_domain(get_as<std::string>(j, "domain"));
  if (j.contains("n")) {
    if (j["n"].is_array())
      c.n_values = get_as<std::vector<int>>(j, "n");
    else
      c.n_values = {get_as<int>(j, "n")};
  }
  if (j.contains("delta")) c.delta = get_as<double>(j, "delta");
  if (j.contains("algorithm")) {
    const json& a = j["algorithm"];
    if (a.is_string()) {
      c.algorithm.id = a.get<std::string>();
    } else if (a.is_object()) {
      for (const auto& [k, v] : a.items()) {
        if (k != "id" && k != "params") throw DomainError("unknown algorithm key '" + k + "'");
      }
      c.algorithm.id = get_as<std::string>(a, "id");
      if (a.contains("params")) c.algorithm.params = get_as<std::map<std::string, double>>(a, "params");
    } else {
      throw DomainError("config key 'algorithm' must be a string or {id, params}");
    }
  }
  if (j.contains("instance_seed")) c.instance_seed = get_as<std::uint64_t>(j, "instance_seed");
  if (j.contains("algorithm_seed")) c.algorithm_seed = get_as<std::uint64_t>(j, "algorithm_seed");
  if (j.contains("replicates")) c.replicates = get_as<int>(j, "replicates");
  if (j.contains("seed_mode")) c.seed_mode = parse_seed_mode(get_as<std::string>(j, "seed_mode"));
  if (j.contains("output")) c.output = get_as<std::string>(j, "output");
  if (j.contains("memory_cap")) c.memory_cap = get_as<std::size_t>(j, "memory_cap");
  if (j.contains("threads")) c.threads = get_as<int>(j, "threads");
  if (j.contains("rho_grid")) c.rho_grid = get_as<std::vector<double>>(j, "rho_grid");
  if (j.contains("overlap_std_bound")) c.overlap_std_bound = get_as<double>(j, "overlap_std_bound");
  if (j.contains("census_bin")) c.census_bin = get_as<double>(j, "census_bin");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  json mix = json::object();
  for (const auto& [k, v] : mixture) mix[std::to_string(k)] = v;
  j["mixture"] = mix;
  j["domain"] = to_string(domain);
  j["n"] = n_values;
  j["delta"] = delta;
  j["algorithm"] = {{"id", algorithm.id}, {"params", algorithm.params}};
  j["instance_seed"] = instance_seed;
  j["algorithm_seed"] = algorithm_seed;
  j["replicates"] = replicates;
  j["seed_mode"] = to_string(seed_mode);
  j["memory_cap"] = memory_cap;
  j["rho_grid"] = rho_grid;
  j["overlap_std_bound"] = overlap_std_bound;
  j["census_bin"] = census_bin;
  return j.dump();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t required_storage_bytes(const Mixture& m, int n) {
  double total = 0.0;
  for (int k : m.active_degrees()) {
    double count = 1.0;
    for (int j = 1; j <= k; ++j) count = count * (static_cast<double>(n) + k - j) / j;
    total += count * sizeof(double);
  }
  if (total > 1.8e19) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(total);
}

void ExperimentConfig::validate() const {
  const Mixture m(mixture);  // checks degrees and coefficients
  const auto& algs = known_algorithms();
  const auto it = algs.find(algorithm.id);
  if (it == algs.end()) {
    std::string names;
    for (const auto& [k, v] : algs) names += (names.empty() ? "" : "|") + k;
    throw DomainError("unknown algorithm '" + algorithm.id + "' (expected " + names + ")");
  }
  for (const auto& [k, v] : algorithm.params) {
    if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
      throw DomainError("algorithm '" + algorithm.id + "' has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw DomainError("parameter '" + k + "' is not finite");
  }
  if (n_values.empty()) throw DomainError("'n' must list at least one size");
  for (int n : n_values) {
    if (n < 2) throw DomainError("N must be >= 2, got " + std::to_string(n));
    const std::size_t bytes = required_storage_bytes(m, n);
    if (bytes > memory_cap) {
      throw DomainError("N=" + std::to_string(n) + " needs " + std::to_string(bytes) + " bytes at degree " +
                        std::to_string(m.max_degree()) + ", above the memory cap of " + std::to_string(memory_cap));
    }
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0,1]");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (threads < 1) throw DomainError("threads must be >= 1");
  if (rho_grid.empty()) throw DomainError("rho_grid must not be empty");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] >= 0.0 && rho_grid[i] <= 1.0)) throw DomainError("rho values must lie in [0,1]");
    if (i > 0 && rho_grid[i] <= rho_grid[i - 1]) throw DomainError("rho_grid must be strictly increasing");
  }
  if (!(overlap_std_bound > 0.0)) throw DomainError("overlap_std_bound must be positive");
  if (!(census_bin > 0.0 && census_bin <= 2.0)) throw DomainError("census_bin must lie in (0,2]");
}

std::uint64_t ExperimentConfig::instance_seed_for(int replicate) const {
  return seed_mode == SeedMode::Iid ? instance_seed + static_cast<std::uint64_t>(replicate) : instance_seed;
}

std::uint64_t ExperimentConfig::algorithm_seed_for(int replicate) const {
  return algorithm_seed + static_cast<std::uint64_t>(replicate);
}

}  // namespace pspin
