#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "pspin/errors.hpp"
#include "pspin/harness.hpp"

#ifndef PSPIN_GIT_DESCRIBE
#define PSPIN_GIT_DESCRIBE "unknown"
#endif

namespace pspin {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j, const char* key) {
  const json& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

std::string git_describe() { return PSPIN_GIT_DESCRIBE; }

std::string RunRecord::to_json_line() const {
  json j;
  j["config_hash"] = config_hash;
  j["algorithm"] = algorithm;
  j["n"] = n;
  j["replicate"] = replicate;
  j["delta"] = delta;
  j["instance_seed"] = instance_seed;
  j["algorithm_seed"] = algorithm_seed;
  j["energy_per_n"] = finite_or_null(energy_per_n);
  j["target_alg"] = finite_or_null(target_alg);
  j["target_opt"] = finite_or_null(target_opt);
  j["heuristic"] = heuristic;
  j["wall_time"] = wall_time;
  j["git_describe"] = git_describe;
  return j.dump();
}

RunRecord RunRecord::from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    RunRecord r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.n = j.at("n").get<int>();
    r.replicate = j.at("replicate").get<int>();
    r.delta = j.at("delta").get<double>();
    r.instance_seed = j.at("instance_seed").get<std::uint64_t>();
    r.algorithm_seed = j.at("algorithm_seed").get<std::uint64_t>();
    r.energy_per_n = number_or_nan(j, "energy_per_n");
    r.target_alg = number_or_nan(j, "target_alg");
    r.target_opt = number_or_nan(j, "target_opt");
    r.heuristic = j.at("heuristic").get<bool>();
    r.wall_time = j.at("wall_time").get<double>();
    r.git_describe = j.at("git_describe").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed run record: ") + e.what());
  }
}

bool RunRecord::same_result(const RunRecord& o) const {
  return config_hash == o.config_hash && algorithm == o.algorithm && n == o.n && replicate == o.replicate &&
         delta == o.delta && instance_seed == o.instance_seed && algorithm_seed == o.algorithm_seed &&
         same_double(energy_per_n, o.energy_per_n) && same_double(target_alg, o.target_alg) &&
         same_double(target_opt, o.target_opt) && heuristic == o.heuristic && git_describe == o.git_describe;
}

void RecordAppender::operator()(const RunOutput& r) {
  *out_ << r.record.to_json_line() << '\n';
  out_->flush();
  ++count_;
}

}  // namespace pspin
