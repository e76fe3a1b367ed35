#include "macmarl/envs/factory.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "macmarl/envs/box_pushing.hpp"
#include "macmarl/envs/capture_target.hpp"
#include "macmarl/envs/warehouse.hpp"

namespace macmarl::envs {

int parse_grid_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) return parse_int("grid", text);
  const int w = parse_int("grid", text.substr(0, x));
  const int h = parse_int("grid", text.substr(x + 1));
  if (w != h) throw ConfigError("only square grids are supported, got '" + text + "'");
  return w;
}

bool apply_env_key(EnvConfig& c, const std::string& key, const std::string& value) {
  if (key == "env") {
    if (value != "capture_target" && value != "box_pushing" && value != "warehouse")
      throw ConfigError("unknown environment '" + value + "'");
    c.env = value;
  } else if (key == "grid") {
    c.grid = parse_grid_size(value);
  } else if (key == "horizon") {
    c.horizon = parse_int(key, value);
  } else if (key == "speed") {
    c.speed = parse_double(key, value);
  } else if (key == "discount") {
    c.discount = parse_double(key, value);
  } else if (key == "primitive") {
    c.primitive = parse_bool(key, value);
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else {
    return false;
  }
  return true;
}

EnvConfig parse_scenario(const KeyValues& kv) {
  EnvConfig c;
  for (const auto& [key, value] : kv)
    if (!apply_env_key(c, key, value)) throw ConfigError("unknown scenario key '" + key + "'");
  return c;
}

EnvConfig load_scenario(const std::string& path) { return parse_scenario(read_key_value_file(path)); }

void write_env_keys(std::ostream& out, const EnvConfig& c) {
  out << "env = " << c.env << '\n'
      << "grid = " << c.grid << '\n'
      << "horizon = " << c.horizon << '\n'
      << "speed = " << c.speed << '\n'
      << "discount = " << c.discount << '\n'
      << "primitive = " << (c.primitive ? "true" : "false") << '\n';
}

double default_discount(const std::string& env) {
  if (env == "box_pushing") return 0.98;
  if (env == "capture_target" || env == "warehouse") return 0.95;
  throw ConfigError("unknown environment '" + env + "'");
}

std::unique_ptr<EnvModel> make_env(const EnvConfig& c) {
  const double gamma = c.discount < 0.0 ? default_discount(c.env) : c.discount;
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("discount must lie in [0,1]");
  try {
    if (c.env == "capture_target") {
      CaptureTargetConfig cfg;
      cfg.grid_size = c.grid;
      if (c.horizon > 0) cfg.horizon = c.horizon;
      cfg.discount = gamma;
      cfg.primitive_actions = c.primitive;
      return std::make_unique<CaptureTarget>(cfg);
    }
    if (c.env == "box_pushing") {
      BoxPushingConfig cfg;
      cfg.grid_size = c.grid;
      if (c.horizon > 0) cfg.horizon = c.horizon;
      cfg.discount = gamma;
      cfg.primitive_actions = c.primitive;
      return std::make_unique<BoxPushing>(cfg);
    }
    if (c.env == "warehouse") {
      if (c.primitive) throw ConfigError("warehouse has no primitive-action variant");
      WarehouseConfig cfg;
      if (c.horizon > 0) cfg.horizon = c.horizon;
      cfg.speed = c.speed;
      cfg.discount = gamma;
      return std::make_unique<Warehouse>(cfg);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown environment '" + c.env + "'");
}

void write_trajectory_record(std::ostream& out, const TrajectoryRecord& r) {
  nlohmann::json j;
  j["tick"] = r.tick;
  j["action"] = r.joint_action;
  j["reward"] = r.reward;
  j["term"] = r.term_flags;
  out << j.dump() << '\n';
}

std::vector<TrajectoryRecord> read_trajectory_log(std::istream& in) {
  std::vector<TrajectoryRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    TrajectoryRecord r;
    r.tick = j.at("tick").get<int>();
    r.joint_action = j.at("action").get<std::vector<int>>();
    r.reward = j.at("reward").get<double>();
    r.term_flags = j.at("term").get<std::vector<bool>>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace macmarl::envs
