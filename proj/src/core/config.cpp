#include "config.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

namespace execsim {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + " " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known |= it.key() == k;
    if (!known) {
      throw ConfigError("config: unknown key '" + join(prefix, it.key()) + "'");
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& section(const json& obj, const std::string& path) {
  if (!obj.is_object()) bad(path, "must be an object");
  return obj;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "must be an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  bad(path, "must be a non-negative integer");
}

int as_int(const json& v, const std::string& path) {
  const std::int64_t x = as_integer(v, path);
  if (x < INT32_MIN || x > INT32_MAX) bad(path, "is out of range");
  return static_cast<int>(x);
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "must be a string");
  return v.get<std::string>();
}

FlowConfig parse_flow(const json& j) {
  const json& obj = section(j, "flow");
  check_keys(obj, "flow",
             {"limit_rate", "market_rate", "cancel_rate", "depth_geom_p",
              "size_dist", "init_mid", "init_depth_qty", "seed_levels"});
  FlowConfig f;
  if (const json* v = find(obj, "limit_rate"))
    f.limit_rate = as_number(*v, "flow.limit_rate");
  if (const json* v = find(obj, "market_rate"))
    f.market_rate = as_number(*v, "flow.market_rate");
  if (const json* v = find(obj, "cancel_rate"))
    f.cancel_rate = as_number(*v, "flow.cancel_rate");
  if (const json* v = find(obj, "depth_geom_p"))
    f.depth_geom_p = as_number(*v, "flow.depth_geom_p");
  if (const json* v = find(obj, "init_mid"))
    f.init_mid = as_integer(*v, "flow.init_mid");
  if (const json* v = find(obj, "init_depth_qty"))
    f.init_depth_qty = as_integer(*v, "flow.init_depth_qty");
  if (const json* v = find(obj, "seed_levels"))
    f.seed_levels = as_int(*v, "flow.seed_levels");
  if (const json* v = find(obj, "size_dist")) {
    if (!v->is_array() || v->empty()) {
      bad("flow.size_dist", "must be a nonempty array");
    }
    f.size_dist.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string path = "flow.size_dist[" + std::to_string(i) + "]";
      const json& e = section((*v)[i], path);
      check_keys(e, path, {"size", "prob"});
      const json* size = find(e, "size");
      const json* prob = find(e, "prob");
      if (!size || !prob) bad(path, "needs size and prob");
      f.size_dist.push_back({as_integer(*size, path + ".size"),
                             as_number(*prob, path + ".prob")});
    }
  }
  return f;
}

ParentOrder parse_parent(const json& j) {
  const json& obj = section(j, "parent");
  check_keys(obj, "parent", {"side", "total_qty", "horizon", "pov_target"});
  ParentOrder p;
  if (const json* v = find(obj, "side")) {
    const std::string s = as_string(*v, "parent.side");
    if (s == "buy") {
      p.side = Side::Buy;
    } else if (s == "sell") {
      p.side = Side::Sell;
    } else {
      bad("parent.side", "must be \"buy\" or \"sell\"");
    }
  }
  if (const json* v = find(obj, "total_qty"))
    p.total_qty = as_integer(*v, "parent.total_qty");
  if (const json* v = find(obj, "horizon"))
    p.horizon = as_int(*v, "parent.horizon");
  if (const json* v = find(obj, "pov_target"))
    p.pov_target = as_number(*v, "parent.pov_target");
  return p;
}

EnvConfig parse_env(const json& j) {
  const json& obj = section(j, "env");
  check_keys(obj, "env",
             {"levels", "small_child_qty", "large_child_qty", "pov_band"});
  EnvConfig e;
  if (const json* v = find(obj, "levels")) e.levels = as_int(*v, "env.levels");
  if (const json* v = find(obj, "small_child_qty"))
    e.small_child_qty = as_integer(*v, "env.small_child_qty");
  if (const json* v = find(obj, "large_child_qty"))
    e.large_child_qty = as_integer(*v, "env.large_child_qty");
  if (const json* v = find(obj, "pov_band"))
    e.pov_band = as_number(*v, "env.pov_band");
  return e;
}

UtilityFn parse_utility(const json& j) {
  const json& obj = section(j, "utility");
  const json* kind = find(obj, "kind");
  const std::string k =
      kind ? as_string(*kind, "utility.kind") : std::string("identity");
  if (k == "identity") {
    check_keys(obj, "utility", {"kind"});
    return UtilityFn::identity();
  }
  if (k == "exponential") {
    check_keys(obj, "utility", {"kind", "lambda"});
    const json* lambda = find(obj, "lambda");
    if (!lambda) bad("utility.lambda", "is required for exponential utility");
    const double value = as_number(*lambda, "utility.lambda");
    if (!(value > 0.0)) bad("utility.lambda", "must be > 0");
    return UtilityFn::exponential(value);
  }
  if (k == "power") {
    check_keys(obj, "utility", {"kind", "eta"});
    const json* eta = find(obj, "eta");
    if (!eta) bad("utility.eta", "is required for power utility");
    const double value = as_number(*eta, "utility.eta");
    if (!(value > 0.0) || value > 1.0) bad("utility.eta", "must be in (0, 1]");
    return UtilityFn::power(value);
  }
  bad("utility.kind", "must be \"identity\", \"exponential\", or \"power\"");
}

AgentKind parse_agent(const json& v) {
  const std::string s = as_string(v, "agent");
  if (s == "random") return AgentKind::Random;
  if (s == "pov_baseline") return AgentKind::PovBaseline;
  if (s == "flat_cerl") return AgentKind::FlatCerl;
  if (s == "hierarchical") return AgentKind::Hierarchical;
  bad("agent", "must be \"random\", \"pov_baseline\", \"flat_cerl\", or "
               "\"hierarchical\"");
}

TrainingConfig parse_training(const json& j) {
  const json& obj = section(j, "training");
  check_keys(obj, "training",
             {"episodes", "seed", "learning_rate", "exploration"});
  TrainingConfig t;
  if (const json* v = find(obj, "episodes"))
    t.episodes = as_integer(*v, "training.episodes");
  if (t.episodes < 0) bad("training.episodes", "must be >= 0");
  if (const json* v = find(obj, "seed")) t.seed = as_u64(*v, "training.seed");
  if (const json* v = find(obj, "learning_rate")) {
    const json& lr = section(*v, "training.learning_rate");
    check_keys(lr, "training.learning_rate", {"kind", "value"});
    const json* kind = find(lr, "kind");
    const std::string k =
        kind ? as_string(*kind, "training.learning_rate.kind")
             : std::string("harmonic");
    const json* value = find(lr, "value");
    if (k == "harmonic") {
      t.lr = LearningRate::harmonic(
          value ? as_number(*value, "training.learning_rate.value") : 1.0);
    } else if (k == "constant") {
      if (!value)
        bad("training.learning_rate.value", "is required for constant rates");
      const double alpha = as_number(*value, "training.learning_rate.value");
      if (!(alpha > 0.0) || alpha > 1.0)
        bad("training.learning_rate.value", "must be in (0, 1]");
      t.lr = LearningRate::constant(alpha);
    } else {
      bad("training.learning_rate.kind", "must be \"harmonic\" or \"constant\"");
    }
  }
  if (const json* v = find(obj, "exploration")) {
    const json& ex = section(*v, "training.exploration");
    check_keys(ex, "training.exploration", {"kind", "value", "start", "end"});
    const json* kind = find(ex, "kind");
    const std::string k = kind ? as_string(*kind, "training.exploration.kind")
                               : std::string("linear");
    auto eps_ok = [](double e) { return e >= 0.0 && e <= 1.0; };
    if (k == "constant") {
      const json* value = find(ex, "value");
      if (!value)
        bad("training.exploration.value", "is required for constant schedules");
      const double eps = as_number(*value, "training.exploration.value");
      if (!eps_ok(eps)) bad("training.exploration.value", "must be in [0, 1]");
      t.exploration = Exploration::constant(eps);
    } else if (k == "linear") {
      double start = 0.2, end = 0.0;
      if (const json* v2 = find(ex, "start"))
        start = as_number(*v2, "training.exploration.start");
      if (const json* v2 = find(ex, "end"))
        end = as_number(*v2, "training.exploration.end");
      if (!eps_ok(start)) bad("training.exploration.start", "must be in [0, 1]");
      if (!eps_ok(end)) bad("training.exploration.end", "must be in [0, 1]");
      t.exploration = Exploration::linear(start, end);
    } else {
      bad("training.exploration.kind", "must be \"linear\" or \"constant\"");
    }
  }
  return t;
}

SearchConfig parse_search(const json& j) {
  const json& obj = section(j, "search");
  check_keys(obj, "search",
             {"n_initial", "eta", "episodes_per_rung", "study_seed"});
  SearchConfig s;
  s.present = true;
  if (const json* v = find(obj, "n_initial"))
    s.n_initial = as_int(*v, "search.n_initial");
  if (const json* v = find(obj, "eta")) s.eta = as_int(*v, "search.eta");
  if (const json* v = find(obj, "study_seed"))
    s.study_seed = as_u64(*v, "search.study_seed");
  if (const json* v = find(obj, "episodes_per_rung")) {
    if (!v->is_array() || v->empty()) {
      bad("search.episodes_per_rung", "must be a nonempty array");
    }
    s.episodes_per_rung.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      s.episodes_per_rung.push_back(as_integer(
          (*v)[i], "search.episodes_per_rung[" + std::to_string(i) + "]"));
    }
  }
  return s;
}

SimulateConfig parse_simulate(const json& j) {
  const json& obj = section(j, "simulate");
  check_keys(obj, "simulate", {"steps"});
  SimulateConfig s;
  if (const json* v = find(obj, "steps")) s.steps = as_int(*v, "simulate.steps");
  return s;
}

std::vector<std::uint64_t> parse_seeds(const json& j) {
  const json& obj = section(j, "seeds");
  check_keys(obj, "seeds", {"base_seed", "count", "list"});
  const json* list = find(obj, "list");
  const json* base = find(obj, "base_seed");
  const json* count = find(obj, "count");
  if (list && (base || count)) {
    bad("seeds", "takes either list or (base_seed, count), not both");
  }
  std::vector<std::uint64_t> seeds;
  if (list) {
    if (!list->is_array()) bad("seeds.list", "must be an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      seeds.push_back(
          as_u64((*list)[i], "seeds.list[" + std::to_string(i) + "]"));
    }
  } else {
    const std::uint64_t b = base ? as_u64(*base, "seeds.base_seed") : 1;
    const std::int64_t n = count ? as_integer(*count, "seeds.count") : 10;
    if (n < 1) bad("seeds.count", "must be >= 1");
    for (std::int64_t i = 0; i < n; ++i) {
      seeds.push_back(b + static_cast<std::uint64_t>(i));
    }
  }
  return seeds;
}

}  // namespace

const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Random: return "random";
    case AgentKind::PovBaseline: return "pov_baseline";
    case AgentKind::FlatCerl: return "flat_cerl";
    case AgentKind::Hierarchical: return "hierarchical";
  }
  return "random";
}

void ExperimentConfig::validate() const {
  if (schema_version != 1) {
    throw ConfigError("config: schema_version " +
                      std::to_string(schema_version) +
                      " is not supported (this build reads version 1)");
  }
  flow.validate();
  parent.validate();
  env.validate();
  if (seeds.empty()) throw ConfigError("config: seeds must be nonempty");
  if (simulate.steps < 1) throw ConfigError("config: simulate.steps must be >= 1");
  if (output_dir.empty()) throw ConfigError("config: output_dir must be nonempty");
  if (search.present) search.halving().validate();
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: the document must be an object");
  check_keys(doc, "",
             {"schema_version", "flow", "parent", "env", "utility", "agent",
              "training", "search", "simulate", "seeds", "output_dir"});

  ExperimentConfig cfg;
  if (const json* v = find(doc, "schema_version"))
    cfg.schema_version = as_int(*v, "schema_version");
  if (const json* v = find(doc, "flow")) cfg.flow = parse_flow(*v);
  if (const json* v = find(doc, "parent")) cfg.parent = parse_parent(*v);
  if (const json* v = find(doc, "env")) cfg.env = parse_env(*v);
  if (const json* v = find(doc, "utility")) cfg.utility = parse_utility(*v);
  if (const json* v = find(doc, "agent")) cfg.agent = parse_agent(*v);
  if (const json* v = find(doc, "training")) cfg.training = parse_training(*v);
  if (const json* v = find(doc, "search")) cfg.search = parse_search(*v);
  if (const json* v = find(doc, "simulate")) cfg.simulate = parse_simulate(*v);
  if (const json* v = find(doc, "seeds")) cfg.seeds = parse_seeds(*v);
  if (const json* v = find(doc, "output_dir"))
    cfg.output_dir = as_string(*v, "output_dir");

  cfg.config_hash = fnv1a64_hex(json_text);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[17] = {};
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[h & 0xF];
    h >>= 4;
  }
  return std::string(buf, 16);
}

}  // namespace execsim
