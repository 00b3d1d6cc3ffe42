// Experiment configuration: one versioned JSON document drives every command.
// Parsing is strict — unknown keys are rejected by their full path — and the
// loaded config carries a hash of the source bytes so manifests can tie
// artifacts back to the exact inputs.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cerl.hpp"
#include "exec_env.hpp"
#include "flow_sim.hpp"
#include "search.hpp"
#include "utility.hpp"

namespace execsim {

enum class AgentKind { Random, PovBaseline, FlatCerl, Hierarchical };

const char* to_string(AgentKind k);

struct TrainingConfig {
  std::int64_t episodes = 2000;
  std::uint64_t seed = 1;
  LearningRate lr = LearningRate::harmonic();
  Exploration exploration = Exploration::linear(0.2, 0.0);
};

struct SearchConfig {
  bool present = false;  // the `search` section appeared in the config
  int n_initial = 16;
  int eta = 4;
  std::vector<std::int64_t> episodes_per_rung = {1, 2, 4};
  std::uint64_t study_seed = 1;

  HalvingConfig halving() const {
    HalvingConfig h;
    h.n_initial = n_initial;
    h.eta = eta;
    h.episodes_per_rung = episodes_per_rung;
    return h;
  }
};

struct SimulateConfig {
  int steps = 200;
};

struct ExperimentConfig {
  int schema_version = 1;
  FlowConfig flow;
  ParentOrder parent;
  EnvConfig env;
  UtilityFn utility;  // identity unless configured
  AgentKind agent = AgentKind::Random;
  TrainingConfig training;
  SearchConfig search;
  SimulateConfig simulate;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::string output_dir = "out";
  std::string config_hash;  // fnv1a-64 of the source text, 16 hex chars

  void validate() const;  // throws ConfigError naming the field
};

// Parses and validates a config document; `parse_config` hashes the given
// text, `load_config` reads the file first. Errors carry the key path
// (unknown or ill-typed keys) or the field constraint that failed.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

std::string fnv1a64_hex(std::string_view bytes);

}  // namespace execsim
