// Gradient-free parameter search: uniform sampling over a small typed
// parameter space and successive-halving early stopping with a resumable
// ledger and optional thread-level trial parallelism.
#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "utility.hpp"

namespace execsim {

struct ParamDim {
  enum class Kind { Continuous, Categorical };
  Kind kind = Kind::Continuous;
  std::string name;
  double lo = 0.0, hi = 1.0;        // continuous bounds, lo < hi
  std::vector<std::string> values;  // categorical labels

  static ParamDim continuous(std::string name, double lo, double hi) {
    ParamDim d;
    d.kind = Kind::Continuous;
    d.name = std::move(name);
    d.lo = lo;
    d.hi = hi;
    return d;
  }
  static ParamDim categorical(std::string name,
                              std::vector<std::string> values) {
    ParamDim d;
    d.kind = Kind::Categorical;
    d.name = std::move(name);
    d.values = std::move(values);
    return d;
  }
};

struct ParamSpace {
  std::vector<ParamDim> dims;
  void validate() const;  // throws ConfigError naming the dim
};

// One sampled coordinate: `number` holds the continuous value, or the chosen
// index for categorical dims (with `label` carrying the chosen value).
struct ParamValue {
  double number = 0.0;
  std::string label;

  bool operator==(const ParamValue&) const = default;
};
using ParamPoint = std::vector<ParamValue>;

// Episodic objective: the value of one episode at this parameter point under
// this seed. Must be a pure function of (params, seed) and thread-safe when
// the study runs with more than one worker.
using Objective =
    std::function<double(const ParamPoint& params, std::uint64_t seed)>;

// n points sampled uniformly and independently per dim; deterministic in
// (space, n, seed) and independent of evaluation order.
std::vector<ParamPoint> sample_params(const ParamSpace& space, int n,
                                      std::uint64_t seed);

// Evaluate `episodes` episodes for every seed (episode seeds derive from the
// given seed and the episode index) and return the certainty-equivalent of
// the collected values under `u` — the plain mean when `u` is null or the
// identity.
double run_trial(const Objective& objective, const ParamPoint& params,
                 const std::vector<std::uint64_t>& seeds, int episodes,
                 const UtilityFn* u);

struct HalvingConfig {
  int n_initial = 16;
  int eta = 4;  // reduction factor, >= 2
  // additional episodes evaluated per surviving trial at each rung
  // (non-decreasing); estimates are cumulative across rungs
  std::vector<std::int64_t> episodes_per_rung = {1};

  int rungs() const { return static_cast<int>(episodes_per_rung.size()); }
  void validate() const;  // throws ConfigError
};

struct TrialRecord {
  int trial_index = 0;
  int rung = 0;
  ParamPoint params;
  std::int64_t episodes = 0;  // cumulative episodes evaluated so far
  double utility = 0.0;       // cumulative CE estimate (NaN if nothing ran)
  std::string status;         // running | stopped | completed
  std::string note;           // failure diagnostic, empty otherwise
};

struct StudyResult {
  std::vector<TrialRecord> ledger;  // ordered by (rung, trial_index)
  int best_trial = -1;
  ParamPoint best_params;
  double best_utility = 0.0;
};

// Successive halving over n_initial uniformly sampled points. Rung r
// evaluates episodes_per_rung[r] further episodes per surviving trial with
// episode seeds derive_key(study_seed, trial, rung, k), folds them into the
// trial's cumulative CE estimate, and keeps the top ceil(n/eta) trials
// (ties toward the lower trial index; failed trials rank below everything
// and stay stopped). The ledger gains one row per (trial, rung) evaluated.
//
// `workers` > 1 evaluates trials of a rung concurrently; results are
// identical to the serial schedule. When `checkpoint_path` is nonempty the
// ledger is rewritten atomically after every rung, and `resume` restarts an
// interrupted study from the last finished rung after validating that the
// checkpoint matches this study's sampled trials.
StudyResult successive_halving(const Objective& objective,
                               const ParamSpace& space,
                               const HalvingConfig& cfg, const UtilityFn* u,
                               std::uint64_t study_seed, int workers = 1,
                               const std::string& checkpoint_path = "",
                               bool resume = false);

// Ledger CSV: trial_index,rung,<dim names...>,episodes,utility,status,note.
void save_ledger_csv(std::ostream& out, const ParamSpace& space,
                     const std::vector<TrialRecord>& ledger);
std::vector<TrialRecord> load_ledger_csv(std::istream& in,
                                         const ParamSpace& space);

}  // namespace execsim
