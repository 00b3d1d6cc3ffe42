// Certainty-equivalent decision making on finite problems: exact value
// iteration under the recursion
//
//   CE(s, a) = U⁻¹ Σ_{s'} p(s'|s,a) Σ_r p(r|s,a,s') U(r + max_{a'} CE(s', a'))
//
// plus its sample-based counterpart (CE Q-learning in utility space) and the
// certainty equivalent of a delayed Gaussian reward.
#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "common.hpp"
#include "rng.hpp"
#include "utility.hpp"

namespace execsim {

struct Transition {
  int next_state = 0;
  double prob = 0.0;
  OutcomeDist rewards;  // reward distribution given (s, a, s')
};

// Small exact decision process. Terminal states are absorbing with zero
// reward; their transition lists may be empty. With a horizon the process
// stops after that many steps regardless of state.
struct FiniteMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<std::vector<std::vector<Transition>>> transitions;  // [s][a]
  std::vector<bool> terminal;
  std::optional<int> horizon;

  // Throws invalid_argument naming the first violated constraint.
  void validate() const;
};

struct VISolution {
  std::vector<double> values;          // V(s) at the first decision
  std::vector<int> policy;             // greedy action per state, ties -> lowest index
  std::vector<std::vector<double>> q;  // Q(s, a) at the first decision
};

// Exact CE optimal values. Finite-horizon MDPs run backward induction;
// horizon-free MDPs with absorbing terminal states iterate to the fixpoint.
// A horizon-free MDP with no terminal state (or one whose iteration does not
// settle) is rejected with UnsupportedError.
VISolution ce_value_iteration(const FiniteMDP& mdp, const UtilityFn& u);

// ---- sample-based learning ------------------------------------------------

struct LearningRate {
  enum class Kind { Constant, Harmonic };
  Kind kind = Kind::Harmonic;
  double value = 1.0;  // constant alpha, or numerator of value / visit_count

  static LearningRate constant(double alpha) {
    return {Kind::Constant, alpha};
  }
  static LearningRate harmonic(double numerator = 1.0) {
    return {Kind::Harmonic, numerator};
  }

  double alpha(std::int64_t visit_count) const {
    return kind == Kind::Constant
               ? value
               : value / static_cast<double>(visit_count);
  }
};

struct Exploration {
  enum class Kind { Constant, Linear };
  Kind kind = Kind::Constant;
  double start = 0.1;
  double end = 0.1;

  static Exploration constant(double eps) { return {Kind::Constant, eps, eps}; }
  static Exploration linear(double start, double end) {
    return {Kind::Linear, start, end};
  }

  double epsilon(std::int64_t episode, std::int64_t total_episodes) const {
    if (kind == Kind::Constant || total_episodes <= 1) return start;
    const double frac =
        static_cast<double>(episode) / static_cast<double>(total_episodes - 1);
    return start + (end - start) * frac;
  }
};

// Discrete-state episodic environment contract for CE Q-learning. States are
// 0..n_states-1 and actions are column indices 0..n_actions-1 (callers with a
// restricted action subspace map columns to their own ids).
class DiscreteEnv {
 public:
  struct StepOutcome {
    int state = 0;
    double reward = 0.0;
    bool done = false;
  };

  virtual ~DiscreteEnv() = default;
  virtual int n_states() const = 0;
  virtual int n_actions() const = 0;
  virtual int reset(std::uint64_t seed) = 0;
  virtual StepOutcome step(int action) = 0;
};

// Learned CE action values. The table keeps the utility-space estimate
// M(s,a) ≈ E[U(r + best next CE)] alongside ce = U⁻¹(M); the pair stays
// consistent after every update. Columns map to caller action ids through
// action_ids (the identity mapping for full action sets).
class QTable {
 public:
  QTable() = default;
  QTable(int n_states, std::vector<int> action_ids, const UtilityFn& u);

  int n_states() const { return n_states_; }
  int n_cols() const { return static_cast<int>(action_ids_.size()); }
  const std::vector<int>& action_ids() const { return action_ids_; }

  double ce_value(int s, int col) const { return ce_[index(s, col)]; }
  double m_value(int s, int col) const { return m_[index(s, col)]; }
  std::int64_t visit_count(int s, int col) const { return visits_[index(s, col)]; }

  // column with the highest CE, ties broken toward the lowest column
  int greedy_col(int s) const;
  int greedy_action(int s) const { return action_ids_[greedy_col(s)]; }
  double best_ce(int s) const { return ce_[index(s, greedy_col(s))]; }

  // one sample update toward target_utility = U(r + best next CE)
  void observe(int s, int col, double target_utility, const LearningRate& lr,
               const UtilityFn& u);

  // CSV: state,action,ce_value,m_value,visits — `action` is the caller id.
  void save_csv(std::ostream& out) const;
  static QTable load_csv(std::istream& in);

 private:
  std::size_t index(int s, int col) const {
    return static_cast<std::size_t>(s) * action_ids_.size() +
           static_cast<std::size_t>(col);
  }

  int n_states_ = 0;
  std::vector<int> action_ids_;
  std::vector<double> m_;
  std::vector<double> ce_;
  std::vector<std::int64_t> visits_;
};

// Tabular CE Q-learning: per episode, ε-greedy rollout with updates
// M(s,a) ← M + α (U(r + max_{a'} CE(s',a')) − M). Episode seeds and
// exploration draws derive from `seed`, so runs are reproducible.
// `action_ids`, when nonempty, labels the table's columns with caller action
// ids (one per env action column); empty means the identity labeling.
QTable ce_q_learning(DiscreteEnv& env, const UtilityFn& u,
                     std::int64_t episodes, const LearningRate& lr,
                     const Exploration& exploration, std::uint64_t seed,
                     std::vector<int> action_ids = {});

// CE of one Gaussian reward with mean mu and variance sigma2_per_step × delay:
// closed form for Identity and Exponential, fixed-seed Monte Carlo otherwise.
// Power utility requires effectively non-negative outcomes (callers keep mu
// well above sigma·√delay); a sampled negative outcome raises domain_error.
double delayed_reward_ce(double mu, double sigma2_per_step, int delay_steps,
                         const UtilityFn& u);

// A FiniteMDP wrapped as a sampling environment, for training and tests.
class MdpEnv : public DiscreteEnv {
 public:
  explicit MdpEnv(FiniteMDP mdp);

  int n_states() const override { return mdp_.n_states; }
  int n_actions() const override { return mdp_.n_actions; }
  int reset(std::uint64_t seed) override;
  StepOutcome step(int action) override;

 private:
  FiniteMDP mdp_;
  std::optional<CounterRng> rng_;
  int state_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace execsim
