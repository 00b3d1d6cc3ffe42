#include "cerl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csv.hpp"

namespace execsim {

void FiniteMDP::validate() const {
  if (n_states <= 0) throw std::invalid_argument("mdp: n_states must be > 0");
  if (n_actions <= 0) throw std::invalid_argument("mdp: n_actions must be > 0");
  if (static_cast<int>(transitions.size()) != n_states)
    throw std::invalid_argument("mdp: transitions must cover every state");
  if (static_cast<int>(terminal.size()) != n_states)
    throw std::invalid_argument("mdp: terminal flags must cover every state");
  if (horizon && *horizon <= 0)
    throw std::invalid_argument("mdp: horizon must be > 0 when present");
  for (int s = 0; s < n_states; ++s) {
    if (terminal[s]) continue;  // absorbing; transition lists may be empty
    if (static_cast<int>(transitions[s].size()) != n_actions)
      throw std::invalid_argument("mdp: state " + std::to_string(s) +
                                  " must define every action");
    for (int a = 0; a < n_actions; ++a) {
      const auto& branches = transitions[s][a];
      if (branches.empty())
        throw std::invalid_argument("mdp: empty transition for state " +
                                    std::to_string(s) + " action " +
                                    std::to_string(a));
      double total = 0.0;
      for (const Transition& t : branches) {
        if (t.next_state < 0 || t.next_state >= n_states)
          throw std::invalid_argument("mdp: next_state out of range");
        if (!(t.prob > 0.0))
          throw std::invalid_argument("mdp: transition probs must be > 0");
        total += t.prob;
        validate_dist(t.rewards);
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("mdp: transition probs for state " +
                                    std::to_string(s) + " action " +
                                    std::to_string(a) + " must sum to 1");
    }
  }
}

namespace {

// One CE backup: U⁻¹ of the (s', r)-expectation of U(r + v_next[s']).
double ce_backup(const FiniteMDP& mdp, int s, int a,
                 const std::vector<double>& v_next, const UtilityFn& u) {
  OutcomeDist terms;
  for (const Transition& t : mdp.transitions[s][a]) {
    const double cont = v_next[t.next_state];
    for (const Outcome& r : t.rewards)
      terms.push_back({r.value + cont, t.prob * r.prob});
  }
  return u.ce_terms(terms);
}

// One sweep of Q and greedy V over all states given continuation values.
void sweep(const FiniteMDP& mdp, const std::vector<double>& v_next,
           const UtilityFn& u, std::vector<double>& v_out,
           std::vector<int>& policy_out, std::vector<std::vector<double>>& q_out) {
  for (int s = 0; s < mdp.n_states; ++s) {
    if (mdp.terminal[s]) {
      q_out[s].assign(mdp.n_actions, 0.0);
      v_out[s] = 0.0;
      policy_out[s] = 0;
      continue;
    }
    int best = 0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      q_out[s][a] = ce_backup(mdp, s, a, v_next, u);
      if (q_out[s][a] > q_out[s][best]) best = a;
    }
    v_out[s] = q_out[s][best];
    policy_out[s] = best;
  }
}

}  // namespace

VISolution ce_value_iteration(const FiniteMDP& mdp, const UtilityFn& u) {
  mdp.validate();

  VISolution sol;
  sol.values.assign(mdp.n_states, 0.0);
  sol.policy.assign(mdp.n_states, 0);
  sol.q.assign(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));

  if (mdp.horizon) {
    // backward induction: V at the horizon is 0 everywhere
    std::vector<double> v_next(mdp.n_states, 0.0);
    for (int t = *mdp.horizon - 1; t >= 0; --t) {
      sweep(mdp, v_next, u, sol.values, sol.policy, sol.q);
      v_next = sol.values;
    }
    return sol;
  }

  if (std::none_of(mdp.terminal.begin(), mdp.terminal.end(),
                   [](bool b) { return b; }))
    throw UnsupportedError(
        "mdp: infinite horizon without terminal states is not supported");

  // fixpoint iteration from V = 0; valid when every episode reaches a
  // terminal state with probability 1
  std::vector<double> v(mdp.n_states, 0.0);
  constexpr int kMaxSweeps = 100000;
  for (int sweep_idx = 0; sweep_idx < kMaxSweeps; ++sweep_idx) {
    sweep(mdp, v, u, sol.values, sol.policy, sol.q);
    double change = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
      change = std::max(change, std::abs(sol.values[s] - v[s]));
    v = sol.values;
    if (change < 1e-13) return sol;
  }
  throw UnsupportedError(
      "mdp: value iteration did not settle; episodes may never terminate");
}

// ---- QTable ----------------------------------------------------------------

QTable::QTable(int n_states, std::vector<int> action_ids, const UtilityFn& u)
    : n_states_(n_states), action_ids_(std::move(action_ids)) {
  if (n_states_ <= 0) throw std::invalid_argument("qtable: n_states must be > 0");
  if (action_ids_.empty())
    throw std::invalid_argument("qtable: action set must be nonempty");
  const std::size_t cells = static_cast<std::size_t>(n_states_) * action_ids_.size();
  m_.assign(cells, u.u(0.0));
  ce_.assign(cells, 0.0);
  visits_.assign(cells, 0);
}

int QTable::greedy_col(int s) const {
  int best = 0;
  for (int col = 1; col < n_cols(); ++col)
    if (ce_[index(s, col)] > ce_[index(s, best)]) best = col;
  return best;
}

void QTable::observe(int s, int col, double target_utility,
                     const LearningRate& lr, const UtilityFn& u) {
  const std::size_t i = index(s, col);
  ++visits_[i];
  const double alpha = lr.alpha(visits_[i]);
  m_[i] += alpha * (target_utility - m_[i]);
  ce_[i] = u.u_inv(m_[i]);
}

void QTable::save_csv(std::ostream& out) const {
  out << "state,action,ce_value,m_value,visits\n";
  for (int s = 0; s < n_states_; ++s)
    for (int col = 0; col < n_cols(); ++col) {
      const std::size_t i = index(s, col);
      out << s << ',' << action_ids_[col] << ',' << fmt(ce_[i]) << ','
          << fmt(m_[i]) << ',' << visits_[i] << '\n';
    }
}

QTable QTable::load_csv(std::istream& in) {
  const auto rows = read_csv(in);
  if (rows.empty() || rows[0] != std::vector<std::string>{"state", "action",
                                                          "ce_value", "m_value",
                                                          "visits"})
    throw std::runtime_error("qtable: unexpected CSV header");

  QTable table;
  std::vector<int> actions;
  int n_states = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 5)
      throw std::runtime_error("qtable: row " + std::to_string(i) +
                               " must have 5 fields");
    const int s = static_cast<int>(parse_i64(rows[i][0]));
    const int a = static_cast<int>(parse_i64(rows[i][1]));
    n_states = std::max(n_states, s + 1);
    if (s == 0) actions.push_back(a);
  }
  if (actions.empty()) throw std::runtime_error("qtable: no rows");

  table.n_states_ = n_states;
  table.action_ids_ = actions;
  const std::size_t cells = static_cast<std::size_t>(n_states) * actions.size();
  table.m_.assign(cells, 0.0);
  table.ce_.assign(cells, 0.0);
  table.visits_.assign(cells, 0);

  std::size_t next = 0;
  for (std::size_t i = 1; i < rows.size(); ++i, ++next) {
    const int s = static_cast<int>(parse_i64(rows[i][0]));
    const int a = static_cast<int>(parse_i64(rows[i][1]));
    const std::size_t expect_col = next % actions.size();
    const int expect_s = static_cast<int>(next / actions.size());
    if (s != expect_s || a != actions[expect_col])
      throw std::runtime_error("qtable: rows must be dense and ordered");
    table.ce_[next] = parse_double(rows[i][2]);
    table.m_[next] = parse_double(rows[i][3]);
    table.visits_[next] = parse_i64(rows[i][4]);
  }
  if (next != cells) throw std::runtime_error("qtable: missing rows");
  return table;
}

// ---- CE Q-learning ----------------------------------------------------------

QTable ce_q_learning(DiscreteEnv& env, const UtilityFn& u,
                     std::int64_t episodes, const LearningRate& lr,
                     const Exploration& exploration, std::uint64_t seed,
                     std::vector<int> action_ids) {
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  std::vector<int> ids = std::move(action_ids);
  if (ids.empty()) {
    ids.resize(static_cast<std::size_t>(env.n_actions()));
    for (int i = 0; i < env.n_actions(); ++i) ids[static_cast<std::size_t>(i)] = i;
  } else if (ids.size() != static_cast<std::size_t>(env.n_actions())) {
    throw std::invalid_argument("action_ids size must match env.n_actions()");
  }
  QTable table(env.n_states(), ids, u);

  for (std::int64_t ep = 0; ep < episodes; ++ep) {
    CounterRng explore(derive_key(seed, 0xE115u, static_cast<std::uint64_t>(ep)));
    const double eps = exploration.epsilon(ep, episodes);
    int s = env.reset(derive_key(seed, 0xEC5Eu, static_cast<std::uint64_t>(ep)));
    while (true) {
      const int col = explore.next_double() < eps
                          ? static_cast<int>(explore.uniform_below(
                                static_cast<std::uint64_t>(env.n_actions())))
                          : table.greedy_col(s);
      const auto out = env.step(col);
      const double next_ce = out.done ? 0.0 : table.best_ce(out.state);
      table.observe(s, col, u.u(out.reward + next_ce), lr, u);
      if (out.done) break;
      s = out.state;
    }
  }
  return table;
}

// ---- delayed Gaussian reward -------------------------------------------------

double delayed_reward_ce(double mu, double sigma2_per_step, int delay_steps,
                         const UtilityFn& u) {
  if (sigma2_per_step < 0.0)
    throw std::invalid_argument("sigma2_per_step must be >= 0");
  if (delay_steps < 0) throw std::invalid_argument("delay_steps must be >= 0");
  const double var = sigma2_per_step * static_cast<double>(delay_steps);
  if (var == 0.0) return mu;

  switch (u.kind()) {
    case UtilityKind::Identity:
      return mu;
    case UtilityKind::Exponential:
      // Gaussian CARA closed form: mu − λ σ² / 2
      return mu - u.param() * var / 2.0;
    case UtilityKind::Power: {
      // fixed-seed Monte Carlo; every sample must stay in the domain
      constexpr int kPairs = 1 << 17;
      const double sd = std::sqrt(var);
      CounterRng rng(derive_key(0xDE1A9EDu,
                                static_cast<std::uint64_t>(delay_steps)));
      const double w = 1.0 / (2.0 * kPairs);
      double sum = 0.0;
      for (int i = 0; i < kPairs; ++i) {
        const auto [z1, z2] = rng.gaussian_pair();
        sum += w * (u.u(mu + sd * z1) + u.u(mu + sd * z2));
      }
      return u.u_inv(sum);
    }
  }
  return mu;
}

// ---- MdpEnv -----------------------------------------------------------------

MdpEnv::MdpEnv(FiniteMDP mdp) : mdp_(std::move(mdp)) { mdp_.validate(); }

int MdpEnv::reset(std::uint64_t seed) {
  rng_.emplace(derive_key(seed, 0x3D9Eu));
  state_ = 0;
  steps_ = 0;
  done_ = mdp_.terminal[0];
  return state_;
}

DiscreteEnv::StepOutcome MdpEnv::step(int action) {
  if (done_ || !rng_) throw std::logic_error("mdp env: episode is finished");
  if (action < 0 || action >= mdp_.n_actions)
    throw std::invalid_argument("mdp env: unknown action");

  const auto& branches = mdp_.transitions[state_][action];
  double pick = rng_->next_double();
  const Transition* chosen = &branches.back();
  for (const Transition& t : branches) {
    if (pick < t.prob) {
      chosen = &t;
      break;
    }
    pick -= t.prob;
  }

  double reward = chosen->rewards.back().value;
  double rpick = rng_->next_double();
  for (const Outcome& o : chosen->rewards) {
    if (rpick < o.prob) {
      reward = o.value;
      break;
    }
    rpick -= o.prob;
  }

  state_ = chosen->next_state;
  ++steps_;
  done_ = mdp_.terminal[state_] ||
          (mdp_.horizon && steps_ >= *mdp_.horizon);
  return {state_, reward, done_};
}

}  // namespace execsim
