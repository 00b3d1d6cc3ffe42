// Tiny decision problems shared by the unit tests and the acceptance checks.
#pragma once

#include "core/cerl.hpp"

namespace fixtures {

// Two-armed bandit with equal means: arm 0 pays 2 or 0 with equal chance,
// arm 1 pays 1 surely. One decision, then a terminal state.
inline execsim::FiniteMDP equal_mean_bandit() {
  execsim::FiniteMDP mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.horizon = 1;
  mdp.terminal = {false, true};
  mdp.transitions.assign(2, std::vector<std::vector<execsim::Transition>>(2));
  mdp.transitions[0][0] = {{1, 1.0, {{2.0, 0.5}, {0.0, 0.5}}}};
  mdp.transitions[0][1] = {{1, 1.0, {{1.0, 1.0}}}};
  return mdp;
}

// Deterministic two-step chain: 0 → 1 → 2 (terminal). In each live state
// action 0 pays 1 and action 1 pays 0.25, so the optimal path is obvious and
// classical Q values are exact by hand: Q(0,·) = r + 1, Q(1,·) = r.
inline execsim::FiniteMDP two_step_chain() {
  execsim::FiniteMDP mdp;
  mdp.n_states = 3;
  mdp.n_actions = 2;
  mdp.horizon = 2;
  mdp.terminal = {false, false, true};
  mdp.transitions.assign(3, std::vector<std::vector<execsim::Transition>>(2));
  mdp.transitions[0][0] = {{1, 1.0, {{1.0, 1.0}}}};
  mdp.transitions[0][1] = {{1, 1.0, {{0.25, 1.0}}}};
  mdp.transitions[1][0] = {{2, 1.0, {{1.0, 1.0}}}};
  mdp.transitions[1][1] = {{2, 1.0, {{0.25, 1.0}}}};
  return mdp;
}

}  // namespace fixtures
