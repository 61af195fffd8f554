#pragma once

#include "nac/mdp.hpp"

#include <string>
#include <vector>

namespace nac {

/// Three states on a line, actions L = 0 and R = 1. R moves right (capped at
/// 2) w.p. 0.8, L moves left (floored at 0) w.p. 0.8, otherwise the state
/// stays. Reward 1 in state 2, gamma = 0.9, rho0 uniform over pairs.
FiniteMdp chain3();

/// chain3 with r == 0.
FiniteMdp chain3_zero_reward();

/// Two states, two actions, next state uniform regardless of the pair, so
/// the pair chain under a fixed policy is i.i.d. Reward 1 on pair (1, 1).
FiniteMdp iid2();

/// Looks a fixture up by name; throws std::invalid_argument for unknown names.
FiniteMdp fixture(const std::string& name);
std::vector<std::string> fixture_names();

}  // namespace nac
