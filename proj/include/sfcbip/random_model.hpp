#pragma once

#include <cstdint>

#include "sfcbip/sfc_model.hpp"

namespace sfcbip {

struct RandomModelShape {
  int min_steps = 2, max_steps = 5;
  int min_vars = 1, max_vars = 3;
  int min_actions = 1, max_actions = 4;
  int min_transitions = 1, max_transitions = 6;
};

/// Seed-controlled random non-extended SFC. Integer variables are int[0..3] and
/// every generated body keeps values in range. Transitions have disjoint source
/// and target sets. The result always validates.
SfcModel random_sfc(std::uint64_t seed, const RandomModelShape& shape = {});

}  // namespace sfcbip
