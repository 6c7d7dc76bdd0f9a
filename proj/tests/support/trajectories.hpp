#pragma once

#include <cstdint>
#include <vector>

#include "chainspec/types.hpp"

namespace chainspec::testing {

// Smoothly deforming synthetic backbone family used where a measured
// trajectory would otherwise be needed: a coiled base curve whose turning and
// bond angles are modulated along a one-parameter path. Spacings get a small
// jitter so loaders see measured-data statistics rather than exact constancy.
std::vector<DiscreteCurve<3>> synthetic_trajectory(int atoms, int frames,
                                                   double delta,
                                                   std::uint64_t seed);

}  // namespace chainspec::testing
