#pragma once

#include <cstdint>
#include <vector>

#include "ecsrl/rng.hpp"

namespace ecsrl {

// Tolerances used by the concern-state invariant checks. Exposed so tests
// and the trace validator agree with the library byte for byte.
inline constexpr double kSimplexTol = 1e-9;     // |sum - 1| bound for Ivc
inline constexpr double kDegenerateTol = 1e-12; // flat-vector and zero-mass guard

// Immediate visual concern: the answerer's attention distribution over the
// scene's object slots for the current round. A probability simplex.
struct Ivc {
  std::vector<double> weights;
};

// Accumulated visual concern: which object slots have been strongly attended
// at least once so far. Grows monotonically (bitwise OR per round).
struct Avc {
  std::vector<uint8_t> bits;
};

// One round's concern state, as logged in traces.
struct EcsSnapshot {
  int round = 0;
  Ivc ivc;
  Avc avc;
};

bool ivc_valid(const Ivc& ivc);

// Round-zero state: coverage all zero, attention drawn uniformly at random
// and renormalised so every entry is strictly positive.
EcsSnapshot init_ecs(int num_objects, RngStream& rng);

// Min-max rescale of the attention weights into [0, 1]. A flat input (max
// and min equal within kDegenerateTol) maps to all zeros so that nothing
// gets marked as concerning on a degenerate round.
std::vector<double> normalize_ivc(const Ivc& ivc);

// Binarise: 1 where the normalised weight strictly exceeds the threshold.
std::vector<uint8_t> polarize(const Ivc& ivc, double threshold);

// OR the polarised round into the running coverage. Never clears a bit.
Avc update_avc(const Avc& prev, const std::vector<uint8_t>& polarized);

// KL(p || q) in nats over object slots. Terms with p_j = 0 contribute zero;
// q_j must be positive wherever p_j is.
double kl_divergence(const Ivc& p, const Ivc& q);

}  // namespace ecsrl
