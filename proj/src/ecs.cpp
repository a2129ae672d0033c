#include "ecsrl/ecs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecsrl/errors.hpp"

namespace ecsrl {

namespace {

void require_same_size(size_t a, size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size mismatch " +
                         std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

bool ivc_valid(const Ivc& ivc) {
  if (ivc.weights.size() < 2) return false;
  double sum = 0.0;
  for (double w : ivc.weights) {
    if (!(w >= 0.0 && w <= 1.0)) return false;
    sum += w;
  }
  return std::abs(sum - 1.0) <= kSimplexTol;
}

EcsSnapshot init_ecs(int num_objects, RngStream& rng) {
  if (num_objects < 2) {
    throw DimensionError("init_ecs: need at least 2 object slots, got " +
                         std::to_string(num_objects));
  }
  EcsSnapshot snap;
  snap.round = 0;
  snap.ivc.weights.resize(num_objects);
  double sum = 0.0;
  for (double& w : snap.ivc.weights) {
    w = rng.next_open();
    sum += w;
  }
  for (double& w : snap.ivc.weights) w /= sum;
  snap.avc.bits.assign(num_objects, 0);
  return snap;
}

std::vector<double> normalize_ivc(const Ivc& ivc) {
  if (ivc.weights.size() < 2) {
    throw DimensionError("normalize_ivc: need at least 2 entries");
  }
  auto [lo_it, hi_it] = std::minmax_element(ivc.weights.begin(), ivc.weights.end());
  double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(ivc.weights.size(), 0.0);
  if (hi - lo <= kDegenerateTol) return out;
  double span = hi - lo;
  for (size_t j = 0; j < out.size(); ++j) {
    out[j] = (ivc.weights[j] - lo) / span;
  }
  return out;
}

std::vector<uint8_t> polarize(const Ivc& ivc, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValueError("polarize: threshold must lie strictly inside (0, 1), got " +
                     std::to_string(threshold));
  }
  std::vector<double> norm = normalize_ivc(ivc);
  std::vector<uint8_t> out(norm.size(), 0);
  for (size_t j = 0; j < norm.size(); ++j) {
    out[j] = norm[j] > threshold ? 1 : 0;
  }
  return out;
}

Avc update_avc(const Avc& prev, const std::vector<uint8_t>& polarized) {
  require_same_size(prev.bits.size(), polarized.size(), "update_avc");
  Avc out = prev;
  for (size_t j = 0; j < out.bits.size(); ++j) {
    if (out.bits[j] > 1) {
      throw ValueError("update_avc: coverage entries must be 0 or 1");
    }
    if (polarized[j] > 1) {
      throw ValueError("update_avc: polarized entries must be 0 or 1");
    }
    out.bits[j] = out.bits[j] | polarized[j];
  }
  return out;
}

double kl_divergence(const Ivc& p, const Ivc& q) {
  require_same_size(p.weights.size(), q.weights.size(), "kl_divergence");
  double sum = 0.0;
  for (size_t j = 0; j < p.weights.size(); ++j) {
    double pj = p.weights[j];
    if (pj <= 0.0) continue;  // 0 * log(0/q) := 0
    double qj = q.weights[j];
    if (qj <= 0.0) {
      throw ValueError("kl_divergence: undefined, q[" + std::to_string(j) +
                       "] has no mass where p does");
    }
    sum += pj * std::log(pj / qj);
  }
  return sum;
}

}  // namespace ecsrl
