#include "support/trajectories.hpp"

#include <cmath>
#include <random>

#include "chainspec/frenet.hpp"

namespace chainspec::testing {

std::vector<DiscreteCurve<3>> synthetic_trajectory(int atoms, int frames,
                                                   double delta,
                                                   std::uint64_t seed) {
  const int m = atoms;
  ChainAngles<3> base;
  base.theta.resize(m - 2);
  base.psi.resize(m - 2);
  for (int j = 0; j < m - 2; ++j) {
    base.theta[j] = 1.1 * std::sin(0.41 * j) + 0.25 * std::cos(0.13 * j);
    // keep bond angles well inside (0, pi) so binormals stay fresh
    base.psi[j] = 1.5707963267948966 + 0.45 * std::sin(0.23 * j + 1.0);
  }

  Pose<3> pose;
  pose.position.setZero();
  pose.frame.setIdentity();
  pose.ref_index = 0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.02);

  std::vector<DiscreteCurve<3>> out;
  out.reserve(frames);
  for (int f = 0; f < frames; ++f) {
    const double s = frames > 1 ? double(f) / double(frames - 1) : 0.0;
    ChainAngles<3> ang = base;
    for (int j = 0; j < m - 2; ++j) {
      const double u = double(j) / double(m - 2);
      ang.theta[j] += 0.6 * s * std::sin(2.0 * M_PI * u) +
                      0.3 * s * s * std::cos(4.0 * M_PI * u);
      ang.psi[j] += 0.3 * s * std::sin(2.0 * M_PI * u + 0.7);
    }
    DiscreteCurve<3> curve = synthesize_curve(ang, pose, delta);
    // re-walk the chain with per-step spacing jitter, keeping directions
    DiscreteCurve<3> jittered;
    jittered.delta = delta;
    jittered.points.resize(3, m);
    jittered.points.col(0) = curve.points.col(0);
    for (int j = 0; j + 1 < m; ++j) {
      Vec<3> t = (curve.points.col(j + 1) - curve.points.col(j)) / delta;
      const double step = delta * (1.0 + jitter(rng));
      jittered.points.col(j + 1) = jittered.points.col(j) + step * t;
    }
    out.push_back(std::move(jittered));
  }
  return out;
}

}  // namespace chainspec::testing
