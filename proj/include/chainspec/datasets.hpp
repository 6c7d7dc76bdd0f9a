#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chainspec/forward.hpp"
#include "chainspec/frenet.hpp"
#include "chainspec/types.hpp"

namespace chainspec {

enum class Split { Train, Test };

template <int D>
struct ParticleRecord {
  int index = 0;
  ProjectionImage image;        // noisy measurement
  ProjectionImage clean_image;  // noise-free counterpart
  Pose<D> pose;
  Eigen::VectorXd beta;  // low-dimensional representation
  std::optional<DiscreteCurve<D>> ground_truth;
  Split split = Split::Train;
};

template <int D>
struct Dataset {
  std::vector<ParticleRecord<D>> particles;
  ChainAngles<D> ref_angles;  // the known conformation anchoring every fit
  double delta = 0.0;
  int ref_index = 0;  // 0-based reference atom
  ForwardModelConfig projection;
  ForwardModelConfig lowdim;
  double noise_variance = 0.0;
  double lowdim_noise_variance = 0.0;
  std::uint64_t seed = 0;

  int n() const { return int(particles.size()); }
  int atoms() const { return ref_angles.atoms(); }
  std::vector<int> indices(Split s) const;
  // betas stacked one particle per column
  Eigen::MatrixXd betas() const;
};

// All torsion angles zero except the two arm corners (theta_33, theta_133,
// offsets measured from -pi/2) and the four box corners driven by one shared
// offset. Indices follow the 1-based convention of the dataset configs.
ChainAngles<2> box_arms_angles(double t33, double t133, double tbox);

struct Box2DConfig {
  int n = 4000;
  int m = 149;
  double delta = 3.5;
  int j0 = 33;  // 1-based reference atom
  double sigma = 7.0;
  int grid_samples = 128;
  // grid reach from the (centered) reference atom; the default covers the
  // worst-case conformation reach of 133 plus a 3-sigma margin
  double grid_halfspan = 160.0;
  double noise_variance = 2500.0;
  int lowdim_samples = 64;
  double lowdim_halfspan = 160.0;
  double lowdim_noise_variance = 9.0;
  // projection amplitude; the default is calibrated so the full-size dataset
  // lands at the reported signal-to-noise level near 0.073
  double nu = 0.07;
  // compute beta from the unrotated conformation instead of the rotated one
  bool beta_prerotation = false;
  std::uint64_t seed = 1;
  std::uint64_t noise_seed = 0;  // 0: derived from seed
};

Dataset<2> sample_box_arms(const Box2DConfig& cfg);

struct Backbone3DConfig {
  int n = 4000;
  double delta = 3.8412;
  int j0 = 112;  // 1-based reference atom
  double sigma = 3.0;
  int grid_samples = 64;
  // covers the bundled trajectory's reach of 79 from the reference atom plus
  // a 3-sigma margin
  double grid_halfspan = 96.0;
  double noise_variance = 1089.0;
  int lowdim_samples = 16;
  double lowdim_halfspan = 96.0;
  double lowdim_noise_variance = 0.0;
  double graph_sigma = 80.0;  // default kernel width for the embedding step
  // calibrated like Box2DConfig::nu, against the bundled trajectory, so the
  // default dataset lands at the reported signal-to-noise level near 0.01
  double nu = 0.15;
  std::uint64_t seed = 1;
  std::uint64_t noise_seed = 0;
  std::string trajectory_path;  // used by the CLI; the library takes frames
};

Dataset<3> sample_backbone(const std::vector<DiscreteCurve<3>>& frames,
                           const Backbone3DConfig& cfg);

struct TrajectoryStats {
  double mean_spacing = 0.0;
  double spacing_variance = 0.0;
  int frames = 0;
  int atoms = 0;
};

// Plain-text trajectory: lines "FRAME <index>" separate frames, each atom is
// one line of three space-separated decimals, '#' starts a comment.
std::vector<DiscreteCurve<3>> load_trajectory(const std::string& path,
                                              TrajectoryStats* stats = nullptr);
void save_trajectory(const std::string& path,
                     const std::vector<DiscreteCurve<3>>& frames);

// Haar-uniform rotation: uniform angle in 2D, uniform unit quaternion in 3D.
template <int D>
Mat<D> random_rotation(std::mt19937_64& rng);

// Seeded random partition; exactly round(n * test_fraction) test records.
template <int D>
void split(Dataset<D>& dataset, double test_fraction, std::uint64_t seed);

template <int D>
void save_dataset(const std::string& dir, const Dataset<D>& dataset);
template <int D>
Dataset<D> load_dataset(const std::string& dir);

// dimension recorded in a dataset directory's manifest
int dataset_dimension(const std::string& dir);

}  // namespace chainspec
