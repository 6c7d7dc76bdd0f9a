#include "chainspec/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "chainspec/io.hpp"
#include "chainspec/runtime.hpp"

namespace chainspec {

namespace {

// splitmix64 steps; used to derive independent per-particle, per-purpose
// seed streams from one dataset seed
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t base, std::uint64_t salt) {
  return mix64(base ^ mix64(salt));
}

constexpr std::uint64_t kConfStream = 0x636f6e66ull;
constexpr std::uint64_t kLowdimStream = 0x6c6f7764ull;
constexpr std::uint64_t kNoiseStream = 0x6e6f6973ull;

ProjectionGrid centered_grid(int dim, int samples, double halfspan) {
  ProjectionGrid g;
  g.dim = dim;
  g.samples = samples;
  for (int a = 0; a < dim; ++a) {
    g.min[a] = -halfspan;
    g.max[a] = halfspan;
  }
  return g;
}

template <int D>
void check_containment(const DiscreteCurve<D>& curve, double halfspan,
                       double sigma, const char* field) {
  const double reach = curve.points.cwiseAbs().maxCoeff();
  if (reach + 3.0 * sigma > halfspan)
    throw io::ValidationError(
        std::string("conformation reaches ") + std::to_string(reach) +
        " which leaves less than a 3-sigma margin inside " + field + " = " +
        std::to_string(halfspan));
}

}  // namespace

template <int D>
std::vector<int> Dataset<D>::indices(Split s) const {
  std::vector<int> out;
  for (const auto& p : particles)
    if (p.split == s) out.push_back(p.index);
  return out;
}

template <int D>
Eigen::MatrixXd Dataset<D>::betas() const {
  if (particles.empty()) return {};
  Eigen::MatrixXd b(particles.front().beta.size(), particles.size());
  for (int i = 0; i < n(); ++i) b.col(i) = particles[i].beta;
  return b;
}

ChainAngles<2> box_arms_angles(double t33, double t133, double tbox) {
  const int m = 149;
  ChainAngles<2> angles;
  angles.theta = Eigen::VectorXd::Zero(m - 2);
  const double corner = -M_PI / 2;
  // 1-based angle positions from the dataset construction
  angles.theta[32] = corner + t33;
  angles.theta[52] = corner + tbox;
  angles.theta[72] = corner - tbox;
  angles.theta[92] = corner + tbox;
  angles.theta[122] = corner - tbox;
  angles.theta[132] = corner + t133;
  return angles;
}

template <int D>
Mat<D> random_rotation(std::mt19937_64& rng) {
  if constexpr (D == 2) {
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    const double a = u(rng);
    Mat<2> r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    double q[4];
    double norm = 0.0;
    do {
      for (double& c : q) c = normal(rng);
      norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    } while (norm < 1e-12);
    const double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm,
                 z = q[3] / norm;
    Mat<3> r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
  }
}

Dataset<2> sample_box_arms(const Box2DConfig& cfg) {
  if (cfg.n < 1) throw io::ValidationError("n must be >= 1");
  if (cfg.m != 149)
    throw io::ValidationError("the box-with-arms chain has m = 149 atoms");
  if (cfg.j0 < 1 || cfg.j0 > cfg.m - 1)
    throw io::ValidationError("j0 must lie in [1, m-1]");
  if (!(cfg.delta > 0.0) || !(cfg.sigma > 0.0) || !(cfg.nu > 0.0))
    throw io::ValidationError("delta, sigma and nu must be > 0");
  if (cfg.noise_variance < 0.0 || cfg.lowdim_noise_variance < 0.0)
    throw io::ValidationError("noise variances must be >= 0");

  Dataset<2> ds;
  ds.delta = cfg.delta;
  ds.ref_index = cfg.j0 - 1;
  ds.seed = cfg.seed;
  ds.noise_variance = cfg.noise_variance;
  ds.lowdim_noise_variance = cfg.lowdim_noise_variance;
  ds.ref_angles = box_arms_angles(0.0, 0.0, 0.0);
  ds.projection.nu = cfg.nu;
  ds.projection.sigma = cfg.sigma;
  ds.projection.grid = centered_grid(1, cfg.grid_samples, cfg.grid_halfspan);
  ds.lowdim.nu = 1.0;
  ds.lowdim.sigma = cfg.sigma;
  ds.lowdim.grid = centered_grid(2, cfg.lowdim_samples, cfg.lowdim_halfspan);

  const std::uint64_t conf_base = derive(cfg.seed, kConfStream);
  const std::uint64_t low_base = derive(cfg.seed, kLowdimStream);
  const std::uint64_t noise_base =
      cfg.noise_seed ? cfg.noise_seed : derive(cfg.seed, kNoiseStream);

  ds.particles.resize(std::size_t(cfg.n));
  parallel_chunks(std::size_t(cfg.n), [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      std::mt19937_64 conf(derive(conf_base, i));
      std::mt19937_64 low(derive(low_base, i));
      std::mt19937_64 noise(derive(noise_base, i));

      std::uniform_real_distribution<double> arm(-M_PI / 2, M_PI / 2);
      std::uniform_real_distribution<double> box(-M_PI / 4, M_PI / 4);
      const double t33 = arm(conf);
      const double t133 = arm(conf);
      const double tbox = box(conf);

      ParticleRecord<2>& rec = ds.particles[i];
      rec.index = int(i);
      rec.pose.position.setZero();
      rec.pose.frame = random_rotation<2>(conf);
      rec.pose.ref_index = ds.ref_index;

      const ChainAngles<2> angles = box_arms_angles(t33, t133, tbox);
      DiscreteCurve<2> truth = synthesize_curve(angles, rec.pose, cfg.delta);
      check_containment(truth, cfg.grid_halfspan, cfg.sigma, "grid_halfspan");
      check_containment(truth, cfg.lowdim_halfspan, cfg.sigma,
                        "lowdim_halfspan");

      rec.clean_image = project(truth, ds.projection);
      rec.image = add_noise(rec.clean_image, cfg.noise_variance, noise);

      DiscreteCurve<2> beta_curve = truth;
      if (cfg.beta_prerotation) {
        Pose<2> flat;
        flat.ref_index = ds.ref_index;
        beta_curve = synthesize_curve(angles, flat, cfg.delta);
      }
      ProjectionImage dens = density_image(beta_curve, ds.lowdim);
      rec.beta = add_noise(dens, cfg.lowdim_noise_variance, low).values;
      rec.ground_truth = std::move(truth);
    }
  });
  return ds;
}

Dataset<3> sample_backbone(const std::vector<DiscreteCurve<3>>& frames,
                           const Backbone3DConfig& cfg) {
  if (frames.empty()) throw io::ValidationError("trajectory has no frames");
  if (cfg.n < 1) throw io::ValidationError("n must be >= 1");
  const int m = frames.front().atoms();
  if (m < 3) throw io::ValidationError("frames need at least 3 atoms");
  for (const auto& f : frames)
    if (f.atoms() != m)
      throw io::ValidationError("all frames must share an atom count");
  if (cfg.j0 < 1 || cfg.j0 > m - 1)
    throw io::ValidationError("j0 must lie in [1, m-1]");
  if (!(cfg.delta > 0.0) || !(cfg.sigma > 0.0) || !(cfg.nu > 0.0))
    throw io::ValidationError("delta, sigma and nu must be > 0");
  if (cfg.noise_variance < 0.0 || cfg.lowdim_noise_variance < 0.0)
    throw io::ValidationError("noise variances must be >= 0");

  Dataset<3> ds;
  ds.delta = cfg.delta;
  ds.ref_index = cfg.j0 - 1;
  ds.seed = cfg.seed;
  ds.noise_variance = cfg.noise_variance;
  ds.lowdim_noise_variance = cfg.lowdim_noise_variance;
  ds.projection.nu = cfg.nu;
  ds.projection.sigma = cfg.sigma;
  ds.projection.grid = centered_grid(2, cfg.grid_samples, cfg.grid_halfspan);
  ds.lowdim.nu = 1.0;
  ds.lowdim.sigma = cfg.sigma;
  ds.lowdim.grid = centered_grid(3, cfg.lowdim_samples, cfg.lowdim_halfspan);

  // canonicalize: extract each frame's angles once, then every particle is
  // resynthesized at the constant spacing
  ExtractOptions loose;
  loose.spacing_tolerance = 0.2;
  std::vector<ChainAngles<3>> frame_angles(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f)
    frame_angles[f] = extract_angles<3>(frames[f], ds.ref_index, loose).first;
  ds.ref_angles = frame_angles.front();

  const std::uint64_t conf_base = derive(cfg.seed, kConfStream);
  const std::uint64_t low_base = derive(cfg.seed, kLowdimStream);
  const std::uint64_t noise_base =
      cfg.noise_seed ? cfg.noise_seed : derive(cfg.seed, kNoiseStream);

  ds.particles.resize(std::size_t(cfg.n));
  parallel_chunks(std::size_t(cfg.n), [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      std::mt19937_64 conf(derive(conf_base, i));
      std::mt19937_64 low(derive(low_base, i));
      std::mt19937_64 noise(derive(noise_base, i));

      std::uniform_int_distribution<int> pick_frame(0, int(frames.size()) - 1);
      const int pick = pick_frame(conf);

      ParticleRecord<3>& rec = ds.particles[i];
      rec.index = int(i);
      rec.pose.position.setZero();
      rec.pose.frame = random_rotation<3>(conf);
      rec.pose.ref_index = ds.ref_index;

      DiscreteCurve<3> truth =
          synthesize_curve(frame_angles[std::size_t(pick)], rec.pose,
                           cfg.delta);
      check_containment(truth, cfg.grid_halfspan, cfg.sigma, "grid_halfspan");
      check_containment(truth, cfg.lowdim_halfspan, cfg.sigma,
                        "lowdim_halfspan");

      rec.clean_image = project(truth, ds.projection);
      rec.image = add_noise(rec.clean_image, cfg.noise_variance, noise);
      ProjectionImage dens = density_image(truth, ds.lowdim);
      rec.beta = add_noise(dens, cfg.lowdim_noise_variance, low).values;
      rec.ground_truth = std::move(truth);
    }
  });
  return ds;
}

std::vector<DiscreteCurve<3>> load_trajectory(const std::string& path,
                                              TrajectoryStats* stats) {
  const std::string text = io::read_text_file(path);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  std::vector<std::vector<Vec<3>>> raw;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    if (line.compare(first, 5, "FRAME") == 0) {
      raw.emplace_back();
      continue;
    }
    if (raw.empty())
      throw io::IoError(path + ": line " + std::to_string(line_no) +
                        ": atom before any FRAME header");
    std::istringstream fields(line);
    Vec<3> p;
    if (!(fields >> p[0] >> p[1] >> p[2]))
      throw io::IoError(path + ": line " + std::to_string(line_no) +
                        ": expected three decimal numbers");
    std::string tail;
    if (fields >> tail)
      throw io::IoError(path + ": line " + std::to_string(line_no) +
                        ": trailing fields after the three coordinates");
    raw.back().push_back(p);
  }
  if (raw.empty()) throw io::IoError(path + ": no frames found");

  double sum = 0.0, sum_sq = 0.0;
  std::size_t steps = 0;
  std::vector<DiscreteCurve<3>> frames(raw.size());
  for (std::size_t f = 0; f < raw.size(); ++f) {
    if (raw[f].size() < 3)
      throw io::ValidationError(path + ": frame " + std::to_string(f) +
                                " has fewer than 3 atoms");
    frames[f].points.resize(3, Eigen::Index(raw[f].size()));
    for (std::size_t j = 0; j < raw[f].size(); ++j)
      frames[f].points.col(Eigen::Index(j)) = raw[f][j];
    double frame_sum = 0.0;
    for (std::size_t j = 0; j + 1 < raw[f].size(); ++j) {
      const double d = (raw[f][j + 1] - raw[f][j]).norm();
      frame_sum += d;
      sum += d;
      sum_sq += d * d;
      ++steps;
    }
    frames[f].delta = frame_sum / double(raw[f].size() - 1);
  }
  if (stats) {
    stats->frames = int(frames.size());
    stats->atoms = frames.front().atoms();
    stats->mean_spacing = sum / double(steps);
    stats->spacing_variance =
        sum_sq / double(steps) - stats->mean_spacing * stats->mean_spacing;
  }
  return frames;
}

void save_trajectory(const std::string& path,
                     const std::vector<DiscreteCurve<3>>& frames) {
  std::ostringstream out;
  char buf[96];
  for (std::size_t f = 0; f < frames.size(); ++f) {
    out << "FRAME " << f << '\n';
    for (int j = 0; j < frames[f].atoms(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n",
                    frames[f].points(0, j), frames[f].points(1, j),
                    frames[f].points(2, j));
      out << buf;
    }
  }
  io::write_text_file(path, out.str());
}

template <int D>
void split(Dataset<D>& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw io::ValidationError("test fraction must lie in (0, 1)");
  const int n = dataset.n();
  const int tests = int(std::llround(test_fraction * n));
  if (tests < 1 || tests >= n)
    throw io::ValidationError("split would leave an empty train or test set");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (auto& p : dataset.particles) p.split = Split::Train;
  for (int i = 0; i < tests; ++i)
    dataset.particles[std::size_t(order[std::size_t(i)])].split = Split::Test;
}

namespace {

nlohmann::json grid_to_json(const ProjectionGrid& g) {
  nlohmann::json j;
  j["dim"] = g.dim;
  j["samples"] = g.samples;
  j["min"] = std::vector<double>(g.min, g.min + g.dim);
  j["max"] = std::vector<double>(g.max, g.max + g.dim);
  return j;
}

ProjectionGrid grid_from_json(const nlohmann::json& j) {
  ProjectionGrid g;
  g.dim = j.at("dim").get<int>();
  if (g.dim < 1 || g.dim > 3) throw io::ValidationError("manifest grid dim");
  g.samples = j.at("samples").get<int>();
  const auto mins = j.at("min").get<std::vector<double>>();
  const auto maxs = j.at("max").get<std::vector<double>>();
  if (int(mins.size()) != g.dim || int(maxs.size()) != g.dim)
    throw io::ValidationError("manifest grid extents do not match its dim");
  for (int a = 0; a < g.dim; ++a) {
    g.min[a] = mins[std::size_t(a)];
    g.max[a] = maxs[std::size_t(a)];
  }
  validate_grid(g);
  return g;
}

std::string join(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

template <int D>
void save_dataset(const std::string& dir, const Dataset<D>& dataset) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io::IoError(dir + ": cannot create directory");

  const int n = dataset.n();
  if (n < 1) throw io::ValidationError("refusing to save an empty dataset");
  const int m = dataset.atoms();
  const std::uint64_t img = dataset.particles.front().image.values.size();
  const std::uint64_t q = dataset.particles.front().beta.size();

  nlohmann::json manifest;
  manifest["format"] = 1;
  manifest["dimension"] = D;
  manifest["n"] = n;
  manifest["m"] = m;
  manifest["delta"] = dataset.delta;
  manifest["reference_atom"] = dataset.ref_index + 1;  // 1-based on disk
  manifest["projection"] = {{"nu", dataset.projection.nu},
                            {"sigma", dataset.projection.sigma},
                            {"grid", grid_to_json(dataset.projection.grid)}};
  manifest["lowdim"] = {{"nu", dataset.lowdim.nu},
                        {"sigma", dataset.lowdim.sigma},
                        {"grid", grid_to_json(dataset.lowdim.grid)}};
  manifest["noise_variance"] = dataset.noise_variance;
  manifest["lowdim_noise_variance"] = dataset.lowdim_noise_variance;
  manifest["seed"] = dataset.seed;

  bool has_truth = true;
  std::vector<int> split_labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    split_labels[std::size_t(i)] =
        dataset.particles[std::size_t(i)].split == Split::Test ? 1 : 0;
    if (!dataset.particles[std::size_t(i)].ground_truth) has_truth = false;
  }
  manifest["split"] = split_labels;
  manifest["has_ground_truth"] = has_truth;

  io::Array images, clean, betas, positions, frames, truth;
  const int N = dataset.projection.grid.samples;
  if (dataset.projection.grid.dim == 1)
    images.dims = {std::uint64_t(n), std::uint64_t(N)};
  else
    images.dims = {std::uint64_t(n), std::uint64_t(N), std::uint64_t(N)};
  clean.dims = images.dims;
  betas.dims = {std::uint64_t(n), q};
  positions.dims = {std::uint64_t(n), D};
  frames.dims = {std::uint64_t(n), D, D};
  truth.dims = {std::uint64_t(n), std::uint64_t(m), D};
  images.data.resize(std::size_t(n) * img);
  clean.data.resize(std::size_t(n) * img);
  betas.data.resize(std::size_t(n) * q);
  positions.data.resize(std::size_t(n) * D);
  frames.data.resize(std::size_t(n) * D * D);
  if (has_truth) truth.data.resize(std::size_t(n) * std::size_t(m) * D);

  for (int i = 0; i < n; ++i) {
    const auto& p = dataset.particles[std::size_t(i)];
    if (std::uint64_t(p.image.values.size()) != img ||
        std::uint64_t(p.clean_image.values.size()) != img ||
        std::uint64_t(p.beta.size()) != q)
      throw io::ValidationError("inconsistent record shapes in dataset");
    std::copy_n(p.image.values.data(), img,
                images.data.begin() + std::ptrdiff_t(i * std::int64_t(img)));
    std::copy_n(p.clean_image.values.data(), img,
                clean.data.begin() + std::ptrdiff_t(i * std::int64_t(img)));
    std::copy_n(p.beta.data(), q,
                betas.data.begin() + std::ptrdiff_t(i * std::int64_t(q)));
    for (int d = 0; d < D; ++d)
      positions.data[std::size_t(i) * D + std::size_t(d)] = p.pose.position[d];
    for (int r = 0; r < D; ++r)
      for (int c = 0; c < D; ++c)
        frames.data[(std::size_t(i) * D + std::size_t(r)) * D +
                    std::size_t(c)] = p.pose.frame(r, c);
    if (has_truth)
      for (int j = 0; j < m; ++j)
        for (int d = 0; d < D; ++d)
          truth.data[(std::size_t(i) * std::size_t(m) + std::size_t(j)) * D +
                     std::size_t(d)] = p.ground_truth->points(d, j);
  }

  io::write_array(join(dir, "images.cspc"), images);
  io::write_array(join(dir, "clean_images.cspc"), clean);
  io::write_array(join(dir, "betas.cspc"), betas);
  io::write_array(join(dir, "positions.cspc"), positions);
  io::write_array(join(dir, "frames.cspc"), frames);
  if (has_truth) io::write_array(join(dir, "ground_truth.cspc"), truth);
  io::write_array(join(dir, "ref_theta.cspc"),
                  io::from_vector(dataset.ref_angles.theta));
  if (D == 3)
    io::write_array(join(dir, "ref_psi.cspc"),
                    io::from_vector(dataset.ref_angles.psi));
  io::write_json(join(dir, "manifest.json"), manifest);
}

int dataset_dimension(const std::string& dir) {
  const auto manifest = io::read_json(join(dir, "manifest.json"));
  const int d = manifest.at("dimension").get<int>();
  if (d != 2 && d != 3)
    throw io::ValidationError(dir + ": manifest dimension must be 2 or 3");
  return d;
}

template <int D>
Dataset<D> load_dataset(const std::string& dir) {
  const auto manifest = io::read_json(join(dir, "manifest.json"));
  if (manifest.at("dimension").get<int>() != D)
    throw io::ValidationError(dir + ": dataset dimension does not match");
  const int n = manifest.at("n").get<int>();
  const int m = manifest.at("m").get<int>();
  if (n < 1 || m < 3) throw io::ValidationError(dir + ": bad manifest counts");

  Dataset<D> ds;
  ds.delta = manifest.at("delta").get<double>();
  ds.ref_index = manifest.at("reference_atom").get<int>() - 1;
  if (ds.ref_index < 0 || ds.ref_index > m - 2)
    throw io::ValidationError(dir + ": reference atom out of range");
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  ds.noise_variance = manifest.at("noise_variance").get<double>();
  ds.lowdim_noise_variance =
      manifest.at("lowdim_noise_variance").get<double>();
  ds.projection.nu = manifest.at("projection").at("nu").get<double>();
  ds.projection.sigma = manifest.at("projection").at("sigma").get<double>();
  ds.projection.grid = grid_from_json(manifest.at("projection").at("grid"));
  ds.lowdim.nu = manifest.at("lowdim").at("nu").get<double>();
  ds.lowdim.sigma = manifest.at("lowdim").at("sigma").get<double>();
  ds.lowdim.grid = grid_from_json(manifest.at("lowdim").at("grid"));
  if (ds.projection.grid.dim != D - 1)
    throw io::ValidationError(dir + ": projection grid dim must be D-1");

  const auto split_labels = manifest.at("split").get<std::vector<int>>();
  if (int(split_labels.size()) != n)
    throw io::ValidationError(dir + ": split labels do not match n");
  const bool has_truth = manifest.at("has_ground_truth").get<bool>();

  const io::Array images = io::read_array(join(dir, "images.cspc"));
  const io::Array clean = io::read_array(join(dir, "clean_images.cspc"));
  const io::Array betas = io::read_array(join(dir, "betas.cspc"));
  const io::Array positions = io::read_array(join(dir, "positions.cspc"));
  const io::Array frames = io::read_array(join(dir, "frames.cspc"));

  const std::uint64_t img = ds.projection.grid.total();
  std::vector<std::uint64_t> want_img = {std::uint64_t(n)};
  for (int a = 0; a < ds.projection.grid.dim; ++a)
    want_img.push_back(std::uint64_t(ds.projection.grid.samples));
  if (images.dims != want_img || clean.dims != want_img)
    throw io::ValidationError(dir + ": image arrays do not match the manifest");
  if (betas.dims.size() != 2 || betas.dims[0] != std::uint64_t(n))
    throw io::ValidationError(dir + ": betas array does not match the manifest");
  if (positions.dims !=
          std::vector<std::uint64_t>{std::uint64_t(n), std::uint64_t(D)} ||
      frames.dims != std::vector<std::uint64_t>{std::uint64_t(n),
                                                std::uint64_t(D),
                                                std::uint64_t(D)})
    throw io::ValidationError(dir + ": pose arrays do not match the manifest");

  ds.ref_angles.theta =
      io::to_vector(io::read_array(join(dir, "ref_theta.cspc")));
  if (ds.ref_angles.theta.size() != m - 2)
    throw io::ValidationError(dir + ": reference angles do not match m");
  if constexpr (D == 3) {
    ds.ref_angles.psi = io::to_vector(io::read_array(join(dir, "ref_psi.cspc")));
    if (ds.ref_angles.psi.size() != m - 2)
      throw io::ValidationError(dir + ": reference psi does not match m");
  }

  io::Array truth;
  if (has_truth) {
    truth = io::read_array(join(dir, "ground_truth.cspc"));
    if (truth.dims != std::vector<std::uint64_t>{std::uint64_t(n),
                                                 std::uint64_t(m),
                                                 std::uint64_t(D)})
      throw io::ValidationError(dir +
                                ": ground truth does not match the manifest");
  }

  const std::uint64_t q = betas.dims[1];
  ds.particles.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    auto& p = ds.particles[std::size_t(i)];
    p.index = i;
    p.split = split_labels[std::size_t(i)] ? Split::Test : Split::Train;
    p.image.grid = ds.projection.grid;
    p.clean_image.grid = ds.projection.grid;
    p.image.values = Eigen::Map<const Eigen::VectorXd>(
        images.data.data() + std::size_t(i) * img, Eigen::Index(img));
    p.clean_image.values = Eigen::Map<const Eigen::VectorXd>(
        clean.data.data() + std::size_t(i) * img, Eigen::Index(img));
    p.beta = Eigen::Map<const Eigen::VectorXd>(
        betas.data.data() + std::size_t(i) * q, Eigen::Index(q));
    for (int d = 0; d < D; ++d)
      p.pose.position[d] = positions.data[std::size_t(i) * D + std::size_t(d)];
    for (int r = 0; r < D; ++r)
      for (int c = 0; c < D; ++c)
        p.pose.frame(r, c) =
            frames.data[(std::size_t(i) * D + std::size_t(r)) * D +
                        std::size_t(c)];
    p.pose.ref_index = ds.ref_index;
    validate_frame<D>(p.pose.frame);
    if (has_truth) {
      DiscreteCurve<D> gt;
      gt.delta = ds.delta;
      gt.points.resize(D, m);
      for (int j = 0; j < m; ++j)
        for (int d = 0; d < D; ++d)
          gt.points(d, j) =
              truth.data[(std::size_t(i) * std::size_t(m) + std::size_t(j)) *
                             D +
                         std::size_t(d)];
      p.ground_truth = std::move(gt);
    }
  }
  return ds;
}

template struct Dataset<2>;
template struct Dataset<3>;
template Mat<2> random_rotation<2>(std::mt19937_64&);
template Mat<3> random_rotation<3>(std::mt19937_64&);
template void split<2>(Dataset<2>&, double, std::uint64_t);
template void split<3>(Dataset<3>&, double, std::uint64_t);
template void save_dataset<2>(const std::string&, const Dataset<2>&);
template void save_dataset<3>(const std::string&, const Dataset<3>&);
template Dataset<2> load_dataset<2>(const std::string&);
template Dataset<3> load_dataset<3>(const std::string&);

}  // namespace chainspec
