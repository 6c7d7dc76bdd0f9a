#include "chainspec/cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chainspec/datasets.hpp"
#include "chainspec/io.hpp"
#include "chainspec/metrics.hpp"
#include "chainspec/recon.hpp"
#include "chainspec/runtime.hpp"
#include "chainspec/spectral.hpp"

namespace chainspec {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
  throw io::ValidationError(msg);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known) bad("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
T take(const json& block, const char* key, const std::string& where,
       const T& fallback) {
  if (!block.contains(key)) return fallback;
  try {
    return block.at(key).get<T>();
  } catch (const json::exception&) {
    bad("key '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

template <typename T>
T take_req(const json& block, const char* key, const std::string& where) {
  if (!block.contains(key))
    bad("missing key '" + std::string(key) + "' in " + where);
  try {
    return block.at(key).get<T>();
  } catch (const json::exception&) {
    bad("key '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

void make_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec)
    throw io::IoError("cannot create output directory " + out + ": " +
                      ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// ---- generate ----

Box2DConfig box2d_from_json(const json& block) {
  check_keys(block, "box2d",
             {"n", "atoms", "delta", "reference_atom", "sigma", "grid_samples",
              "grid_halfspan", "noise_variance", "lowdim_samples",
              "lowdim_halfspan", "lowdim_noise_variance", "nu",
              "beta_prerotation", "seed", "noise_seed"});
  Box2DConfig c;
  c.n = take(block, "n", "box2d", c.n);
  c.m = take(block, "atoms", "box2d", c.m);
  c.delta = take(block, "delta", "box2d", c.delta);
  c.j0 = take(block, "reference_atom", "box2d", c.j0);
  c.sigma = take(block, "sigma", "box2d", c.sigma);
  c.grid_samples = take(block, "grid_samples", "box2d", c.grid_samples);
  c.grid_halfspan = take(block, "grid_halfspan", "box2d", c.grid_halfspan);
  c.noise_variance = take(block, "noise_variance", "box2d", c.noise_variance);
  c.lowdim_samples = take(block, "lowdim_samples", "box2d", c.lowdim_samples);
  c.lowdim_halfspan =
      take(block, "lowdim_halfspan", "box2d", c.lowdim_halfspan);
  c.lowdim_noise_variance =
      take(block, "lowdim_noise_variance", "box2d", c.lowdim_noise_variance);
  c.nu = take(block, "nu", "box2d", c.nu);
  c.beta_prerotation =
      take(block, "beta_prerotation", "box2d", c.beta_prerotation);
  c.seed = take(block, "seed", "box2d", c.seed);
  c.noise_seed = take(block, "noise_seed", "box2d", c.noise_seed);
  return c;
}

json box2d_to_json(const Box2DConfig& c) {
  return json{{"n", c.n},
              {"atoms", c.m},
              {"delta", c.delta},
              {"reference_atom", c.j0},
              {"sigma", c.sigma},
              {"grid_samples", c.grid_samples},
              {"grid_halfspan", c.grid_halfspan},
              {"noise_variance", c.noise_variance},
              {"lowdim_samples", c.lowdim_samples},
              {"lowdim_halfspan", c.lowdim_halfspan},
              {"lowdim_noise_variance", c.lowdim_noise_variance},
              {"nu", c.nu},
              {"beta_prerotation", c.beta_prerotation},
              {"seed", c.seed},
              {"noise_seed", c.noise_seed}};
}

Backbone3DConfig backbone_from_json(const json& block) {
  check_keys(block, "backbone3d",
             {"trajectory", "n", "delta", "reference_atom", "sigma",
              "grid_samples", "grid_halfspan", "noise_variance",
              "lowdim_samples", "lowdim_halfspan", "lowdim_noise_variance",
              "graph_sigma", "nu", "seed", "noise_seed"});
  Backbone3DConfig c;
  c.trajectory_path = take_req<std::string>(block, "trajectory", "backbone3d");
  c.n = take(block, "n", "backbone3d", c.n);
  c.delta = take(block, "delta", "backbone3d", c.delta);
  c.j0 = take(block, "reference_atom", "backbone3d", c.j0);
  c.sigma = take(block, "sigma", "backbone3d", c.sigma);
  c.grid_samples = take(block, "grid_samples", "backbone3d", c.grid_samples);
  c.grid_halfspan =
      take(block, "grid_halfspan", "backbone3d", c.grid_halfspan);
  c.noise_variance =
      take(block, "noise_variance", "backbone3d", c.noise_variance);
  c.lowdim_samples =
      take(block, "lowdim_samples", "backbone3d", c.lowdim_samples);
  c.lowdim_halfspan =
      take(block, "lowdim_halfspan", "backbone3d", c.lowdim_halfspan);
  c.lowdim_noise_variance = take(block, "lowdim_noise_variance", "backbone3d",
                                 c.lowdim_noise_variance);
  c.graph_sigma = take(block, "graph_sigma", "backbone3d", c.graph_sigma);
  c.nu = take(block, "nu", "backbone3d", c.nu);
  c.seed = take(block, "seed", "backbone3d", c.seed);
  c.noise_seed = take(block, "noise_seed", "backbone3d", c.noise_seed);
  return c;
}

json backbone_to_json(const Backbone3DConfig& c) {
  return json{{"trajectory", c.trajectory_path},
              {"n", c.n},
              {"delta", c.delta},
              {"reference_atom", c.j0},
              {"sigma", c.sigma},
              {"grid_samples", c.grid_samples},
              {"grid_halfspan", c.grid_halfspan},
              {"noise_variance", c.noise_variance},
              {"lowdim_samples", c.lowdim_samples},
              {"lowdim_halfspan", c.lowdim_halfspan},
              {"lowdim_noise_variance", c.lowdim_noise_variance},
              {"graph_sigma", c.graph_sigma},
              {"nu", c.nu},
              {"seed", c.seed},
              {"noise_seed", c.noise_seed}};
}

template <int D>
void print_dataset_stats(const Dataset<D>& ds) {
  if (ds.noise_variance > 0.0) {
    std::vector<ProjectionImage> clean;
    clean.reserve(std::size_t(ds.n()));
    for (const auto& p : ds.particles) clean.push_back(p.clean_image);
    std::cout << "snr: " << snr(clean, ds.noise_variance) << "\n";
  } else {
    std::cout << "snr: undefined (noise variance 0)\n";
  }
  double sum = 0.0, sumsq = 0.0;
  std::size_t count = 0;
  for (const auto& p : ds.particles) {
    if (!p.ground_truth) continue;
    const auto& pts = p.ground_truth->points;
    for (Eigen::Index j = 0; j + 1 < pts.cols(); ++j) {
      const double d = (pts.col(j + 1) - pts.col(j)).norm();
      sum += d;
      sumsq += d * d;
      ++count;
    }
  }
  if (count > 0) {
    const double mean = sum / double(count);
    const double var = std::max(0.0, sumsq / double(count) - mean * mean);
    std::cout << "spacing mean: " << mean << "\nspacing variance: " << var
              << "\n";
  }
  int train = 0, test = 0;
  for (const auto& p : ds.particles)
    (p.split == Split::Train ? train : test) += 1;
  std::cout << "particles: " << ds.n() << " (train " << train << ", test "
            << test << ")\n";
}

void run_generate(const json& cfg, std::optional<std::uint64_t> seed_override) {
  check_keys(cfg, "config",
             {"dataset", "output", "test_fraction", "split_seed", "box2d",
              "backbone3d"});
  const auto kind = take_req<std::string>(cfg, "dataset", "config");
  const auto out = take_req<std::string>(cfg, "output", "config");
  const double test_fraction = take(cfg, "test_fraction", "config", 0.0);
  const auto split_seed =
      take(cfg, "split_seed", "config", std::uint64_t{1});
  make_out_dir(out);

  json resolved{{"command", "generate"},
                {"dataset", kind},
                {"output", out},
                {"test_fraction", test_fraction},
                {"split_seed", split_seed}};
  if (kind == "box2d") {
    if (cfg.contains("backbone3d"))
      bad("backbone3d block not allowed when dataset is box2d");
    Box2DConfig c = box2d_from_json(cfg.contains("box2d") ? cfg.at("box2d")
                                                          : json::object());
    if (seed_override) c.seed = *seed_override;
    Dataset<2> ds = sample_box_arms(c);
    if (test_fraction != 0.0) split(ds, test_fraction, split_seed);
    save_dataset(out, ds);
    resolved["box2d"] = box2d_to_json(c);
    print_dataset_stats(ds);
  } else if (kind == "backbone3d") {
    if (cfg.contains("box2d"))
      bad("box2d block not allowed when dataset is backbone3d");
    Backbone3DConfig c = backbone_from_json(
        cfg.contains("backbone3d") ? cfg.at("backbone3d") : json::object());
    if (seed_override) c.seed = *seed_override;
    TrajectoryStats stats;
    const auto frames = load_trajectory(c.trajectory_path, &stats);
    std::cout << "trajectory: " << stats.frames << " frames, " << stats.atoms
              << " atoms, spacing mean " << stats.mean_spacing << "\n";
    Dataset<3> ds = sample_backbone(frames, c);
    if (test_fraction != 0.0) split(ds, test_fraction, split_seed);
    save_dataset(out, ds);
    resolved["backbone3d"] = backbone_to_json(c);
    print_dataset_stats(ds);
  } else {
    bad("dataset must be 'box2d' or 'backbone3d'");
  }
  io::write_json(join(out, "resolved_config.json"), resolved);
}

// ---- embed ----

GraphConfig graph_from_json(const json& block) {
  check_keys(block, "graph", {"kernel", "sigma", "k", "sparsify_threshold"});
  GraphConfig g;
  const auto kernel =
      take<std::string>(block, "kernel", "graph", "gaussian");
  if (kernel == "gaussian")
    g.kernel = GraphConfig::Kernel::Gaussian;
  else if (kernel == "knn")
    g.kernel = GraphConfig::Kernel::Knn;
  else
    bad("graph kernel must be 'gaussian' or 'knn'");
  g.sigma = take(block, "sigma", "graph", g.sigma);
  g.k = take(block, "k", "graph", g.k);
  g.sparsify_threshold =
      take(block, "sparsify_threshold", "graph", g.sparsify_threshold);
  return g;
}

json graph_to_json(const GraphConfig& g) {
  return json{{"kernel", g.kernel == GraphConfig::Kernel::Gaussian
                             ? "gaussian"
                             : "knn"},
              {"sigma", g.sigma},
              {"k", g.k},
              {"sparsify_threshold", g.sparsify_threshold}};
}

Eigen::MatrixXd betas_of(const std::string& dir) {
  if (dataset_dimension(dir) == 2) return load_dataset<2>(dir).betas();
  return load_dataset<3>(dir).betas();
}

void run_embed(const json& cfg) {
  check_keys(cfg, "config", {"dataset", "output", "K", "graph"});
  const auto dsdir = take_req<std::string>(cfg, "dataset", "config");
  const auto out = take_req<std::string>(cfg, "output", "config");
  const int K = take_req<int>(cfg, "K", "config");
  const GraphConfig g = graph_from_json(
      cfg.contains("graph") ? cfg.at("graph") : json::object());

  const Eigen::MatrixXd betas = betas_of(dsdir);
  const Eigen::MatrixXd weights = build_weights(betas, g);
  const Eigen::MatrixXd lap = normalized_laplacian(weights);
  const SpectralBasis basis = smallest_eigenpairs(lap, K);

  make_out_dir(out);
  io::write_array(join(out, "basis_values.cspc"),
                  io::from_vector(basis.eigenvalues));
  io::write_array(join(out, "basis_vectors.cspc"), io::from_matrix(basis.phi));
  // the null eigenvector carries no shape information, so the scatter
  // coordinates start with column 1
  if (K >= 3) {
    std::vector<std::vector<double>> rows(std::size_t(basis.n()));
    for (int i = 0; i < basis.n(); ++i)
      rows[std::size_t(i)] = {basis.phi(i, 1), basis.phi(i, 2)};
    io::write_table(join(out, "scatter_2d.csv"), {"phi1", "phi2"}, rows);
  }
  if (K >= 4) {
    std::vector<std::vector<double>> rows(std::size_t(basis.n()));
    for (int i = 0; i < basis.n(); ++i)
      rows[std::size_t(i)] = {basis.phi(i, 1), basis.phi(i, 2),
                              basis.phi(i, 3)};
    io::write_table(join(out, "scatter_3d.csv"), {"phi1", "phi2", "phi3"},
                    rows);
  }
  io::write_json(join(out, "resolved_config.json"),
                 json{{"command", "embed"},
                      {"dataset", dsdir},
                      {"output", out},
                      {"K", K},
                      {"graph", graph_to_json(g)}});
  std::cout << "eigenvalues: " << basis.eigenvalues(0) << " .. "
            << basis.eigenvalues(K - 1) << " (" << K << " of " << basis.n()
            << ")\n";
}

// ---- fit ----

SpectralBasis read_basis(const std::string& dir) {
  SpectralBasis basis;
  basis.eigenvalues = io::to_vector(io::read_array(join(dir, "basis_values.cspc")));
  basis.phi = io::to_matrix(io::read_array(join(dir, "basis_vectors.cspc")));
  if (basis.phi.cols() != basis.eigenvalues.size())
    bad("basis files disagree on the number of eigenpairs");
  return basis;
}

Eigen::MatrixXd psf_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("psf must be a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j.at(0).is_array() || j.at(0).empty())
    bad("psf rows must be non-empty arrays");
  const std::size_t cols = j.at(0).size();
  Eigen::MatrixXd psf(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j.at(r).is_array() || j.at(r).size() != cols)
      bad("psf rows must all have the same length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j.at(r).at(c).is_number()) bad("psf entries must be numbers");
      psf(Eigen::Index(r), Eigen::Index(c)) = j.at(r).at(c).get<double>();
    }
  }
  return psf;
}

std::optional<std::vector<int>> mask_from_json(const json& cfg) {
  if (!cfg.contains("mask")) return std::nullopt;
  const json& j = cfg.at("mask");
  if (!j.is_array()) bad("mask must be an array of 1-based angle indices");
  std::vector<int> mask;
  mask.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer()) bad("mask entries must be integers");
    const int idx = v.get<int>();
    if (idx < 1) bad("mask indices are 1-based and must be >= 1");
    mask.push_back(idx - 1);
  }
  return mask;
}

template <int D>
void fit_impl(const json& cfg, const std::string& dsdir,
              const std::string& basisdir, const std::string& out,
              const FitConfig& fc) {
  const Dataset<D> ds = load_dataset<D>(dsdir);
  const SpectralBasis basis = read_basis(basisdir);
  if (basis.n() != ds.n()) bad("basis rows do not match dataset size");

  ForwardModelConfig fwd = ds.projection;
  if (cfg.contains("psf")) fwd.psf = psf_from_json(cfg.at("psf"));

  const auto mask = mask_from_json(cfg);
  const auto [coeffs, hist] =
      sgd_fit(ds, basis, ds.ref_angles, fwd, fc, mask);

  io::write_array(join(out, "coeff_a.cspc"), io::from_matrix(coeffs.A));
  if (D == 3)
    io::write_array(join(out, "coeff_b.cspc"), io::from_matrix(coeffs.B));

  std::vector<std::vector<double>> rows(hist.epoch.size());
  for (std::size_t r = 0; r < hist.epoch.size(); ++r)
    rows[r] = {double(hist.epoch[r]),      double(hist.steps[r]),
               hist.train_loss[r],         hist.test_loss[r],
               hist.max_error[r],          hist.avg_error[r]};
  io::write_table(
      join(out, "history.csv"),
      {"epoch", "steps", "train_loss", "test_loss", "max_error", "avg_error"},
      rows);

  const std::vector<int> test = ds.indices(Split::Test);
  const int m = ds.atoms();
  io::Array pred;
  pred.dims = {std::uint64_t(test.size()), std::uint64_t(m), std::uint64_t(D)};
  pred.data.assign(pred.total(), 0.0);
  std::vector<std::vector<double>> index_rows;
  index_rows.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& p = ds.particles[std::size_t(test[i])];
    const DiscreteCurve<D> curve =
        predict_curve(p, coeffs, basis, ds.ref_angles, ds.delta);
    for (int j = 0; j < m; ++j)
      for (int d = 0; d < D; ++d)
        pred.data[(i * std::size_t(m) + std::size_t(j)) * D + std::size_t(d)] =
            curve.points(d, j);
    index_rows.push_back({double(test[i])});
  }
  io::write_array(join(out, "predicted_test_curves.cspc"), pred);
  io::write_table(join(out, "test_indices.csv"), {"particle"}, index_rows);

  json resolved{{"command", "fit"},
                {"dataset", dsdir},
                {"basis", basisdir},
                {"output", out},
                {"fit",
                 {{"epochs", fc.epochs},
                  {"batch_size", fc.batch_size},
                  {"learning_rate", fc.learning_rate},
                  {"seed", fc.seed},
                  {"shuffle", fc.shuffle}}}};
  if (cfg.contains("mask")) resolved["mask"] = cfg.at("mask");
  if (cfg.contains("psf")) resolved["psf"] = cfg.at("psf");
  io::write_json(join(out, "resolved_config.json"), resolved);

  const std::size_t last = hist.epoch.size() - 1;
  std::cout << "train loss: " << hist.train_loss[0] << " -> "
            << hist.train_loss[last] << "\n";
  std::cout << "test loss: " << hist.test_loss[0] << " -> "
            << hist.test_loss[last] << "\n";
  std::cout << "test avg error: " << hist.avg_error[0] << " -> "
            << hist.avg_error[last] << "\n";
}

void run_fit(const json& cfg, std::optional<std::uint64_t> seed_override) {
  check_keys(cfg, "config",
             {"dataset", "basis", "output", "fit", "mask", "psf"});
  const auto dsdir = take_req<std::string>(cfg, "dataset", "config");
  const auto basisdir = take_req<std::string>(cfg, "basis", "config");
  const auto out = take_req<std::string>(cfg, "output", "config");

  const json fit_block = cfg.contains("fit") ? cfg.at("fit") : json::object();
  check_keys(fit_block, "fit",
             {"epochs", "batch_size", "learning_rate", "seed", "shuffle"});
  FitConfig fc;
  fc.epochs = take(fit_block, "epochs", "fit", fc.epochs);
  fc.batch_size = take(fit_block, "batch_size", "fit", fc.batch_size);
  fc.learning_rate = take(fit_block, "learning_rate", "fit", fc.learning_rate);
  fc.seed = take(fit_block, "seed", "fit", fc.seed);
  fc.shuffle = take(fit_block, "shuffle", "fit", fc.shuffle);
  if (seed_override) fc.seed = *seed_override;

  make_out_dir(out);
  if (dataset_dimension(dsdir) == 2)
    fit_impl<2>(cfg, dsdir, basisdir, out, fc);
  else
    fit_impl<3>(cfg, dsdir, basisdir, out, fc);
}

// ---- evaluate ----

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

// re-emits the per-epoch error columns of a fit history for plotting
void write_error_curves(const std::string& history_path,
                        const std::string& out) {
  const std::string text = io::read_text_file(history_path);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  int col_epoch = -1, col_avg = -1, col_max = -1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (header.empty()) {
      header = fields;
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c] == "epoch") col_epoch = int(c);
        if (fields[c] == "avg_error") col_avg = int(c);
        if (fields[c] == "max_error") col_max = int(c);
      }
      if (col_epoch < 0 || col_avg < 0 || col_max < 0)
        bad("history file lacks epoch/avg_error/max_error columns");
      continue;
    }
    if (fields.size() != header.size())
      throw io::IoError(history_path + ":" + std::to_string(lineno) +
                        ": expected " + std::to_string(header.size()) +
                        " fields");
    try {
      rows.push_back({std::stod(fields[std::size_t(col_epoch)]),
                      std::stod(fields[std::size_t(col_avg)]),
                      std::stod(fields[std::size_t(col_max)])});
    } catch (const std::exception&) {
      throw io::IoError(history_path + ":" + std::to_string(lineno) +
                        ": malformed number");
    }
  }
  io::write_table(out, {"epoch", "avg_error", "max_error"}, rows);
}

template <int D>
void evaluate_impl(const json& cfg, const std::string& dsdir,
                   const std::string& out) {
  const Dataset<D> ds = load_dataset<D>(dsdir);
  // score the held-out records when a split exists, everything otherwise
  std::vector<int> chosen = ds.indices(Split::Test);
  if (chosen.empty()) chosen = ds.indices(Split::Train);

  std::vector<DiscreteCurve<D>> truth;
  truth.reserve(chosen.size());
  for (int idx : chosen) {
    const auto& p = ds.particles[std::size_t(idx)];
    if (!p.ground_truth)
      bad("ground truth missing for particle " + std::to_string(idx));
    truth.push_back(*p.ground_truth);
  }

  const int m = ds.atoms();
  std::vector<DiscreteCurve<D>> pred;
  pred.reserve(chosen.size());
  const bool baseline = !cfg.contains("predictions");
  if (baseline) {
    for (int idx : chosen)
      pred.push_back(synthesize_curve(ds.ref_angles,
                                      ds.particles[std::size_t(idx)].pose,
                                      ds.delta));
  } else {
    const auto path = take_req<std::string>(cfg, "predictions", "config");
    const io::Array arr = io::read_array(path);
    const std::vector<std::uint64_t> want = {std::uint64_t(chosen.size()),
                                             std::uint64_t(m),
                                             std::uint64_t(D)};
    if (arr.dims != want)
      bad("prediction array shape does not match the evaluated records");
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      DiscreteCurve<D> curve;
      curve.delta = ds.delta;
      curve.points.resize(D, m);
      for (int j = 0; j < m; ++j)
        for (int d = 0; d < D; ++d)
          curve.points(d, j) =
              arr.data[(i * std::size_t(m) + std::size_t(j)) * D +
                       std::size_t(d)];
      pred.push_back(std::move(curve));
    }
  }

  const ErrorReport report = error_report<D>(truth, pred);
  io::write_json(join(out, "report.json"),
                 nlohmann::json{{"particles", chosen.size()},
                                {"atoms", m},
                                {"baseline", baseline},
                                {"max_error", report.max_error},
                                {"avg_error", report.avg_error}});
  std::vector<std::vector<double>> rows;
  rows.reserve(chosen.size());
  for (std::size_t i = 0; i < chosen.size(); ++i)
    rows.push_back(
        {double(chosen[i]), report.per_particle_max(Eigen::Index(i))});
  io::write_table(join(out, "per_particle.csv"), {"particle", "max_distance"},
                  rows);
  if (cfg.contains("history"))
    write_error_curves(take_req<std::string>(cfg, "history", "config"),
                       join(out, "error_curves.csv"));
  std::cout << "max error: " << report.max_error << "\n";
  std::cout << "avg error: " << report.avg_error << "\n";
}

void run_evaluate(const json& cfg) {
  check_keys(cfg, "config", {"dataset", "predictions", "history", "output"});
  const auto dsdir = take_req<std::string>(cfg, "dataset", "config");
  const auto out = take_req<std::string>(cfg, "output", "config");
  make_out_dir(out);
  json resolved = cfg;
  resolved["command"] = "evaluate";
  if (dataset_dimension(dsdir) == 2)
    evaluate_impl<2>(cfg, dsdir, out);
  else
    evaluate_impl<3>(cfg, dsdir, out);
  io::write_json(join(out, "resolved_config.json"), resolved);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"atomic chain conformation recovery from projections"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;

  std::vector<CLI::Option*> seed_opts;
  const auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--threads", threads,
                    "worker threads (default: CHAINSPEC_THREADS or all cores)");
    if (with_seed)
      seed_opts.push_back(sub->add_option("--seed", seed, "seed override"));
  };
  add_common(app.add_subcommand("generate", "sample a synthetic dataset"),
             true);
  add_common(app.add_subcommand("embed", "build the spectral basis"), false);
  add_common(app.add_subcommand("fit", "run the coefficient fit"), true);
  add_common(app.add_subcommand("evaluate", "score predicted curves"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    json cfg = io::read_json(config_path);
    if (!cfg.is_object())
      throw io::ValidationError("config root must be a JSON object");
    if (!out_dir.empty()) cfg["output"] = out_dir;
    std::optional<std::uint64_t> seed_override;
    for (const CLI::Option* o : seed_opts)
      if (o->count() > 0) seed_override = seed;

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "generate")
      run_generate(cfg, seed_override);
    else if (name == "embed")
      run_embed(cfg);
    else if (name == "fit")
      run_fit(cfg, seed_override);
    else
      run_evaluate(cfg);
    return 0;
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const io::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace chainspec
