#include "radiant/cli.hpp"

#include "radiant/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace radiant {
namespace {

const std::set<std::string>& plain_keys() {
  static const std::set<std::string> keys = {
      // scene
      "scene", "bounds", "background",
      // cameras
      "views", "radius", "width", "height", "fx", "fy", "view_cluster", "camera_seed",
      "test_views", "test_cluster", "nbv_initial", "nbv_initial_cluster",
      // training and rendering
      "members", "resolution", "samples", "steps", "rays_per_batch", "learning_rate",
      "adam_beta1", "adam_beta2", "adam_eps", "seed", "log_every",
      // next-best-view
      "nbv_iterations", "nbv_policies", "nbv_seeds"};
  return keys;
}

bool has_prefix(const std::string& key, const std::string& prefix) {
  return key.size() > prefix.size() && key.compare(0, prefix.size(), prefix) == 0;
}

const fs::path& require(const std::optional<fs::path>& value, const char* flag) {
  if (!value) throw std::invalid_argument(std::string("missing required option ") + flag);
  return *value;
}

Vec3 vec3(const std::vector<double>& v, std::size_t offset) {
  return Vec3(v[offset], v[offset + 1], v[offset + 2]);
}

std::optional<CameraCluster> cluster_from(const KeyValues& config, const std::string& key) {
  if (!config.has(key)) return std::nullopt;
  const auto v = config.get_doubles(key, 4);
  const Vec3 dir = vec3(v, 0);
  if (dir.norm() == 0.0) throw std::invalid_argument("key '" + key + "': zero direction");
  return CameraCluster{dir.normalized(), v[3] * std::numbers::pi / 180.0};
}

CameraIntrinsics intrinsics_from(const KeyValues& config) {
  CameraIntrinsics in;
  in.width = config.get_int("width", 32);
  in.height = config.get_int("height", 32);
  in.fx = config.get_double("fx", 40.0);
  in.fy = config.get_double("fy", in.fx);
  if (in.width < 1 || in.height < 1 || !(in.fx > 0.0) || !(in.fy > 0.0)) {
    throw std::invalid_argument("camera intrinsics must be positive");
  }
  return in;
}

std::string member_file(int k) {
  char name[32];
  std::snprintf(name, sizeof name, "member_%02d.field", k);
  return name;
}

std::string join(const std::vector<int>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(values[i]);
  }
  return s;
}

std::vector<int> parse_indices(const KeyValues& kv, const std::string& key) {
  std::vector<int> out;
  for (const auto& w : kv.get_words(key)) {
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size() || v < 0) {
      throw std::invalid_argument(kv.source() + ": key '" + key + "' expects view indices");
    }
    out.push_back(v);
  }
  return out;
}

Image heatmap(const std::vector<double>& values, int width, int height, double lo, double hi) {
  Image img(width, height);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0);
    img.pixels[i] = Vec3::Constant(t);
  }
  return img;
}

}  // namespace

bool is_known_config_key(const std::string& key) {
  return plain_keys().count(key) != 0 || has_prefix(key, "sphere.") || has_prefix(key, "box.") ||
         has_prefix(key, "plane.") || has_prefix(key, "test_orbit.");
}

KeyValues parse_run_config(const std::string& text, const std::string& source) {
  KeyValues kv = parse_key_values(text, source);
  kv.reject_unknown(is_known_config_key);
  return kv;
}

KeyValues load_run_config(const fs::path& path) {
  return parse_run_config(read_text_file(path), path.string());
}

SceneSpec scene_from_config(const KeyValues& config) {
  const std::string name = config.get_string("scene");
  const bool custom = name == "custom";
  for (const auto& [key, value] : config.entries()) {
    const bool scene_key = key == "bounds" || key == "background" || has_prefix(key, "sphere.") ||
                           has_prefix(key, "box.") || has_prefix(key, "plane.");
    if (scene_key && !custom) {
      throw std::invalid_argument(config.source() + ": key '" + key +
                                  "' is only valid with scene = custom");
    }
  }
  SceneSpec scene;
  if (!custom) {
    auto preset = preset_scene(name);
    if (!preset) {
      throw std::invalid_argument(config.source() + ": unknown scene '" + name +
                                  "' (expected sphere, floor, hemisphere or custom)");
    }
    scene = *preset;
  } else {
    const auto b = config.get_doubles("bounds", 6);
    scene.bounds = Aabb{vec3(b, 0), vec3(b, 3)};
    if (config.has("background") && config.get_string("background") != "none") {
      scene.background = vec3(config.get_doubles("background", 3), 0);
    }
    // std::map iteration keeps primitive order stable: planes, boxes, spheres by name.
    for (const auto& [key, value] : config.entries()) {
      if (has_prefix(key, "plane.")) {
        const auto v = config.get_doubles(key, 4);
        scene.primitives.push_back(GroundPlane{v[0], vec3(v, 1)});
      }
    }
    for (const auto& [key, value] : config.entries()) {
      if (has_prefix(key, "box.")) {
        const auto v = config.get_doubles(key, 9);
        scene.primitives.push_back(Box{vec3(v, 0), vec3(v, 3), vec3(v, 6)});
      }
    }
    for (const auto& [key, value] : config.entries()) {
      if (has_prefix(key, "sphere.")) {
        const auto v = config.get_doubles(key, 7);
        scene.primitives.push_back(Sphere{vec3(v, 0), v[3], vec3(v, 4)});
      }
    }
    if (scene.primitives.empty()) {
      throw std::invalid_argument(config.source() + ": custom scene has no primitives");
    }
  }
  validate_scene(scene);
  return scene;
}

TrainConfig train_config_from(const KeyValues& config, std::optional<std::uint64_t> seed) {
  TrainConfig t;
  t.steps = config.get_int("steps", t.steps);
  t.rays_per_batch = config.get_int("rays_per_batch", t.rays_per_batch);
  t.samples_per_ray = config.get_int("samples", t.samples_per_ray);
  t.learning_rate = config.get_double("learning_rate", t.learning_rate);
  t.adam_beta1 = config.get_double("adam_beta1", t.adam_beta1);
  t.adam_beta2 = config.get_double("adam_beta2", t.adam_beta2);
  t.adam_eps = config.get_double("adam_eps", t.adam_eps);
  t.seed = seed ? *seed : config.get_u64("seed", 0);
  validate_train_config(t);
  return t;
}

void save_ensemble(const fs::path& dir, const Ensemble& ensemble, const EnsembleManifest& manifest,
                   const TrainConfig& train) {
  validate_ensemble(ensemble);
  fs::create_directories(dir);
  std::ostringstream text;
  text << "members = " << ensemble.size() << '\n'
       << "resolution = " << manifest.resolution << '\n'
       << "samples = " << manifest.samples << '\n'
       << "base_seed = " << manifest.base_seed << '\n'
       << "steps = " << train.steps << '\n'
       << "rays_per_batch = " << train.rays_per_batch << '\n'
       << "learning_rate = " << format_double(train.learning_rate) << '\n'
       << "bounds =";
  for (int k = 0; k < 3; ++k) text << ' ' << format_double(manifest.bounds.min[k]);
  for (int k = 0; k < 3; ++k) text << ' ' << format_double(manifest.bounds.max[k]);
  text << '\n';
  for (int k = 0; k < ensemble.size(); ++k) {
    write_field(dir / member_file(k), ensemble.members[k]);
    text << "member." << k << " = " << member_file(k) << '\n';
  }
  write_text_file(dir / "manifest.txt", text.str());
}

Ensemble load_ensemble(const fs::path& dir, EnsembleManifest& manifest) {
  const fs::path path = dir / "manifest.txt";
  const KeyValues kv = parse_key_values(read_text_file(path), path.string());
  manifest.members = kv.get_int("members");
  manifest.resolution = kv.get_int("resolution");
  manifest.samples = kv.get_int("samples");
  manifest.base_seed = kv.get_u64("base_seed");
  const auto b = kv.get_doubles("bounds", 6);
  manifest.bounds = Aabb{vec3(b, 0), vec3(b, 3)};
  if (manifest.members < 1 || manifest.samples < 1) {
    throw std::invalid_argument(path.string() + ": members and samples must be positive");
  }
  Ensemble ensemble;
  ensemble.base_seed = manifest.base_seed;
  for (int k = 0; k < manifest.members; ++k) {
    ensemble.members.push_back(read_field(dir / kv.get_string("member." + std::to_string(k))));
  }
  validate_ensemble(ensemble);
  if (ensemble.members.front().resolution != manifest.resolution) {
    throw std::invalid_argument(path.string() + ": resolution disagrees with member files");
  }
  return ensemble;
}

void write_split(const fs::path& path, const NbvSplit& split) {
  write_text_file(path, "initial = " + join(split.initial) + "\ncandidates = " +
                            join(split.candidates) + "\ntest = " + join(split.test) + "\n");
}

NbvSplit read_split(const fs::path& path) {
  const KeyValues kv = parse_key_values(read_text_file(path), path.string());
  kv.reject_unknown([](const std::string& k) {
    return k == "initial" || k == "candidates" || k == "test";
  });
  return NbvSplit{parse_indices(kv, "initial"), parse_indices(kv, "candidates"),
                  parse_indices(kv, "test")};
}

void cmd_gen_scene(const CliOptions& options, std::ostream& log) {
  const KeyValues config = load_run_config(require(options.config, "--config"));
  const fs::path& out = require(options.out, "--out");
  const SceneSpec scene = scene_from_config(config);
  const CameraIntrinsics in = intrinsics_from(config);
  const double radius = config.get_double("radius", 3.5);
  const int views = config.get_int("views");
  const int test_views = config.get_int("test_views", 0);
  const std::uint64_t cam_seed =
      config.get_u64("camera_seed", options.seed ? *options.seed : config.get_u64("seed", 0));
  if (views < 1 || test_views < 0) throw std::invalid_argument("views must be >= 1");

  std::vector<Camera> initial;
  const int n_initial = config.get_int("nbv_initial", 0);
  if (n_initial < 0) throw std::invalid_argument("nbv_initial must be >= 0");
  if (n_initial > 0) {
    const auto cluster = cluster_from(config, "nbv_initial_cluster");
    if (!cluster) throw std::invalid_argument("missing required key 'nbv_initial_cluster'");
    initial = make_hemisphere_cameras(n_initial, radius, cluster, cam_seed + 2, in);
  }
  const auto train = make_hemisphere_cameras(views, radius, cluster_from(config, "view_cluster"),
                                             cam_seed, in);
  std::vector<Camera> test;
  if (test_views > 0) {
    test = make_hemisphere_cameras(test_views, radius, cluster_from(config, "test_cluster"),
                                   cam_seed + 1, in);
  }
  // Explicit orbit cameras: test_orbit.<name> = elevation_deg azimuth_deg
  for (const auto& [key, value] : config.entries()) {
    if (!has_prefix(key, "test_orbit.")) continue;
    const auto v = config.get_doubles(key, 2);
    test.push_back(orbit_camera(radius, v[0] * std::numbers::pi / 180.0,
                                v[1] * std::numbers::pi / 180.0, in));
  }

  std::vector<Camera> all = initial;
  all.insert(all.end(), train.begin(), train.end());
  all.insert(all.end(), test.begin(), test.end());
  const auto [t_near, t_far] = near_far_from_bounds(all, scene.bounds);

  if (n_initial > 0) {
    // One dataset holding initial, candidate and test views, plus split.txt.
    write_dataset(out, make_dataset(scene, all, t_near, t_far), scene.bounds);
    NbvSplit split;
    int id = 0;
    for (int i = 0; i < n_initial; ++i) split.initial.push_back(id++);
    for (int i = 0; i < views; ++i) split.candidates.push_back(id++);
    for (std::size_t i = 0; i < test.size(); ++i) split.test.push_back(id++);
    write_split(out / "split.txt", split);
  } else {
    write_dataset(out, make_dataset(scene, train, t_near, t_far), scene.bounds);
  }
  if (!test.empty()) {
    write_dataset(out / "test", make_dataset(scene, test, t_near, t_far), scene.bounds);
  }
  log << "wrote " << all.size() << " views to " << out.string() << '\n';
}

void cmd_train_ensemble(const CliOptions& options, std::ostream& log) {
  const KeyValues config = load_run_config(require(options.config, "--config"));
  const fs::path& dataset_dir = require(options.dataset, "--dataset");
  const fs::path& out = require(options.out, "--out");
  const int members = config.get_int("members");
  const int resolution = config.get_int("resolution", 32);
  const int log_every = config.get_int("log_every", 100);
  if (members < 1 || resolution < 1 || log_every < 1) {
    throw std::invalid_argument("members, resolution and log_every must be >= 1");
  }
  const TrainConfig train = train_config_from(config, options.seed);
  const PosedDataset dataset = read_dataset(dataset_dir);
  const Aabb bounds = read_dataset_bounds(dataset_dir);

  std::mutex log_mutex;
  MemberObserver observer;
  if (options.verbose) {
    observer = [&](int member, int step, double loss) {
      if (step % log_every != 0 && step != train.steps) return;
      std::lock_guard lock(log_mutex);
      log << "step=" << step << " loss=" << format_double(loss) << " member=" << member << '\n';
    };
  }
  const Ensemble ensemble = train_ensemble(dataset, members, resolution, bounds, train, observer);
  EnsembleManifest manifest{members, resolution, train.samples_per_ray, train.seed, bounds};
  save_ensemble(out, ensemble, manifest, train);
  log << "trained " << members << " members into " << out.string() << '\n';
}

void cmd_render_uncertainty(const CliOptions& options, std::ostream& log) {
  const fs::path& ensemble_dir = require(options.ensemble, "--ensemble");
  const fs::path& dataset_dir = require(options.dataset, "--dataset");
  const fs::path& out = require(options.out, "--out");
  if (options.view.has_value() == options.pose.has_value()) {
    throw std::invalid_argument("give exactly one of --view or --pose");
  }
  EnsembleManifest manifest;
  const Ensemble ensemble = load_ensemble(ensemble_dir, manifest);
  const PosedDataset dataset = read_dataset(dataset_dir);
  Camera camera;
  if (options.view) {
    if (*options.view < 0 || *options.view >= static_cast<int>(dataset.size())) {
      throw std::invalid_argument("--view " + std::to_string(*options.view) + " is out of range");
    }
    camera = dataset.cameras[*options.view];
  } else {
    const auto cams = read_poses(*options.pose);
    if (cams.empty()) throw std::invalid_argument(options.pose->string() + ": no camera");
    camera = cams.front();
  }
  const StatsImage stats =
      ensemble_stats(ensemble, camera, dataset.t_near, dataset.t_far, manifest.samples);

  const int w = stats.width;
  const int h = stats.height;
  Image mean(w, h), var_rgb(w, h);
  ScalarMap qbar(w, h), epi(w, h), psi(w, h);
  std::vector<double> var_mean(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const PixelStats& s = stats.pixels[i];
    mean.pixels[i] = s.mu_rgb;
    var_rgb.pixels[i] = s.var_rgb;
    var_mean[i] = s.var_rgb_mean;
    qbar.values[i] = s.q_bar;
    epi.values[i] = s.var_epi;
    psi.values[i] = s.psi_sq;
  }
  fs::create_directories(out);
  write_ppm(out / "mean.ppm", mean);
  write_pfm(out / "var_rgb.pfm", var_rgb);
  write_pfm(out / "qbar.pfm", qbar);
  write_pfm(out / "epi.pfm", epi);
  write_pfm(out / "psi_sq.pfm", psi);

  // Fixed ranges so heatmaps are comparable across views and runs.
  struct Vis {
    const char* name;
    const std::vector<double>* values;
    double lo, hi;
  };
  const Vis vis[] = {{"var_rgb", &var_mean, 0.0, 0.25},
                     {"qbar", &qbar.values, 0.0, 1.0},
                     {"epi", &epi.values, 0.0, 1.0},
                     {"psi_sq", &psi.values, 0.0, 1.25}};
  std::ostringstream ranges;
  ranges << "# <map> = <value shown black> <value shown white>; values outside are clipped\n";
  for (const Vis& v : vis) {
    write_ppm(out / (std::string(v.name) + "_vis.ppm"), heatmap(*v.values, w, h, v.lo, v.hi));
    ranges << v.name << " = " << format_double(v.lo) << ' ' << format_double(v.hi) << '\n';
  }
  ranges << "# var_rgb_vis shows the channel mean of var_rgb\n";
  write_text_file(out / "vis_range.txt", ranges.str());
  log << "wrote uncertainty maps to " << out.string() << '\n';
}

void cmd_eval(const CliOptions& options, std::ostream& log) {
  const fs::path& ensemble_dir = require(options.ensemble, "--ensemble");
  const fs::path& dataset_dir = require(options.dataset, "--dataset");
  EnsembleManifest manifest;
  const Ensemble ensemble = load_ensemble(ensemble_dir, manifest);
  const PosedDataset dataset = read_dataset(dataset_dir);

  std::vector<NllSummary> combined, rgb_only;
  std::vector<double> psnrs;
  for (std::size_t v = 0; v < dataset.size(); ++v) {
    const StatsImage stats = ensemble_stats(ensemble, dataset.cameras[v], dataset.t_near,
                                            dataset.t_far, manifest.samples);
    combined.push_back(image_nll(stats, dataset.images[v], VarianceTerms::kCombined));
    rgb_only.push_back(image_nll(stats, dataset.images[v], VarianceTerms::kRgbOnly));
    Image mean(stats.width, stats.height);
    for (std::size_t i = 0; i < stats.size(); ++i) mean.pixels[i] = stats.pixels[i].mu_rgb;
    psnrs.push_back(psnr(mean, dataset.images[v]));
  }
  const NllReport c = aggregate_nll(combined);
  const NllReport r = aggregate_nll(rgb_only);
  double psnr_mean = 0.0;
  for (double p : psnrs) psnr_mean += p;
  psnr_mean /= static_cast<double>(psnrs.size());
  double psnr_var = 0.0;
  for (double p : psnrs) psnr_var += (p - psnr_mean) * (p - psnr_mean);
  const double psnr_std = std::sqrt(psnr_var / static_cast<double>(psnrs.size()));

  std::ostringstream csv;
  const auto row = [&csv](const std::string& label, double a, double b, double c2, double d,
                          double e) {
    csv << label << ',' << format_double(a) << ',' << format_double(b) << ',' << format_double(c2)
        << ',' << format_double(d) << ',' << format_double(e) << '\n';
  };
  csv << "view,nll_mean,nll_median,nll_rgb_only_mean,nll_rgb_only_median,psnr\n";
  for (std::size_t v = 0; v < dataset.size(); ++v) {
    row(std::to_string(v), combined[v].mean, combined[v].median, rgb_only[v].mean,
        rgb_only[v].median, psnrs[v]);
  }
  row("mean", c.mean_of_means, c.mean_of_medians, r.mean_of_means, r.mean_of_medians, psnr_mean);
  row("std", c.std_of_means, c.std_of_medians, r.std_of_means, r.std_of_medians, psnr_std);
  log << csv.str();
  if (options.out) {
    fs::create_directories(*options.out);
    write_text_file(*options.out / "eval.csv", csv.str());
  }
}

void cmd_nbv(const CliOptions& options, std::ostream& log) {
  const KeyValues config = load_run_config(require(options.config, "--config"));
  const fs::path& dataset_dir = require(options.dataset, "--dataset");
  const fs::path& out = require(options.out, "--out");
  const PosedDataset dataset = read_dataset(dataset_dir);
  const NbvSplit split = read_split(dataset_dir / "split.txt");

  NbvConfig nbv;
  nbv.ensemble_size = config.get_int("members");
  nbv.iterations = config.get_int("nbv_iterations", 10);
  nbv.resolution = config.get_int("resolution", 32);
  nbv.bounds = read_dataset_bounds(dataset_dir);
  const TrainConfig base_train = train_config_from(config, options.seed);
  nbv.render_samples = base_train.samples_per_ray;

  std::vector<ViewPolicy> policies;
  for (const auto& name : config.has("nbv_policies")
                              ? config.get_words("nbv_policies")
                              : std::vector<std::string>{"uncertainty", "random"}) {
    const auto p = parse_policy(name);
    if (!p) throw std::invalid_argument("unknown policy '" + name + "'");
    policies.push_back(*p);
  }
  std::vector<std::uint64_t> seeds;
  if (config.has("nbv_seeds")) {
    for (const auto& w : config.get_words("nbv_seeds")) {
      std::size_t used = 0;
      std::uint64_t s = 0;
      try {
        s = std::stoull(w, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != w.size() || w[0] == '-') {
        throw std::invalid_argument("key 'nbv_seeds' expects non-negative integers");
      }
      seeds.push_back(s);
    }
  } else {
    seeds.push_back(0);
  }

  fs::create_directories(out);
  for (ViewPolicy policy : policies) {
    for (std::uint64_t s : seeds) {
      nbv.policy = policy;
      nbv.seed = s;
      nbv.train = base_train;
      // Members of run s use seeds base + 1000 s + k.
      nbv.train.seed = base_train.seed + 1000 * s;
      NbvObserver observer;
      if (options.verbose) {
        observer = [&](const NbvIteration& it) {
          log << "policy=" << to_string(policy) << " seed=" << s << " iter=" << it.iteration
              << " chosen=" << it.chosen << " avg_psnr=" << format_double(it.avg_psnr) << '\n';
        };
      }
      const NbvRecord record = run_nbv(dataset, split, nbv, observer);
      std::ofstream csv(out / ("nbv_" + to_string(policy) + "_seed" + std::to_string(s) + ".csv"),
                        std::ios::binary);
      if (!csv) throw std::invalid_argument("cannot write into " + out.string());
      write_nbv_csv(csv, record);
    }
  }
  log << "wrote " << policies.size() * seeds.size() << " NBV records to " << out.string() << '\n';
}

int run_command(const std::string& name, const CliOptions& options, std::ostream& log,
                std::ostream& err) {
  try {
    if (name == "gen-scene") {
      cmd_gen_scene(options, log);
    } else if (name == "train-ensemble") {
      cmd_train_ensemble(options, log);
    } else if (name == "render-uncertainty") {
      cmd_render_uncertainty(options, log);
    } else if (name == "eval") {
      cmd_eval(options, log);
    } else if (name == "nbv") {
      cmd_nbv(options, log);
    } else {
      err << "error: unknown subcommand '" << name << "'\n";
      return 2;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace radiant
