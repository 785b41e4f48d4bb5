#pragma once

#include "radiant/config.hpp"
#include "radiant/io.hpp"
#include "radiant/nbv.hpp"
#include "radiant/scene.hpp"
#include "radiant/train.hpp"
#include "radiant/uncertainty.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace radiant {

struct CliOptions {
  std::optional<fs::path> config;
  std::optional<fs::path> dataset;
  std::optional<fs::path> out;
  std::optional<fs::path> ensemble;  // render-uncertainty, eval
  std::optional<fs::path> pose;      // render-uncertainty: poses.txt-style file, first line used
  std::optional<int> view;           // render-uncertainty: camera id in the dataset
  std::optional<std::uint64_t> seed; // overrides the `seed` key
  bool verbose = false;
};

// Parses a run config and rejects keys outside the schema.
KeyValues load_run_config(const fs::path& path);
KeyValues parse_run_config(const std::string& text, const std::string& source);
bool is_known_config_key(const std::string& key);

// `scene` selects a preset (sphere, floor, hemisphere) or `custom`, which
// reads bounds, background and sphere.* / box.* / plane.* entries.
SceneSpec scene_from_config(const KeyValues& config);

TrainConfig train_config_from(const KeyValues& config, std::optional<std::uint64_t> seed);

struct EnsembleManifest {
  int members = 0;
  int resolution = 0;
  int samples = 0;
  std::uint64_t base_seed = 0;
  Aabb bounds;
};

void save_ensemble(const fs::path& dir, const Ensemble& ensemble, const EnsembleManifest& manifest,
                   const TrainConfig& train);
Ensemble load_ensemble(const fs::path& dir, EnsembleManifest& manifest);

void write_split(const fs::path& path, const NbvSplit& split);
NbvSplit read_split(const fs::path& path);

// Commands write their artifacts and throw std::invalid_argument on bad input.
void cmd_gen_scene(const CliOptions& options, std::ostream& log);
void cmd_train_ensemble(const CliOptions& options, std::ostream& log);
void cmd_render_uncertainty(const CliOptions& options, std::ostream& log);
void cmd_eval(const CliOptions& options, std::ostream& log);
void cmd_nbv(const CliOptions& options, std::ostream& log);

// Runs a subcommand by name; returns the process exit code and prints
// failures to `err`.
int run_command(const std::string& name, const CliOptions& options, std::ostream& log,
                std::ostream& err);

}  // namespace radiant
