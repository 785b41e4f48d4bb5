#include "radiant/cli.hpp"
#include "radiant/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Ensembles of voxel radiance fields with density-aware uncertainty"};
  app.require_subcommand(1);

  radiant::CliOptions options;
  std::string config, dataset, out, ensemble, pose;
  int view = -1;
  std::uint64_t seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"gen-scene", "Render a posed synthetic dataset"},
      {"train-ensemble", "Train M independently seeded fields"},
      {"render-uncertainty", "Write mean, variance and occupancy maps for one view"},
      {"eval", "Per-view and aggregate NLL and PSNR as CSV"},
      {"nbv", "Next-best-view runs for each configured policy and seed"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run configuration (key = value)");
    sub->add_option("--dataset", dataset, "Dataset directory");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", seed, "Overrides the seed key");
    sub->add_flag("--verbose", options.verbose, "Progress lines on stdout");
    if (std::string(name) == "render-uncertainty" || std::string(name) == "eval") {
      sub->add_option("--ensemble", ensemble, "Ensemble directory");
    }
    if (std::string(name) == "render-uncertainty") {
      sub->add_option("--view", view, "Camera id in the dataset");
      sub->add_option("--pose", pose, "poses.txt-style file; its first camera is rendered");
    }
  }
  CLI11_PARSE(app, argc, argv);

  const CLI::App* sub = app.get_subcommands().front();
  const auto set = [sub](const char* flag, const std::string& value,
                         std::optional<radiant::fs::path>& target) {
    if (sub->get_option_no_throw(flag) && sub->count(flag) > 0) target = value;
  };
  set("--config", config, options.config);
  set("--dataset", dataset, options.dataset);
  set("--out", out, options.out);
  set("--ensemble", ensemble, options.ensemble);
  set("--pose", pose, options.pose);
  if (sub->get_option_no_throw("--view") && sub->count("--view") > 0) options.view = view;
  if (sub->count("--seed") > 0) options.seed = seed;

  try {
    radiant::configure_threads_from_env();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return radiant::run_command(sub->get_name(), options, std::cout, std::cerr);
}
