#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spincool/config.hpp"
#include "spincool/errors.hpp"
#include "spincool/experiments.hpp"

namespace {

using namespace spincool;

struct Shared {
  std::string config_path;
  std::string preset;
  std::string out;
  std::uint64_t seed = 0;
  int trajectories = 0;
  bool plot = false;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw io_error("failed reading config '" + path + "'");
  return ss.str();
}

// Sources merge in order: preset, then config file, then the flags given on
// this invocation, so a flag always has the last word.
RunConfig assemble(const CLI::App* sub, const Shared& s) {
  if (s.preset.empty() && s.config_path.empty())
    throw config_error(
        "config error: provide --preset and/or --config (try 'presets' for "
        "the available bundles)");
  std::vector<ConfigDoc> docs;
  if (!s.preset.empty())
    docs.push_back(
        parse_config_doc(preset_text(s.preset), "preset '" + s.preset + "'"));
  if (!s.config_path.empty())
    docs.push_back(parse_config_doc(read_file(s.config_path), s.config_path));
  std::string over;
  if (sub->count("--seed")) over += "seed = " + std::to_string(s.seed) + "\n";
  if (sub->count("--trajectories"))
    over += "n_init = " + std::to_string(s.trajectories) + "\n";
  if (sub->count("--out")) over += "out_dir = " + s.out + "\n";
  if (!over.empty()) docs.push_back(parse_config_doc(over, "<command line>"));
  return build_config(docs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Programmable cooling simulator for a driven spin chain"};
  app.require_subcommand(1);
  app.footer(
      "Environment: SPINCOOL_THREADS caps the trajectory worker pool\n"
      "(default: hardware parallelism). Results are identical for any pool "
      "size.\nExit codes: 0 ok, 2 bad configuration, 3 tolerance not "
      "reached, 4 I/O failure.");

  Shared s;
  const struct {
    Experiment e;
    const char* name;
    const char* desc;
  } kSubs[] = {
      {Experiment::run, "run",
       "Cool one configuration and tabulate per-cycle aggregates"},
      {Experiment::sweep_noise, "sweep-noise",
       "Scan the steady state against the integrated error rate"},
      {Experiment::sweep_size, "sweep-size",
       "Scan the steady state against the chain length"},
      {Experiment::trap, "trap",
       "Steady-state bond correlators around a weakened bond"},
      {Experiment::occupations, "occupations",
       "Final eigenstate occupations per error rate"},
      {Experiment::theory_delta, "theory-delta",
       "Sweep kernel against its slow-sweep plateau"},
      {Experiment::rate_model, "rate-model",
       "Coarse-grained defect density: closed forms and integration"},
      {Experiment::kz, "kz",
       "Cooled versus quench-limited defect-density scaling"},
  };
  std::vector<CLI::App*> experiment_subs;
  for (const auto& d : kSubs) {
    CLI::App* sc = app.add_subcommand(d.name, d.desc);
    sc->add_option("--config,-c", s.config_path,
                   "key = value document; overrides the preset");
    sc->add_option("--preset,-p", s.preset,
                   "named parameter bundle (see 'presets')");
    sc->add_option("--seed", s.seed, "base seed override");
    sc->add_option("--trajectories,-n", s.trajectories,
                   "initial-state count override (n_init)");
    sc->add_option("--out,-o", s.out, "output directory override");
    sc->add_flag("--plot", s.plot, "also render SVG plots");
    experiment_subs.push_back(sc);
  }

  std::string plot_dir = "out";
  CLI::App* plot_cmd = app.add_subcommand(
      "plot", "Render plots for a finished run directory from its manifest");
  plot_cmd->add_option("--out,-o", plot_dir,
                       "run directory holding manifest.json")
      ->capture_default_str();

  std::string preset_name;
  CLI::App* presets_cmd = app.add_subcommand(
      "presets",
      "List named parameter bundles, or print one as a config document");
  presets_cmd->add_option("name", preset_name, "bundle to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 2;
  }

  try {
    if (presets_cmd->parsed()) {
      if (preset_name.empty()) {
        for (const std::string& n : preset_names()) std::printf("%s\n", n.c_str());
      } else {
        std::fputs(preset_text(preset_name).c_str(), stdout);
      }
      return 0;
    }
    if (plot_cmd->parsed()) {
      const ManifestData m = read_manifest(plot_dir + "/manifest.json");
      for (const std::string& f : emit_plots(plot_dir, m.experiment))
        std::printf("wrote %s/%s\n", plot_dir.c_str(), f.c_str());
      return 0;
    }
    for (std::size_t i = 0; i < experiment_subs.size(); ++i) {
      if (!experiment_subs[i]->parsed()) continue;
      const RunConfig cfg = assemble(experiment_subs[i], s);
      ExperimentOptions opt;
      opt.plots = s.plot;
      const ExperimentResult res = run_experiment(cfg, kSubs[i].e, opt);
      for (const std::string& f : res.outputs)
        std::printf("wrote %s/%s\n", cfg.out_dir.c_str(), f.c_str());
      std::printf("wrote %s\n", res.manifest_path.c_str());
      return 0;
    }
  } catch (const config_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const convergence_error& e) {
    std::fprintf(stderr, "%s (reached %g, error estimate %g)\n", e.what(),
                 e.achieved, e.error_estimate);
    return 3;
  } catch (const io_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  }
  return 0;
}
