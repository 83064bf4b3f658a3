// nahm_cli <subcommand> [--config FILE] [--out DIR] [--format json|csv] [--seed N] [--workers N] [--set key=value]...
#include <cstdlib>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "nahm/errors.hpp"

int main(int argc, char** argv) {
  using namespace nahm::cli;
  CLI::App app{"Nahm transform engine for SU(2) fields on R x T^3"};
  std::string sub, config_path, out, format;
  long long seed = -1;
  int workers = 0;
  std::vector<std::string> sets;
  std::string w, z;
  double cutoff = -1;
  app.add_option("subcommand", sub, "spectrum | grid | index | scan | singularity | audit")
      ->required()
      ->check(CLI::IsMember(kSubcommands));
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--out", out, "output directory (default $OUTPUT_DIR or .)");
  app.add_option("--format", format, "table format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", seed, "eigensolver seed");
  app.add_option("--workers", workers, "worker threads (default: hardware concurrency)");
  app.add_option("--set", sets, "inline key=value setting, repeatable");
  app.add_option("--w", w, "spectrum: holonomy parameter x,y,z");
  app.add_option("--z", z, "spectrum: twist x,y,z");
  app.add_option("--cutoff", cutoff, "spectrum: eigenvalue cutoff");
  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    RawConfig raw = config_path.empty() ? RawConfig() : RawConfig::load(config_path);
    for (const auto& s : sets) raw.set(s);
    if (!w.empty()) raw.set("spectrum.w=" + w);
    if (!z.empty()) raw.set("spectrum.z=" + z);
    if (cutoff >= 0) raw.set("spectrum.cutoff=" + std::to_string(cutoff));
    if (!out.empty()) raw.set("output.dir=" + out);
    else if (!raw.has("output.dir") && std::getenv("OUTPUT_DIR")) raw.set(std::string("output.dir=") + std::getenv("OUTPUT_DIR"));
    if (!format.empty()) raw.set("output.format=" + format);
    if (seed >= 0) raw.set("run.seed=" + std::to_string(seed));
    if (workers > 0) raw.set("run.workers=" + std::to_string(workers));
    else if (!raw.has("run.workers")) raw.set("run.workers=" + std::to_string(std::max(1u, std::thread::hardware_concurrency())));
    cfg = build_config(raw);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    int status = run_command(sub, cfg);
    for (const auto& k : cfg.raw.unused()) std::cerr << "warning: unused key " << k << "\n";
    std::cout << sub << ": " << (status == 0 ? "all checks passed" : "some checks failed") << " (" << cfg.out_dir
              << "/summary.json)\n";
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nahm::Error& e) {
    std::cerr << e.name() << ": " << e.what() << "\n";
    return 3;
  }
}
