// Command-line front end; talks to the library through the C interface only.
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdgamma.h"

int main(int argc, char** argv) {
  CLI::App app{"pdgamma: nonlocal-to-local energy experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::optional<unsigned long long> seed;
  int threads = 0;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "Config file (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--seed", seed, "Seed for randomised checks (overrides the config)");
  run->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Parse and validate a config without running it");
  validate->add_option("config", config, "Config file (JSON)")->required();

  auto* list = app.add_subcommand("list-catalog", "List experiments, kernels, potentials and micro-potentials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : PDG_PARSE;
  }

  if (*run) {
    pdg_set_threads(threads);
    const unsigned long long* seed_ptr = seed ? &*seed : nullptr;
    const int rc = pdg_run_config(config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), seed_ptr, threads);
    if (rc == 0) {
      std::printf("ok: all contracts pass\n");
    } else {
      std::fprintf(stderr, "exit %d: %s\n", rc, pdg_last_error());
    }
    return rc;
  }
  if (*validate) {
    const int rc = pdg_validate_config(config.c_str());
    if (rc == 0) {
      std::printf("ok: %s is valid\n", config.c_str());
    } else {
      std::fprintf(stderr, "exit %d: %s\n", rc, pdg_last_error());
    }
    return rc;
  }
  if (*list) {
    size_t needed = 0;
    pdg_list_catalog(nullptr, 0, &needed);
    std::vector<char> buf(needed);
    if (pdg_list_catalog(buf.data(), buf.size(), &needed) != PDG_OK) {
      std::fprintf(stderr, "%s\n", pdg_last_error());
      return PDG_NUMERICAL;
    }
    std::fputs(buf.data(), stdout);
    return 0;
  }
  return 0;
}
