#include "hankel/hankel.h"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

struct GlobalFlags {
  std::string config;
  std::string out;
  unsigned threads = 1;
  std::size_t dense_cap = 0;
  std::int64_t seed = -1;
  bool recompute = false;
};

int run(const std::string& command, const GlobalFlags& flags) {
  std::ifstream in(flags.config, std::ios::binary);
  if (!in) {
    std::cerr << "hankel: cannot read config " << flags.config << "\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();

  hk_run_options options;
  hk_run_options_init(&options);
  if (!flags.out.empty()) options.out_dir = flags.out.c_str();
  options.threads = flags.threads;
  options.dense_cap = flags.dense_cap;
  if (flags.seed >= 0) {
    options.has_seed = 1;
    options.seed = static_cast<std::uint64_t>(flags.seed);
  }
  options.recompute = flags.recompute ? 1 : 0;

  int exit_code = 3;
  char* summary = nullptr;
  const hk_status status = hk_run(command.c_str(), text.str().c_str(), &options, &exit_code, &summary);
  if (status != HK_OK) {
    std::cerr << "hankel: " << hk_status_name(status) << ": " << hk_last_error() << "\n";
    return 3;
  }
  if (exit_code >= 2) std::cerr << "hankel: " << hk_last_error() << "\n";
  if (summary) std::cout << summary << "\n";
  hk_string_free(summary);
  return exit_code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compact Hankel operators: sequence generation, spectra, power-law verification, localization checks"};
  app.set_version_flag("--version", std::string(hk_version()));
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", flags.out, "Output directory (default: $HANKEL_OUT_DIR, then ./hankel_out)");
  app.add_option("--threads", flags.threads, "Worker threads for independent sweep points")->check(CLI::Range(1u, 256u));
  app.add_option("--dense-cap", flags.dense_cap, "Largest dimension handed to the dense SVD");
  app.add_option("--seed", flags.seed, "Override the config seed")->check(CLI::NonNegativeNumber);

  std::string command;
  app.add_subcommand("gen", "Write sequence, kernel and symbol trace files")->callback([&] { command = "gen"; });
  app.add_subcommand("spectrum", "Compute singular value series")->callback([&] { command = "spectrum"; });
  auto* verify = app.add_subcommand("verify", "Fit the spectral tail and compare with the predicted law");
  verify->add_flag("--recompute", flags.recompute, "Recompute spectra instead of refusing stale artifacts");
  verify->callback([&] { command = "verify"; });
  app.add_subcommand("localize", "Compare counting functions of parts and their sum")->callback([&] { command = "localize"; });
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(command, flags);
}
