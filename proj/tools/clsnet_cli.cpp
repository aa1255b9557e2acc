// Command-line driver; talks to the library only through clsnet.h.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clsnet/clsnet.h"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_acceptance = 4;
constexpr int exit_internal = 1;

int exit_code(clsnet_status s) {
  if (s == CLSNET_OK) return exit_ok;
  if (clsnet_status_is_numerical(s)) return exit_numerical;
  if (s == CLSNET_ERR_INTERNAL) return exit_internal;
  return exit_config;
}

int report_failure(clsnet_status s) {
  std::cerr << "clsnet: " << clsnet_status_name(s) << ": " << clsnet_last_error() << "\n";
  return exit_code(s);
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tol;
};

int run_scenario(const std::string& command, const RunArgs& args) {
  clsnet_scenario* sc = nullptr;
  clsnet_status s = clsnet_scenario_load(args.config.c_str(), &sc);
  if (s != CLSNET_OK) return report_failure(s);
  if (s == CLSNET_OK && args.seed) s = clsnet_scenario_set_seed(sc, *args.seed);
  if (s == CLSNET_OK && args.out) s = clsnet_scenario_set_output_dir(sc, args.out->c_str());
  if (s == CLSNET_OK && args.tol) s = clsnet_scenario_set_tolerance(sc, *args.tol);
  char* report = nullptr;
  if (s == CLSNET_OK) s = clsnet_run(sc, command.c_str(), &report);
  clsnet_scenario_free(sc);
  if (s != CLSNET_OK) return report_failure(s);
  std::cout << report;
  clsnet_string_free(report);
  return exit_ok;
}

void print_line(int criterion, int passed, const char* line, void* user) {
  std::cout << line << std::endl;
  if (!passed) static_cast<std::vector<int>*>(user)->push_back(criterion);
}

int run_verify(const std::string& criterion, const std::string& fault, const std::optional<std::string>& out) {
  int inject = 0;
  if (fault == "propagator-sign") {
    inject = 1;
  } else if (!fault.empty() && fault != "none") {
    std::cerr << "clsnet: unknown fault '" << fault << "' (propagator-sign)\n";
    return exit_config;
  }
  int all_passed = 0;
  char* json = nullptr;
  std::vector<int> failed;
  const clsnet_status s = clsnet_verify(criterion.c_str(), inject, print_line, &failed, &all_passed, &json);
  if (s != CLSNET_OK) return report_failure(s);
  const std::string report = json;
  clsnet_string_free(json);
  if (out) {
    std::error_code ec;
    std::filesystem::create_directories(*out, ec);
    std::ofstream f(std::filesystem::path(*out) / "verify.json", std::ios::binary | std::ios::trunc);
    if (!f || !(f << report)) {
      std::cerr << "clsnet: cannot write " << *out << "/verify.json\n";
      return exit_config;
    }
  }
  if (!all_passed) {
    std::cerr << "clsnet: acceptance failed for criteria";
    for (std::size_t i = 0; i < failed.size(); ++i) std::cerr << (i ? ", " : " ") << failed[i];
    std::cerr << "\n";
    return exit_acceptance;
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compact localized state transfer, control and routing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(clsnet_version()));

  RunArgs args;
  std::vector<CLI::App*> runners;
  for (const char* name : {"spectrum", "simulate", "optimize", "route"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a scenario whose action is '") + name + "'");
    sub->add_option("--config", args.config, "scenario YAML")->required();
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--out", args.out, "output directory (overrides output.dir)");
    sub->add_option("--tol", args.tol, "integrator tolerance in [1e-14, 1e-6]");
    runners.push_back(sub);
  }

  std::string criterion = "all";
  std::string fault;
  std::optional<std::string> verify_out;
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--criterion", criterion, "criterion id, comma list or 'all'");
  verify->add_option("--inject-fault", fault, "propagator-sign: run with a sign-flipped propagator");
  verify->add_option("--out", verify_out, "directory for verify.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  if (verify->parsed()) return run_verify(criterion, fault, verify_out);
  for (CLI::App* sub : runners) {
    if (sub->parsed()) return run_scenario(sub->get_name(), args);
  }
  return exit_config;
}
