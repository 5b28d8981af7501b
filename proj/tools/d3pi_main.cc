#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "d3pi/bench.h"
#include "d3pi/errors.h"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;
constexpr int kNonConvergence = 4;

template <typename Fn>
int Guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const d3pi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const d3pi::NonConvergenceError& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const d3pi::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free distributed policy iteration for networks of "
               "identical linear agents"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "run one variant and write CSVs");
  run->add_option("--config", config, "configuration file")->required();
  run->add_option("--seed", seed, "override run.seed");
  run->add_option("--out", out, "override run.out");

  std::string agents = "5..30";
  std::string summary_path;
  auto* sweep =
      app.add_subcommand("sweep", "run all variants over network sizes");
  sweep->add_option("--config", config, "configuration file")->required();
  sweep->add_option("--agents", agents, "sizes, e.g. 5..30 or 5,10,20");
  sweep->add_option("--seed", seed, "override run.seed");
  sweep->add_option("--summary", summary_path,
                    "summary CSV path (default: <out>/summary.csv)");

  auto* selftest =
      app.add_subcommand("selftest", "oracle-equivalence checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (*selftest) {
    return d3pi::bench::RunSelfTest(std::cout) ? kOk : kNumericalFailure;
  }

  return Guarded([&] {
    d3pi::bench::RunConfig cfg = d3pi::bench::LoadConfig(config);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (*run) {
      const auto s = d3pi::bench::RunBenchmark(cfg);
      std::cout << d3pi::bench::VariantName(s.variant) << " nodes=" << s.nodes
                << " steps=" << s.steps << " cost=" << s.cost
                << " iterations=" << s.iterations << " out=" << cfg.out
                << "\n";
      return kOk;
    }
    const auto sizes = d3pi::bench::ParseRange(agents);
    std::filesystem::path path = summary_path.empty()
                                     ? std::filesystem::path(cfg.out) /
                                           "summary.csv"
                                     : std::filesystem::path(summary_path);
    if (path.has_parent_path()) {
      std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream f(path);
    if (!f) throw d3pi::ConfigError("cannot write " + path.string());
    d3pi::bench::SweepAgents(cfg, sizes, f);
    std::cout << "wrote " << path.string() << "\n";
    return kOk;
  });
}
