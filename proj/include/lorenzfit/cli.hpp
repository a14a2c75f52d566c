#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lorenzfit/distributions.hpp"

namespace lorenzfit::cli {

enum class FitMethod { Nls, Gmm, Both };
FitMethod parse_fit_method(const std::string& s);

struct RunConfig {
  std::string command;
  std::string input = "-";   // "-" is stdin
  std::string output = "-";  // "-" is stdout
  std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  FitMethod method = FitMethod::Both;
  std::size_t mc_n = 1'000'000;
  std::uint64_t seed = 20240601;
  std::vector<double> epsilons{0.5, 1.0, 1.5};
  std::size_t groups = 10;
  std::string format = "json";  // json | csv
  std::size_t threads = 0;      // 0: hardware concurrency

  // simulate
  std::optional<std::size_t> preset;
  std::string mixture;  // beta,alpha,omega,mu,sigma
  std::string dist;     // family:params
  std::size_t n = 10'000;
  std::size_t datasets = 1;
  std::string microdata_out;

  // group / simulate coding switches
  std::optional<bool> coding;  // equivalise, bottom- and top-code; default on for group, off for simulate
  std::string id;
};

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRecordErrors = 1;  // output complete, some records carry errors
inline constexpr int kFatal = 2;         // unreadable input or invalid arguments

// Each command reads from `in` (when it needs input), writes its report to
// `out` and diagnostics to `log`.
int cmd_fit(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_group(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& log);
int cmd_measures(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& log);
int cmd_report(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& log);

// Opens cfg.input / cfg.output and dispatches on cfg.command.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace lorenzfit::cli
