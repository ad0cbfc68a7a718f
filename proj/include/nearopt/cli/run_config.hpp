#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nearopt/rational.hpp"
#include "nearopt/rules.hpp"
#include "nearopt/trial.hpp"

namespace nearopt::cli {

// Everything a command run needs, assembled from flags or a config file.
// Numeric vectors are always named (mortality= / success= / design=); the
// orientation of outcome inputs is part of the key, never positional.
struct RunConfig {
  std::string command;

  std::vector<std::vector<int>> designs;
  std::string rule = "both";  // es | ttest | dunnett | both
  double alpha = 0.05;

  std::vector<std::vector<double>> mortality_states;
  std::vector<std::vector<double>> success_states;
  std::vector<std::vector<double>> cells;  // bivariate: one 4-vector per arm
  std::string harm;                        // "1/2", "0.3", ...

  std::string evaluator = "auto";  // auto | exact | mc
  std::uint64_t n_sims = 1000000;
  std::uint64_t seed = 1;
  int threads = 0;

  int grid_points = 1000;
  bool coarse = false;
  int top_k = 10;

  std::string budget = "desk";  // desk | paper
  bool skip_step1 = false;
  int step1_grid = 0;           // 0 = profile default
  std::uint64_t step1_sims = 0;
  int step2_grid = 0;
  std::uint64_t step2_sims = 0;
  int step3_top = 0;
  std::uint64_t step3_sims = 0;
  std::string checkpoint;

  double bound_range = 1.0;
  int bound_arms = 2;
  std::vector<int> bound_n;

  std::vector<int> plan_shape;
  double plan_target = 0.0;
  int plan_max_n = 1 << 20;
  int plan_round_digits = 4;

  int table = 0;
  std::string out_dir = ".";

  std::string format = "markdown";  // csv | json | markdown
  std::string out_path;
};

struct ConfigFileError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parses "0.3" or "3/10" style harm values into an exact rational.
inline Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const long long num = std::stoll(text.substr(0, slash));
    const long long den = std::stoll(text.substr(slash + 1));
    return Rational(num, den);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(text));
  const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const std::size_t decimals = text.size() - dot - 1;
  if (decimals > 15) throw std::invalid_argument("parse_rational: too many decimals: " + text);
  long long den = 1;
  for (std::size_t i = 0; i < decimals; ++i) den *= 10;
  return Rational(std::stoll(digits), den);
}

// --- Config files ------------------------------------------------------------
// Flat `key = value` lines; '#' and ';' start comments; repeated keys repeat
// the option. `command = <name>` selects the subcommand. Errors carry
// file:line positions.

struct ConfigLine {
  int line = 0;
  std::string key;
  std::string value;
};

inline std::vector<ConfigLine> read_config_lines(std::istream& in, const std::string& path) {
  std::vector<ConfigLine> lines;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const auto comment = raw.find_first_of("#;");
    if (comment != std::string::npos) raw.erase(comment);
    const auto trim = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      if (first == std::string::npos) return std::string();
      const auto last = s.find_last_not_of(" \t\r");
      return s.substr(first, last - first + 1);
    };
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigFileError(path + ":" + std::to_string(number) +
                            ": expected `key = value`, got `" + text + "`");
    }
    ConfigLine entry;
    entry.line = number;
    entry.key = trim(text.substr(0, eq));
    entry.value = trim(text.substr(eq + 1));
    if (entry.key.empty()) {
      throw ConfigFileError(path + ":" + std::to_string(number) + ": empty key");
    }
    if (entry.value.size() >= 2 && entry.value.front() == '"' && entry.value.back() == '"') {
      entry.value = entry.value.substr(1, entry.value.size() - 2);
    }
    lines.push_back(std::move(entry));
  }
  return lines;
}

// Turns config lines into an argv tail: the command name followed by
// `--key value` pairs. `known(command, key)` vets every key so unknown keys
// are reported with their line number.
inline std::vector<std::string> config_args(
    const std::vector<ConfigLine>& lines, const std::string& path,
    const std::function<bool(const std::string&, const std::string&)>& known) {
  std::string command;
  for (const auto& entry : lines) {
    if (entry.key == "command") {
      if (!command.empty()) {
        throw ConfigFileError(path + ":" + std::to_string(entry.line) +
                              ": duplicate `command` key");
      }
      command = entry.value;
    }
  }
  if (command.empty()) {
    throw ConfigFileError(path + ": missing `command = <scenario|near-optimality|bounds|plan|reproduce>`");
  }
  std::vector<std::string> args{command};
  for (const auto& entry : lines) {
    if (entry.key == "command") continue;
    if (!known(command, entry.key)) {
      throw ConfigFileError(path + ":" + std::to_string(entry.line) + ": unknown key `" +
                            entry.key + "` for command `" + command + "`");
    }
    args.push_back("--" + entry.key);
    if (!entry.value.empty()) args.push_back(entry.value);
  }
  return args;
}

// --- Derived views -----------------------------------------------------------

inline TrialDesign single_design(const RunConfig& config) {
  if (config.designs.size() != 1) {
    throw std::invalid_argument(config.command + ": exactly one --design is required");
  }
  return make_design(config.designs.front());
}

// Binary states in canonical success orientation. Exactly one of
// mortality/success must be used; mixing them is the classic sign hazard.
inline std::vector<BinaryState> binary_states(const RunConfig& config, int arms) {
  if (!config.mortality_states.empty() && !config.success_states.empty()) {
    throw std::invalid_argument("give states as --mortality or --success, not both");
  }
  std::vector<BinaryState> states;
  for (const auto& row : config.mortality_states) {
    if (static_cast<int>(row.size()) != arms) {
      throw std::invalid_argument("--mortality row needs one rate per arm");
    }
    states.push_back(mortality_to_state(row));
  }
  for (const auto& row : config.success_states) {
    if (static_cast<int>(row.size()) != arms) {
      throw std::invalid_argument("--success row needs one probability per arm");
    }
    states.push_back(BinaryState(row));
  }
  return states;
}

inline std::vector<RuleKind> selected_rules(const RunConfig& config, int arms) {
  const bool multi = arms > 2;
  if (config.rule == "es") return {RuleKind::empirical_success};
  if (config.rule == "ttest") {
    if (multi) throw std::invalid_argument("--rule ttest applies to two-arm designs; use dunnett");
    return {RuleKind::hypothesis_test};
  }
  if (config.rule == "dunnett") {
    if (!multi) throw std::invalid_argument("--rule dunnett applies to multi-arm designs; use ttest");
    return {RuleKind::hypothesis_test};
  }
  if (config.rule == "both") return {RuleKind::hypothesis_test, RuleKind::empirical_success};
  throw std::invalid_argument("unknown --rule `" + config.rule + "`");
}

}  // namespace nearopt::cli
