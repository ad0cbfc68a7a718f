// Command-line front end: scenario evaluation, near-optimality searches,
// large-deviations bounds, sample-size planning, and reproduction of the
// bundled benchmark tables.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nearopt/cli/commands.hpp"
#include "nearopt/cli/output.hpp"
#include "nearopt/cli/run_config.hpp"
#include "nearopt/prescription.hpp"

namespace {

using nearopt::cli::RunConfig;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw CLI::ValidationError("expected a comma-separated integer list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("expected a comma-separated number list");
  return out;
}

struct RawOptions {
  std::vector<std::string> designs;
  std::vector<std::string> mortality;
  std::vector<std::string> success;
  std::vector<std::string> cells;
  std::string shape;
  std::string bound_n;
};

void add_output_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--format", config.format, "Output format: csv | json | markdown")
      ->check(CLI::IsMember({"csv", "json", "markdown"}));
  cmd->add_option("--out", config.out_path, "Write the rendered output to this path");
  cmd->add_option("--seed", config.seed, "RNG seed recorded in every Monte Carlo record");
  cmd->add_option("--threads", config.threads, "Worker threads (0 = all cores)");
}

void add_pipeline_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--budget", config.budget, "Pipeline budget profile: desk | paper");
  cmd->add_flag("--skip-step1", config.skip_step1, "Skip the coarse full-grid guard stage");
  cmd->add_option("--step1-grid", config.step1_grid, "Step-1 grid points per parameter");
  cmd->add_option("--step1-sims", config.step1_sims, "Step-1 simulations per state");
  cmd->add_option("--step2-grid", config.step2_grid, "Step-2 grid points per parameter");
  cmd->add_option("--step2-sims", config.step2_sims, "Step-2 simulations per state");
  cmd->add_option("--step3-top", config.step3_top, "States re-evaluated in step 3");
  cmd->add_option("--step3-sims", config.step3_sims, "Step-3 simulations per state");
  cmd->add_option("--checkpoint", config.checkpoint, "Checkpoint file for resumable runs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-optimality (maximum regret) of treatment rules for randomized trials"};
  app.require_subcommand(0, 1);

  RunConfig config;
  RawOptions raw;
  std::string config_path;
  app.add_option("--config", config_path,
                 "Flat `key = value` config file; keys match option names, plus `command = ...`");

  CLI::App* scenario = app.add_subcommand("scenario", "Evaluate rules at explicit states of nature");
  scenario->add_option("--design", raw.designs, "Arm sizes, e.g. 100,99 (arm 1 = standard care)");
  scenario->add_option("--mortality", raw.mortality,
                       "One state as per-arm mortality rates, e.g. 0.25,0.20 (repeatable)");
  scenario->add_option("--success", raw.success,
                       "One state as per-arm success probabilities (repeatable)");
  scenario->add_option("--cells", raw.cells,
                       "Bivariate cell probabilities p00,p01,p10,p11 for one arm (repeat per arm)");
  scenario->add_option("--harm", config.harm, "Side-effect harm h, e.g. 0.3 or 1/2");
  scenario->add_option("--rule", config.rule, "es | ttest | dunnett | both");
  scenario->add_option("--alpha", config.alpha, "Two-sided test size");
  scenario->add_option("--evaluator", config.evaluator, "auto | exact | mc");
  scenario->add_option("--sims", config.n_sims, "Monte Carlo simulations per state");
  add_output_options(scenario, config);

  CLI::App* nearopt_cmd =
      app.add_subcommand("near-optimality", "Maximum regret over all states of nature");
  nearopt_cmd->add_option("--design", raw.designs, "Arm sizes (repeatable for several designs)");
  nearopt_cmd->add_option("--rule", config.rule, "es | ttest | dunnett | both");
  nearopt_cmd->add_option("--alpha", config.alpha, "Two-sided test size");
  nearopt_cmd->add_option("--evaluator", config.evaluator,
                          "auto | exact (two-arm) | mc (multi-arm pipeline)");
  nearopt_cmd->add_option("--grid-points", config.grid_points,
                          "Two-arm grid resolution (default 1000 midpoints)");
  nearopt_cmd->add_flag("--coarse", config.coarse, "Two-arm coarse-to-fine refinement");
  nearopt_cmd->add_option("--top", config.top_k, "Worst states reported per run");
  nearopt_cmd->add_option("--sims", config.n_sims, "Unused for exact runs");
  add_pipeline_options(nearopt_cmd, config);
  add_output_options(nearopt_cmd, config);

  CLI::App* bounds = app.add_subcommand("bounds", "Large-deviations near-optimality bounds");
  bounds->add_option("--range", config.bound_range, "Outcome welfare range V");
  bounds->add_option("--arms", config.bound_arms, "Number of arms L");
  bounds->add_option("--n", raw.bound_n, "Per-arm sample sizes, e.g. 60 or 60,100,300");
  add_output_options(bounds, config);

  CLI::App* plan = app.add_subcommand("plan", "Smallest per-arm n reaching a near-optimality target");
  plan->add_option("--rule", config.rule, "es | ttest | dunnett");
  plan->add_option("--shape", raw.shape, "Arm-size ratios, e.g. 1,1 or 2,1,1,1,1");
  plan->add_option("--target", config.plan_target, "Near-optimality target epsilon");
  plan->add_option("--max-n", config.plan_max_n, "Per-arm search ceiling");
  plan->add_option("--round-digits", config.plan_round_digits,
                   "Decimals used when comparing against the target (default 4)");
  plan->add_option("--alpha", config.alpha, "Two-sided test size");
  plan->add_option("--grid-points", config.grid_points, "Two-arm grid resolution");
  plan->add_flag("--coarse", config.coarse, "Force coarse-to-fine for two-arm evaluations");
  plan->add_option("--top", config.top_k, "Worst states tracked per evaluation");
  add_pipeline_options(plan, config);
  add_output_options(plan, config);

  CLI::App* reproduce = app.add_subcommand("reproduce", "Regenerate a benchmark table and diff it");
  reproduce->add_option("--table", config.table, "Benchmark table: 1 | 2 | 3 | 4")->required(false);
  reproduce->add_option("--budget", config.budget, "desk | full");
  reproduce->add_option("--out-dir", config.out_dir, "Directory for the emitted artifacts");
  reproduce->add_option("--alpha", config.alpha, "Two-sided test size");
  reproduce->add_option("--sims", config.n_sims, "Simulations for the five-arm scenario table");
  reproduce->add_option("--grid-points", config.grid_points, "Two-arm grid resolution");
  reproduce->add_option("--top", config.top_k, "Worst states tracked per search");
  reproduce->add_option("--step3-sims", config.step3_sims, "Override the pipeline step-3 budget");
  reproduce->add_option("--checkpoint", config.checkpoint, "Checkpoint prefix for pipeline runs");
  add_output_options(reproduce, config);

  const auto known_key = [&](const std::string& command, const std::string& key) {
    const CLI::App* sub = nullptr;
    try {
      sub = app.get_subcommand(command);
    } catch (const CLI::Error&) {
      return false;
    }
    for (const auto* option : sub->get_options()) {
      if (option->check_lname(key)) return true;
    }
    return false;
  };

  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    // A config file supplies the command and its options; only output-side
    // flags may accompany it on the command line.
    const auto config_flag = std::find(args.begin(), args.end(), "--config");
    if (config_flag != args.end()) {
      if (config_flag + 1 == args.end()) throw CLI::ValidationError("--config needs a path");
      config_path = *(config_flag + 1);
      std::vector<std::string> extra(args.begin(), config_flag);
      extra.insert(extra.end(), config_flag + 2, args.end());
      for (const auto& flag : extra) {
        if (flag != "--format" && flag != "--out" &&
            (flag.rfind("--", 0) == 0)) {
          throw nearopt::cli::ConfigFileError(
              "config-file runs accept only --format/--out overrides, got `" + flag + "`");
        }
      }
      std::ifstream in(config_path);
      if (!in) throw nearopt::cli::ConfigFileError("cannot open config file `" + config_path + "`");
      const auto lines = nearopt::cli::read_config_lines(in, config_path);
      args = nearopt::cli::config_args(lines, config_path, known_key);
      args.insert(args.end(), extra.begin(), extra.end());
    }

    std::reverse(args.begin(), args.end());
    app.parse(args);

    for (const auto& text : raw.designs) config.designs.push_back(parse_int_list(text));
    for (const auto& text : raw.mortality) config.mortality_states.push_back(parse_double_list(text));
    for (const auto& text : raw.success) config.success_states.push_back(parse_double_list(text));
    for (const auto& text : raw.cells) config.cells.push_back(parse_double_list(text));
    if (!raw.shape.empty()) config.plan_shape = parse_int_list(raw.shape);
    if (!raw.bound_n.empty()) config.bound_n = parse_int_list(raw.bound_n);

    for (CLI::App* sub : {scenario, nearopt_cmd, bounds, plan, reproduce}) {
      if (sub->parsed()) config.command = sub->get_name();
    }
    if (config.command.empty()) {
      std::cerr << app.help() << std::flush;
      return 1;
    }

    const auto result = nearopt::cli::run_command(config);
    const std::string rendered = nearopt::cli::render(result, config.format);
    if (config.out_path.empty()) {
      std::cout << rendered;
    } else {
      std::ofstream out(config.out_path);
      if (!out) throw std::invalid_argument("cannot write --out file `" + config.out_path + "`");
      out << rendered;
    }
    for (const auto& note : result.notes) std::cerr << note << "\n";
    return result.exit_code;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const nearopt::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
