#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nearopt/bounds.hpp"
#include "nearopt/cli/output.hpp"
#include "nearopt/cli/run_config.hpp"
#include "nearopt/pipeline.hpp"
#include "nearopt/reference.hpp"
#include "nearopt/regret.hpp"

namespace nearopt::cli {

// Reproduction deviations beyond tolerance map to exit code 2.
struct ToleranceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

inline std::string format_seconds(double s) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f s", s);
  return buffer;
}

inline std::vector<double> to_mortality(const std::vector<double>& success) {
  std::vector<double> out(success.size());
  for (std::size_t i = 0; i < success.size(); ++i) out[i] = 1.0 - success[i];
  return out;
}

inline std::string design_text(const std::vector<int>& arm_sizes) {
  std::string out;
  for (int n : arm_sizes) {
    if (!out.empty()) out += ":";
    out += std::to_string(n);
  }
  return out;
}

inline PipelineBudgets budgets_from_config(const RunConfig& config) {
  PipelineBudgets budgets =
      config.budget == "paper" ? PipelineBudgets::paper() : PipelineBudgets::desk();
  if (config.budget != "paper" && config.budget != "desk") {
    throw std::invalid_argument("unknown --budget `" + config.budget + "` (desk | paper)");
  }
  if (config.skip_step1) budgets.run_step1 = false;
  if (config.step1_grid > 0) budgets.step1_grid = config.step1_grid;
  if (config.step1_sims > 0) budgets.step1_sims = config.step1_sims;
  if (config.step2_grid > 0) budgets.step2_grid = config.step2_grid;
  if (config.step2_sims > 0) budgets.step2_sims = config.step2_sims;
  if (config.step3_top > 0) budgets.step3_top = config.step3_top;
  if (config.step3_sims > 0) budgets.step3_sims = config.step3_sims;
  return budgets;
}

inline nlohmann::ordered_json stages_json(const std::vector<StageDiagnostics>& stages) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& stage : stages) {
    out.push_back({{"name", stage.name},
                   {"states", stage.states},
                   {"n_sims", stage.n_sims_per_state},
                   {"best_regret", stage.best_regret}});
  }
  return out;
}

}  // namespace detail

// --- scenario ---------------------------------------------------------------

inline CommandResult cmd_scenario(const RunConfig& config) {
  const TrialDesign design = single_design(config);
  const int arms = design.arms();
  const bool bivariate = !config.cells.empty();

  std::string evaluator = config.evaluator;
  if (evaluator == "auto") evaluator = arms == 2 ? "exact" : "mc";
  if (evaluator != "exact" && evaluator != "mc") {
    throw std::invalid_argument("unknown --evaluator `" + config.evaluator + "`");
  }
  if (evaluator == "exact" && arms != 2) {
    throw std::invalid_argument(
        "scenario: exact evaluation covers two-arm designs; use --evaluator mc");
  }

  nlohmann::ordered_json config_echo;
  config_echo["designs"] = config.designs;
  config_echo["rule"] = config.rule;
  config_echo["alpha"] = config.alpha;
  config_echo["evaluator"] = evaluator;
  config_echo["seed"] = config.seed;
  if (evaluator == "mc") config_echo["n_sims"] = config.n_sims;

  CommandResult result;
  detail::Stopwatch watch;

  if (bivariate) {
    if (arms != 2) throw std::invalid_argument("scenario: bivariate states need a two-arm design");
    if (config.rule != "es" && config.rule != "both") {
      throw std::invalid_argument("scenario: bivariate outcomes support the empirical success rule");
    }
    if (config.cells.size() != static_cast<std::size_t>(arms)) {
      throw std::invalid_argument("scenario: one --cells row per arm required");
    }
    std::vector<std::array<double, 4>> cells;
    for (const auto& row : config.cells) {
      if (row.size() != 4) throw std::invalid_argument("scenario: --cells rows carry 4 values");
      cells.push_back({row[0], row[1], row[2], row[3]});
    }
    const Rational harm = config.harm.empty() ? Rational(0) : parse_rational(config.harm);
    const BivariateState state(cells, harm);
    const WelfareSpec welfare = WelfareSpec::bivariate_weighted(harm);
    config_echo["cells"] = config.cells;
    config_echo["harm"] = harm.str();
    result.payload = payload_skeleton("scenario", config_echo);

    PrescriptionProbs probs;
    if (evaluator == "exact") {
      probs = exact_probs_two_arm_bivariate_es(design, state);
    } else {
      McOptions opts;
      opts.n_sims = config.n_sims;
      opts.seed = config.seed;
      opts.threads = config.threads;
      probs = mc_probs_bivariate_es(design, state, opts);
    }
    auto report = regret_at_state(std::move(probs), state, welfare);
    nlohmann::ordered_json record;
    record["design"] = design.arm_sizes();
    record["rule"] = rule_name(RuleKind::empirical_success);
    record["mean_welfare"] = report.mean_welfare;
    record["probs"] = report.probs.probs;
    if (evaluator == "mc") {
      record["std_errors"] = report.probs.std_errors;
      record["n_sims"] = report.probs.n_sims;
      record["seed"] = report.probs.seed;
    }
    record["per_arm_loss"] = report.per_arm_loss;
    record["expected_loss"] = report.expected_loss;
    record["evaluator"] = report.probs.method_name();
    result.payload["results"].push_back(std::move(record));
    result.notes.push_back("scenario evaluated in " + detail::format_seconds(watch.seconds()));
    return result;
  }

  const auto states = binary_states(config, arms);
  if (states.empty()) {
    throw std::invalid_argument("scenario: at least one --mortality or --success state required");
  }
  nlohmann::ordered_json echo_states = nlohmann::ordered_json::array();
  for (const auto& s : states) echo_states.push_back(s.success_probs);
  config_echo["success_states"] = echo_states;
  result.payload = payload_skeleton("scenario", config_echo);

  const auto rules = selected_rules(config, arms);
  std::optional<TestConfig> test_config;
  for (RuleKind kind : rules) {
    if (kind == RuleKind::hypothesis_test && !test_config) {
      test_config = TestConfig::for_design(design, config.alpha);
    }
    for (std::size_t s = 0; s < states.size(); ++s) {
      const auto& state = states[s];
      PrescriptionProbs probs;
      if (evaluator == "exact") {
        probs = kind == RuleKind::empirical_success
                    ? exact_probs_two_arm_es(design, state)
                    : exact_probs_two_arm_test(design, state, *test_config);
      } else {
        McOptions opts;
        opts.n_sims = config.n_sims;
        opts.seed = config.seed;
        opts.stream = s;
        opts.threads = config.threads;
        probs = kind == RuleKind::empirical_success
                    ? mc_probs(EsCountRule(design), design, state, opts)
                    : mc_probs(TestCountRule(design, *test_config), design, state, opts);
      }
      auto report = regret_at_state(std::move(probs), state);
      nlohmann::ordered_json record;
      record["design"] = design.arm_sizes();
      record["rule"] = rule_name(kind);
      record["success"] = state.success_probs;
      record["mortality"] = detail::to_mortality(state.success_probs);
      record["probs"] = report.probs.probs;
      if (evaluator == "mc") {
        record["std_errors"] = report.probs.std_errors;
        record["n_sims"] = report.probs.n_sims;
        record["seed"] = report.probs.seed;
      }
      record["per_arm_loss"] = report.per_arm_loss;
      record["expected_loss"] = report.expected_loss;
      record["evaluator"] = report.probs.method_name();
      result.payload["results"].push_back(std::move(record));
    }
  }
  result.notes.push_back("scenario evaluated in " + detail::format_seconds(watch.seconds()));
  return result;
}

// --- near-optimality ----------------------------------------------------------

inline CommandResult cmd_near_optimality(const RunConfig& config) {
  if (config.designs.empty()) {
    throw std::invalid_argument("near-optimality: at least one --design required");
  }
  nlohmann::ordered_json config_echo;
  config_echo["designs"] = config.designs;
  config_echo["rule"] = config.rule;
  config_echo["alpha"] = config.alpha;
  config_echo["evaluator"] = config.evaluator;
  config_echo["grid_points"] = config.grid_points;
  config_echo["coarse"] = config.coarse;
  config_echo["budget"] = config.budget;
  config_echo["seed"] = config.seed;

  CommandResult result;
  result.payload = payload_skeleton("near-optimality", config_echo);

  std::size_t combo = 0;
  for (const auto& arm_sizes : config.designs) {
    const TrialDesign design = make_design(arm_sizes);
    for (RuleKind kind : selected_rules(config, design.arms())) {
      detail::Stopwatch watch;
      std::string evaluator = config.evaluator;
      if (evaluator == "auto") evaluator = design.arms() == 2 ? "exact" : "mc";
      MaxRegretResult search;
      if (evaluator == "exact") {
        if (design.arms() != 2) {
          throw std::invalid_argument(
              "near-optimality: exact evaluation covers two-arm designs only; design " +
              detail::design_text(arm_sizes) + " needs --evaluator mc");
        }
        GridSpec grid{GridSpec::Family::full_product, GridSpec::midpoints(config.grid_points),
                      true};
        if (config.coarse) {
          search = coarse_to_fine_two_arm(kind, design, grid, RefineSchedule{}, config.alpha,
                                          config.threads, config.top_k);
        } else {
          search = max_regret_grid(kind, design, grid, ExactEvaluator{config.alpha},
                                   config.top_k, config.threads);
        }
      } else if (evaluator == "mc") {
        PipelineOptions opts;
        opts.budgets = detail::budgets_from_config(config);
        opts.alpha = config.alpha;
        opts.seed = config.seed;
        opts.threads = config.threads;
        if (!config.checkpoint.empty()) {
          opts.checkpoint_path = config.checkpoint;
          if (config.designs.size() * 2 > 1) {
            opts.checkpoint_path += "." + std::to_string(combo) + "." + rule_name(kind);
          }
        }
        search = max_regret_multiarm_pipeline(kind, design, opts);
      } else {
        throw std::invalid_argument("unknown --evaluator `" + config.evaluator + "`");
      }

      nlohmann::ordered_json record;
      record["design"] = arm_sizes;
      record["rule"] = rule_name(kind);
      record["near_optimality"] = search.value;
      record["argmax_success"] = search.argmax.state;
      record["argmax_mortality"] = detail::to_mortality(search.argmax.state);
      record["argmax_probs"] = search.argmax.probs;
      record["method"] = search.method;
      if (evaluator == "mc") record["seed"] = config.seed;
      record["stages"] = detail::stages_json(search.stages);
      result.payload["results"].push_back(std::move(record));
      result.notes.push_back(detail::design_text(arm_sizes) + " " + rule_name(kind) + ": " +
                             detail::format_seconds(watch.seconds()));
      ++combo;
    }
  }
  return result;
}

// --- bounds -------------------------------------------------------------------

inline CommandResult cmd_bounds(const RunConfig& config) {
  if (config.bound_n.empty()) {
    throw std::invalid_argument("bounds: at least one --n required");
  }
  nlohmann::ordered_json config_echo;
  config_echo["range"] = config.bound_range;
  config_echo["arms"] = config.bound_arms;
  config_echo["n"] = config.bound_n;

  CommandResult result;
  result.payload = payload_skeleton("bounds", config_echo);
  for (int n : config.bound_n) {
    const BoundInput input{config.bound_range, config.bound_arms, n};
    const auto best = bound_best(input);
    nlohmann::ordered_json record;
    record["range"] = config.bound_range;
    record["arms"] = config.bound_arms;
    record["per_arm"] = n;
    record["prop1"] = best.prop1;
    record["prop2"] = best.prop2;
    record["best"] = best.value;
    record["selected"] = best.which;
    result.payload["results"].push_back(std::move(record));
  }
  result.notes.push_back(
      "prop1 is tighter for 2-3 arms, prop2 for 4 or more; both scale as n^(-1/2)");
  return result;
}

// --- plan ---------------------------------------------------------------------

inline CommandResult cmd_plan(const RunConfig& config) {
  if (config.plan_shape.size() < 2) {
    throw std::invalid_argument("plan: --shape with at least two arm ratios required");
  }
  for (int r : config.plan_shape) {
    if (r < 1) throw std::invalid_argument("plan: shape ratios must be >= 1");
  }
  if (!(config.plan_target > 0.0)) {
    throw std::invalid_argument("plan: --target must be > 0");
  }
  if (config.rule == "both") {
    throw std::invalid_argument("plan: pick one rule (es | ttest | dunnett)");
  }
  const int arms = static_cast<int>(config.plan_shape.size());
  const RuleKind kind = selected_rules(config, arms).front();

  // Sizes where the rule itself is undefined (hypothesis tests need
  // N - L >= 1 for the pooled variance) count as failing the target.
  const auto full_grid_feasible = [&](int n) {
    return arms == 2 && config.plan_shape[0] * n <= 200 && config.plan_shape[1] * n <= 200 &&
           !config.coarse;
  };
  const auto evaluate = [&](int n) -> std::pair<std::vector<int>, double> {
    std::vector<int> arm_sizes(config.plan_shape.size());
    for (std::size_t t = 0; t < arm_sizes.size(); ++t) arm_sizes[t] = config.plan_shape[t] * n;
    const TrialDesign design(arm_sizes);
    if (kind == RuleKind::hypothesis_test && design.total() - design.arms() < 1) {
      return {arm_sizes, std::numeric_limits<double>::infinity()};
    }
    if (arms == 2) {
      const GridSpec grid{GridSpec::Family::full_product, GridSpec::midpoints(config.grid_points),
                          true};
      const auto search =
          full_grid_feasible(n)
              ? max_regret_grid(kind, design, grid, ExactEvaluator{config.alpha}, config.top_k,
                                config.threads)
              : coarse_to_fine_two_arm(kind, design, grid, RefineSchedule{}, config.alpha,
                                       config.threads, config.top_k);
      return std::pair{arm_sizes, search.value};
    }
    PipelineOptions opts;
    opts.budgets = detail::budgets_from_config(config);
    opts.alpha = config.alpha;
    opts.seed = config.seed;
    opts.threads = config.threads;
    return std::pair{arm_sizes, max_regret_multiarm_pipeline(kind, design, opts).value};
  };

  // Inversions beyond the evaluator's own error are reported; exact grids get
  // no slack, refinement and Monte Carlo evaluations their known noise.
  const auto monotone_slack = [&](int n) {
    if (arms > 2) return 2e-3;
    return full_grid_feasible(n) ? 1e-9 : 2e-4;
  };

  const double scale = std::pow(10.0, config.plan_round_digits);
  const auto passes = [&](double value) {
    return std::round(value * scale) / scale <= config.plan_target + 1e-15;
  };

  std::map<int, std::pair<std::vector<int>, double>> evaluations;
  const auto value_at = [&](int n) {
    const auto found = evaluations.find(n);
    if (found != evaluations.end()) return found->second.second;
    evaluations[n] = evaluate(n);
    return evaluations[n].second;
  };

  detail::Stopwatch watch;
  int pass_n = -1, fail_n = 0;
  for (int n = 1; n <= config.plan_max_n; n *= 2) {
    if (passes(value_at(n))) {
      pass_n = n;
      break;
    }
    fail_n = n;
    if (n > config.plan_max_n / 2) break;
  }
  if (pass_n < 0 && fail_n < config.plan_max_n && passes(value_at(config.plan_max_n))) {
    pass_n = config.plan_max_n;
  }
  if (pass_n < 0) {
    throw BudgetExceeded("plan: target " + std::to_string(config.plan_target) +
                         " unreachable with per-arm n up to " +
                         std::to_string(config.plan_max_n));
  }
  while (pass_n - fail_n > 1) {
    const int mid = fail_n + (pass_n - fail_n) / 2;
    (passes(value_at(mid)) ? pass_n : fail_n) = mid;
  }

  // Monotonicity audit over every evaluated size.
  bool monotone = true;
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& [n, entry] : evaluations) {
    if (entry.second > previous + monotone_slack(n)) monotone = false;
    previous = entry.second;
  }

  nlohmann::ordered_json config_echo;
  config_echo["rule"] = config.rule;
  config_echo["shape"] = config.plan_shape;
  config_echo["target"] = config.plan_target;
  config_echo["round_digits"] = config.plan_round_digits;
  config_echo["max_n"] = config.plan_max_n;
  config_echo["seed"] = config.seed;

  CommandResult result;
  result.payload = payload_skeleton("plan", config_echo);
  for (const auto& [n, entry] : evaluations) {
    nlohmann::ordered_json record;
    record["per_arm"] = n;
    record["arm_sizes"] = entry.first;
    if (std::isfinite(entry.second)) {
      record["near_optimality"] = entry.second;
    } else {
      record["near_optimality"] = nullptr;  // rule undefined at this size
    }
    record["pass"] = passes(entry.second);
    record["minimal"] = n == pass_n;
    result.payload["results"].push_back(std::move(record));
  }
  result.payload["minimal_n"] = pass_n;
  result.payload["monotone"] = monotone;
  if (!monotone) {
    result.notes.push_back("warning: evaluated near-optimality was not monotone in n; "
                           "the bisection answer may be off by simulation noise");
  }
  result.notes.push_back("plan finished in " + detail::format_seconds(watch.seconds()));
  return result;
}

// --- reproduce ------------------------------------------------------------------

namespace detail {

struct DiffCell {
  nlohmann::ordered_json id;  // row identity fields
  std::string cell;
  double computed = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
};

inline void push_diff(nlohmann::ordered_json& records, bool& all_pass, const DiffCell& cell) {
  const double deviation = std::abs(cell.computed - cell.reference);
  const bool pass = deviation <= cell.tolerance;
  all_pass = all_pass && pass;
  nlohmann::ordered_json record = cell.id;
  record["cell"] = cell.cell;
  record["computed"] = cell.computed;
  record["reference"] = cell.reference;
  record["deviation"] = deviation;
  record["tolerance"] = cell.tolerance;
  record["pass"] = pass;
  records.push_back(std::move(record));
}

}  // namespace detail

inline CommandResult cmd_reproduce(const RunConfig& config) {
  namespace ref = nearopt::reference;
  if (config.table < 1 || config.table > 4) {
    throw std::invalid_argument("reproduce: --table must be 1, 2, 3 or 4");
  }
  const bool full = config.budget == "full" || config.budget == "paper";

  nlohmann::ordered_json config_echo;
  config_echo["table"] = config.table;
  config_echo["budget"] = full ? "full" : "desk";
  config_echo["alpha"] = config.alpha;
  config_echo["seed"] = config.seed;

  CommandResult result;
  result.payload = payload_skeleton("reproduce", config_echo);
  auto& records = result.payload["results"];
  bool all_pass = true;
  detail::Stopwatch watch;

  if (config.table == 1) {
    const TrialDesign design(std::vector<int>(ref::kTable1Design.begin(), ref::kTable1Design.end()));
    const auto test_config = TestConfig::for_design(design, config.alpha);
    for (const auto& row : ref::kTable1) {
      const auto state =
          mortality_to_state({ref::kTable1StandardMortality, row.new_mortality});
      nlohmann::ordered_json id;
      id["new_mortality"] = row.new_mortality;

      const auto test_probs = exact_probs_two_arm_test(design, state, test_config);
      const double test_loss = regret_at_state(test_probs, state).expected_loss;
      detail::push_diff(records, all_pass, {id, "test_p_standard", test_probs.probs[0],
                                            row.test_p_standard, ref::kScenarioProbTol});
      detail::push_diff(records, all_pass, {id, "test_p_new", test_probs.probs[1], row.test_p_new,
                                            ref::kScenarioProbTol});
      detail::push_diff(records, all_pass, {id, "test_expected_loss", test_loss,
                                            row.test_expected_loss, ref::kScenarioLossTol});

      const auto es_probs = exact_probs_two_arm_es(design, state);
      const double es_loss = regret_at_state(es_probs, state).expected_loss;
      detail::push_diff(records, all_pass, {id, "es_p_standard", es_probs.probs[0],
                                            row.es_p_standard, ref::kScenarioProbTol});
      detail::push_diff(records, all_pass,
                        {id, "es_p_new", es_probs.probs[1], row.es_p_new, ref::kScenarioProbTol});
      detail::push_diff(records, all_pass,
                        {id, "es_expected_loss", es_loss, row.es_expected_loss,
                         ref::kScenarioLossTol});
    }
  } else if (config.table == 2) {
    const GridSpec grid{GridSpec::Family::full_product, GridSpec::midpoints(config.grid_points),
                        true};
    for (const auto& row : ref::kTable2) {
      const bool extended = row.per_arm > ref::kTable2DeskMaxPerArm;
      if (extended && !full) continue;
      const TrialDesign design({row.per_arm, row.per_arm});
      nlohmann::ordered_json id;
      id["per_arm"] = row.per_arm;
      id["evaluation"] = extended ? "coarse-to-fine" : "full-grid";
      const double tol = extended ? ref::kTwoArmNearOptExtendedTol : ref::kTwoArmNearOptTol;
      for (const auto& [kind, cell, reference_value] :
           {std::tuple{RuleKind::hypothesis_test, "test_near_optimality", row.test_value},
            std::tuple{RuleKind::empirical_success, "es_near_optimality", row.es_value}}) {
        const auto search =
            extended
                ? coarse_to_fine_two_arm(kind, design, grid, RefineSchedule{}, config.alpha,
                                         config.threads, config.top_k)
                : max_regret_grid(kind, design, grid, ExactEvaluator{config.alpha}, config.top_k,
                                  config.threads);
        detail::push_diff(records, all_pass, {id, cell, search.value, reference_value, tol});
      }
    }
  } else if (config.table == 3) {
    const TrialDesign design(std::vector<int>(ref::kTable3Design.begin(), ref::kTable3Design.end()));
    const auto state = mortality_to_state(
        std::vector<double>(ref::kTable3Mortality.begin(), ref::kTable3Mortality.end()));
    McOptions opts;
    opts.n_sims = config.n_sims;
    opts.seed = config.seed;
    opts.threads = config.threads;
    const auto run = [&](RuleKind kind) {
      return kind == RuleKind::empirical_success
                 ? mc_probs(EsCountRule(design), design, state, opts)
                 : mc_probs(TestCountRule(design, TestConfig::for_design(design, config.alpha)),
                            design, state, opts);
    };
    for (const auto& [kind, label, ref_probs, ref_loss] :
         {std::tuple{RuleKind::hypothesis_test, "dunnett", ref::kTable3DunnettProbs,
                     ref::kTable3DunnettLoss},
          std::tuple{RuleKind::empirical_success, "es", ref::kTable3EsProbs,
                     ref::kTable3EsLoss}}) {
      const auto probs = run(kind);
      const double loss = regret_at_state(probs, state).expected_loss;
      for (int t = 0; t < design.arms(); ++t) {
        nlohmann::ordered_json id;
        id["rule"] = label;
        id["arm"] = design.label(t);
        detail::push_diff(records, all_pass,
                          {id, "prescription_prob", probs.probs[static_cast<std::size_t>(t)],
                           ref_probs[static_cast<std::size_t>(t)], ref::kFiveArmProbTol});
      }
      nlohmann::ordered_json id;
      id["rule"] = label;
      id["arm"] = "all";
      detail::push_diff(records, all_pass,
                        {id, "expected_loss", loss, ref_loss, ref::kFiveArmLossTol});
    }
  } else {
    const int design_count = full ? static_cast<int>(ref::kTable4.size())
                                  : ref::kTable4DeskDesigns;
    for (int d = 0; d < design_count; ++d) {
      const auto& row = ref::kTable4[static_cast<std::size_t>(d)];
      const TrialDesign design(std::vector<int>(row.design.begin(), row.design.end()));
      PipelineOptions opts;
      opts.budgets = full ? PipelineBudgets::paper() : PipelineBudgets::desk();
      if (config.step3_sims > 0) opts.budgets.step3_sims = config.step3_sims;
      opts.alpha = config.alpha;
      opts.seed = config.seed;
      opts.threads = config.threads;
      if (!config.checkpoint.empty()) {
        opts.checkpoint_path = config.checkpoint + ".design" + std::to_string(d);
      }
      nlohmann::ordered_json id;
      id["design"] = detail::design_text(std::vector<int>(row.design.begin(), row.design.end()));
      for (const auto& [kind, cell, reference_value, tol] :
           {std::tuple{RuleKind::hypothesis_test, "dunnett_near_optimality", row.test_value,
                       ref::kFiveArmTestTol},
            std::tuple{RuleKind::empirical_success, "es_near_optimality", row.es_value,
                       ref::kFiveArmEsTol}}) {
        PipelineOptions rule_opts = opts;
        if (!rule_opts.checkpoint_path.empty()) {
          rule_opts.checkpoint_path += std::string(".") + rule_name(kind);
        }
        const auto search = max_regret_multiarm_pipeline(kind, design, rule_opts);
        detail::push_diff(records, all_pass, {id, cell, search.value, reference_value, tol});
      }
    }
  }

  result.payload["all_pass"] = all_pass;
  result.notes.push_back("table " + std::to_string(config.table) + " reproduced in " +
                         detail::format_seconds(watch.seconds()));

  // Artifact files: the same payload rendered in every format.
  std::filesystem::create_directories(config.out_dir);
  const std::string base =
      (std::filesystem::path(config.out_dir) / ("table" + std::to_string(config.table))).string();
  for (const auto& [extension, format] :
       {std::pair{".json", "json"}, {".csv", "csv"}, {".md", "markdown"}}) {
    std::ofstream out(base + extension);
    out << render(result, format);
    result.notes.push_back("wrote " + base + extension);
  }

  if (!all_pass) result.exit_code = 2;
  return result;
}

inline CommandResult run_command(const RunConfig& config) {
  if (config.command == "scenario") return cmd_scenario(config);
  if (config.command == "near-optimality") return cmd_near_optimality(config);
  if (config.command == "bounds") return cmd_bounds(config);
  if (config.command == "plan") return cmd_plan(config);
  if (config.command == "reproduce") return cmd_reproduce(config);
  throw std::invalid_argument("unknown command `" + config.command + "`");
}

}  // namespace nearopt::cli
