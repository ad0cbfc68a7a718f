#include <catch2/catch.hpp>

#include <sstream>

#include "nearopt/cli/commands.hpp"
#include "nearopt/cli/output.hpp"
#include "nearopt/cli/run_config.hpp"

using namespace nearopt;
using namespace nearopt::cli;

namespace {

RunConfig scenario_config() {
  RunConfig config;
  config.command = "scenario";
  config.designs = {{100, 99}};
  config.rule = "both";
  config.mortality_states = {{0.25, 0.20}, {0.25, 0.15}};
  config.format = "json";
  return config;
}

}  // namespace

TEST_CASE("config files parse with line-level diagnostics", "[cli]") {
  const auto known = [](const std::string& cmd, const std::string& key) {
    return cmd == "scenario" && (key == "design" || key == "mortality");
  };

  std::istringstream good(
      "# benchmark scenario\n"
      "command = scenario\n"
      "design = 100,99\n"
      "mortality = 0.25,0.20  ; one state per line\n"
      "mortality = 0.25,0.15\n");
  const auto lines = read_config_lines(good, "run.ini");
  REQUIRE(lines.size() == 4);
  CHECK(lines[1].key == "design");
  CHECK(lines[2].value == "0.25,0.20");
  const auto args = config_args(lines, "run.ini", known);
  REQUIRE(args.size() == 7);
  CHECK(args[0] == "scenario");
  CHECK(args[1] == "--design");

  std::istringstream malformed("command = scenario\ndesign 100,99\n");
  auto malformed_lines = [&] { return read_config_lines(malformed, "bad.ini"); };
  CHECK_THROWS_WITH(malformed_lines(), Catch::Contains("bad.ini:2"));

  std::istringstream unknown("command = scenario\nmortalities = 0.2,0.3\n");
  const auto parsed = read_config_lines(unknown, "bad.ini");
  CHECK_THROWS_WITH(config_args(parsed, "bad.ini", known),
                    Catch::Contains("bad.ini:2") && Catch::Contains("mortalities"));

  std::istringstream missing("design = 100,99\n");
  const auto no_command = read_config_lines(missing, "none.ini");
  CHECK_THROWS_WITH(config_args(no_command, "none.ini", known), Catch::Contains("command"));
}

TEST_CASE("rational parsing accepts fractions and decimals", "[cli]") {
  CHECK(parse_rational("1/2") == Rational(1, 2));
  CHECK(parse_rational("0.3") == Rational(3, 10));
  CHECK(parse_rational("2") == Rational(2));
  CHECK(parse_rational("0.125") == Rational(1, 8));
}

TEST_CASE("scenario payloads are orientation safe and round-trip", "[cli]") {
  const auto mortality_run = cmd_scenario(scenario_config());

  RunConfig success = scenario_config();
  success.mortality_states.clear();
  success.success_states = {{0.75, 0.80}, {0.75, 0.85}};
  const auto success_run = cmd_scenario(success);

  // Same states expressed in either orientation give byte-identical output.
  CHECK(render_json(mortality_run) == render_json(success_run));
  CHECK(render_csv(mortality_run) == render_csv(success_run));

  // Emitted JSON re-parses and validates against the schema.
  const auto parsed = nlohmann::json::parse(render_json(mortality_run));
  validate_payload(parsed);
  CHECK(parsed.at("config").at("designs")[0] == nlohmann::json({100, 99}));
  CHECK(parsed.at("results").size() == 4);
  for (const auto& record : parsed.at("results")) {
    CHECK(record.at("expected_loss").is_number());
    CHECK(record.at("probs").size() == 2);
  }
}

TEST_CASE("identical config and seed give byte-identical output", "[cli]") {
  RunConfig config = scenario_config();
  config.evaluator = "mc";
  config.n_sims = 50000;
  config.seed = 9;
  config.threads = 1;
  const auto first = cmd_scenario(config);
  config.threads = 2;  // execution detail; payload must not change
  const auto second = cmd_scenario(config);
  CHECK(render_json(first) == render_json(second));
  CHECK(render_csv(first) == render_csv(second));
}

TEST_CASE("scenario with equal means reports zero loss everywhere", "[cli]") {
  RunConfig config = scenario_config();
  config.mortality_states = {{0.25, 0.25}};
  const auto result = cmd_scenario(config);
  for (const auto& record : result.payload.at("results")) {
    CHECK(record.at("expected_loss").get<double>() == 0.0);
    for (const auto& loss : record.at("per_arm_loss")) CHECK(loss.get<double>() == 0.0);
  }
}

TEST_CASE("scenario validates orientation and rule choices", "[cli]") {
  RunConfig config = scenario_config();
  config.success_states = {{0.75, 0.80}};
  CHECK_THROWS_WITH(cmd_scenario(config), Catch::Contains("not both"));

  RunConfig no_states = scenario_config();
  no_states.mortality_states.clear();
  CHECK_THROWS_AS(cmd_scenario(no_states), std::invalid_argument);

  RunConfig bad_rule = scenario_config();
  bad_rule.rule = "dunnett";
  CHECK_THROWS_AS(cmd_scenario(bad_rule), std::invalid_argument);

  RunConfig wrong_width = scenario_config();
  wrong_width.mortality_states = {{0.25}};
  CHECK_THROWS_AS(cmd_scenario(wrong_width), std::invalid_argument);
}

TEST_CASE("near-optimality rejects infeasible evaluator combinations", "[cli]") {
  RunConfig config;
  config.command = "near-optimality";
  config.designs = {{10, 10, 10}};
  config.rule = "both";
  config.evaluator = "exact";
  CHECK_THROWS_WITH(cmd_near_optimality(config), Catch::Contains("two-arm"));
}

TEST_CASE("bounds command emits both bounds and the selection", "[cli]") {
  RunConfig config;
  config.command = "bounds";
  config.bound_range = 1.0;
  config.bound_arms = 2;
  config.bound_n = {100};
  const auto result = cmd_bounds(config);
  const auto& record = result.payload.at("results").at(0);
  CHECK(record.at("prop1").get<double>() == Approx(0.0428882).margin(5e-7));
  CHECK(record.at("prop2").get<double>() == Approx(0.0832555).margin(5e-7));
  CHECK(record.at("selected").get<std::string>() == "prop1");

  RunConfig zero = config;
  zero.bound_range = 0.0;
  const auto zero_result = cmd_bounds(zero);
  const auto& zr = zero_result.payload.at("results").at(0);
  CHECK(zr.at("prop1").get<double>() == 0.0);
  CHECK(zr.at("prop2").get<double>() == 0.0);
}

TEST_CASE("plan finds the trivial and benchmark sample sizes", "[cli][slow]") {
  RunConfig trivial;
  trivial.command = "plan";
  trivial.rule = "es";
  trivial.plan_shape = {1, 1};
  trivial.plan_target = 1.0;
  const auto easy = cmd_plan(trivial);
  CHECK(easy.payload.at("minimal_n").get<int>() == 1);

  RunConfig benchmark = trivial;
  benchmark.plan_target = 0.012;
  const auto plan = cmd_plan(benchmark);
  CHECK(plan.payload.at("minimal_n").get<int>() == 100);
  CHECK(plan.payload.at("monotone").get<bool>());

  RunConfig unreachable = trivial;
  unreachable.plan_target = 1e-6;
  unreachable.plan_max_n = 64;
  CHECK_THROWS_AS(cmd_plan(unreachable), BudgetExceeded);
}

TEST_CASE("plan reaches the hypothesis-test benchmark target", "[cli][slow]") {
  // A two-arm hypothesis-test trial needs roughly 4000 per arm to match the
  // near-optimality the empirical success rule reaches with 100.
  RunConfig config;
  config.command = "plan";
  config.rule = "ttest";
  config.plan_shape = {1, 1};
  config.plan_target = 0.0115;
  const auto plan = cmd_plan(config);
  const int minimal = plan.payload.at("minimal_n").get<int>();
  CHECK(minimal <= 4000);
  CHECK(minimal > 2000);
  CHECK(plan.payload.at("monotone").get<bool>());
  // Sizes below the rule's validity floor appear as infeasible rows.
  const auto& first = plan.payload.at("results").at(0);
  CHECK(first.at("per_arm").get<int>() == 1);
  CHECK(first.at("near_optimality").is_null());
}

TEST_CASE("degenerate one-per-arm designs still evaluate", "[cli]") {
  RunConfig config;
  config.command = "near-optimality";
  config.designs = {{1, 1}};
  config.rule = "es";
  const auto result = cmd_near_optimality(config);
  const double value = result.payload.at("results").at(0).at("near_optimality").get<double>();
  CHECK(value >= 0.0);
  CHECK(value <= 1.0);
}

TEST_CASE("markdown and csv renders are well formed", "[cli]") {
  const auto result = cmd_scenario(scenario_config());
  const auto md = render_markdown(result);
  CHECK(md.find("## scenario") == 0);
  CHECK(md.find("| design |") != std::string::npos);
  const auto csv = render_csv(result);
  CHECK(csv.rfind("design,", 0) == 0);
  // Four records -> header plus four lines.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
