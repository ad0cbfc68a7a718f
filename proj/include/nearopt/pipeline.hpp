#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nearopt/regret.hpp"

namespace nearopt {

// Simulation budgets of the three-step multi-arm search: a coarse
// full-product sweep, a dense sweep of the rule's restricted worst-case
// family, then re-evaluation of the leaders at large simulation counts to
// strip the selection bias of maximizing over noisy estimates.
struct PipelineBudgets {
  bool run_step1 = true;
  int step1_grid = 51;
  std::uint64_t step1_sims = 100000;
  int step2_grid = 101;
  std::uint64_t step2_sims = 1000000;
  std::vector<std::pair<int, std::uint64_t>> rerank;  // {keep_top_m, n_sims} cascade
  int step3_top = 10;
  std::uint64_t step3_sims = 100000000;

  static PipelineBudgets paper() { return PipelineBudgets{}; }

  // Workstation-scale profile: the same search structure with the sweep and
  // re-evaluation budgets cut to finish in tens of minutes. The widened
  // rerank cascade compensates for the noisier step-2 ranking.
  static PipelineBudgets desk() {
    PipelineBudgets b;
    b.step1_grid = 21;
    b.step1_sims = 5000;
    b.step2_sims = 30000;
    b.rerank = {{1000, 1000000}, {50, 5000000}};
    b.step3_sims = 10000000;
    return b;
  }
};

struct PipelineOptions {
  PipelineBudgets budgets = PipelineBudgets::paper();
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string checkpoint_path;  // empty: no checkpointing
  int stop_after_stages = 0;    // 0 = run to completion
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline std::string pipeline_fingerprint_text(RuleKind kind, const TrialDesign& design,
                                             const PipelineOptions& opts) {
  std::string text = rule_name(kind);
  for (int n : design.arm_sizes()) text += "," + std::to_string(n);
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "|a=%.17g|seed=%llu", opts.alpha,
                static_cast<unsigned long long>(opts.seed));
  text += buffer;
  const auto& b = opts.budgets;
  text += "|s1=" + std::to_string(b.run_step1 ? b.step1_grid : 0) + ":" +
          std::to_string(b.step1_sims);
  text += "|s2=" + std::to_string(b.step2_grid) + ":" + std::to_string(b.step2_sims);
  for (const auto& [keep, sims] : b.rerank) {
    text += "|r=" + std::to_string(keep) + ":" + std::to_string(sims);
  }
  text += "|s3=" + std::to_string(b.step3_top) + ":" + std::to_string(b.step3_sims);
  return text;
}

// Candidate lists move between stages as plain sorted vectors.
using Candidates = std::vector<EvaluatedState>;

inline void sort_candidates(Candidates& candidates) {
  std::sort(candidates.begin(), candidates.end(),
            [](const EvaluatedState& a, const EvaluatedState& b) {
              return state_better(a.regret, a.state, b.regret, b.state);
            });
}

inline nlohmann::ordered_json candidates_to_json(const Candidates& candidates) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& c : candidates) {
    list.push_back({{"state", c.state}, {"regret", c.regret}, {"probs", c.probs}});
  }
  return list;
}

inline Candidates candidates_from_json(const nlohmann::json& list) {
  Candidates out;
  for (const auto& item : list) {
    EvaluatedState e;
    e.state = item.at("state").get<std::vector<double>>();
    e.regret = item.at("regret").get<double>();
    e.probs = item.at("probs").get<std::vector<double>>();
    out.push_back(std::move(e));
  }
  return out;
}

// Versioned stage-by-stage record of a pipeline run; lets long searches
// resume after an interruption instead of restarting.
class PipelineCheckpoint {
 public:
  static constexpr int kSchemaVersion = 1;

  PipelineCheckpoint(std::string path, std::uint64_t fingerprint)
      : path_(std::move(path)), fingerprint_(fingerprint) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) return;
    try {
      const auto doc = nlohmann::json::parse(in);
      if (doc.at("schema_version").get<int>() != kSchemaVersion) return;
      if (doc.at("fingerprint").get<std::uint64_t>() != fingerprint_) return;
      for (const auto& stage : doc.at("stages")) {
        StageDiagnostics diag;
        diag.name = stage.at("name").get<std::string>();
        diag.states = stage.at("states").get<std::uint64_t>();
        diag.n_sims_per_state = stage.at("n_sims").get<std::uint64_t>();
        diag.best_regret = stage.at("best_regret").get<double>();
        diag.seconds = stage.at("seconds").get<double>();
        stages_.push_back(diag);
        candidates_.push_back(candidates_from_json(stage.at("candidates")));
      }
      loaded_ = true;
    } catch (const nlohmann::json::exception&) {
      stages_.clear();
      candidates_.clear();
    }
  }

  bool has_stage(std::size_t index) const { return index < stages_.size(); }
  const StageDiagnostics& stage(std::size_t index) const { return stages_[index]; }
  const Candidates& candidates(std::size_t index) const { return candidates_[index]; }
  bool resumed() const { return loaded_; }

  void record(const StageDiagnostics& diag, const Candidates& candidates) {
    stages_.push_back(diag);
    candidates_.push_back(candidates);
    write();
  }

 private:
  void write() const {
    if (path_.empty()) return;
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["fingerprint"] = fingerprint_;
    doc["stages"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      doc["stages"].push_back({{"name", stages_[i].name},
                               {"states", stages_[i].states},
                               {"n_sims", stages_[i].n_sims_per_state},
                               {"best_regret", stages_[i].best_regret},
                               {"seconds", stages_[i].seconds},
                               {"candidates", candidates_to_json(candidates_[i])}});
    }
    const std::string tmp = path_ + ".tmp";
    {
      std::ofstream out(tmp);
      out << doc.dump(1) << "\n";
    }
    std::rename(tmp.c_str(), path_.c_str());
  }

  std::string path_;
  std::uint64_t fingerprint_;
  bool loaded_ = false;
  std::vector<StageDiagnostics> stages_;
  std::vector<Candidates> candidates_;
};

// Re-evaluates the leading candidates at a larger simulation budget.
inline Candidates reevaluate(RuleKind kind, const TrialDesign& design, Candidates candidates,
                             std::size_t keep, std::uint64_t n_sims, std::uint64_t seed,
                             std::uint64_t stream_base, double alpha, int threads) {
  if (candidates.size() > keep) candidates.resize(keep);
  std::optional<TestConfig> config;
  if (kind == RuleKind::hypothesis_test) config = TestConfig::for_design(design, alpha);
  Candidates out(candidates.size());
  parallel_chunks(candidates.size(), 1, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const BinaryState state(candidates[i].state);
      McOptions opts;
      opts.n_sims = n_sims;
      opts.seed = seed;
      opts.stream = stream_base + i;
      opts.threads = 1;
      PrescriptionProbs probs = kind == RuleKind::empirical_success
                                    ? mc_probs(EsCountRule(design), design, state, opts)
                                    : mc_probs(TestCountRule(design, *config), design, state, opts);
      auto report = regret_at_state(std::move(probs), state);
      out[i] = EvaluatedState{state.success_probs, report.expected_loss,
                              std::move(report.probs.probs)};
    }
  });
  sort_candidates(out);
  return out;
}

}  // namespace detail

// Three-step maximum-regret search for multi-arm trials. Step 1 sweeps a
// coarse full-product grid (sorted new-arm profiles only, since equal-size
// new arms are exchangeable) as a guard that the restricted family is not
// missing a larger maximum at that resolution. Step 2 sweeps the rule's
// restricted family densely. Step 3 re-evaluates the leaders at large
// simulation counts and reports their maximum.
inline MaxRegretResult max_regret_multiarm_pipeline(RuleKind kind, const TrialDesign& design,
                                                    const PipelineOptions& options = {}) {
  const auto& budgets = options.budgets;
  const std::uint64_t fingerprint =
      detail::fnv1a(detail::pipeline_fingerprint_text(kind, design, options));
  detail::PipelineCheckpoint checkpoint(options.checkpoint_path, fingerprint);

  MaxRegretResult result;
  result.method = "mc-pipeline";
  detail::Candidates candidates;
  std::size_t stage_index = 0;
  std::uint64_t stream_base = 0;
  const auto stage_stream = [](std::size_t stage) {
    return static_cast<std::uint64_t>(stage + 1) << 40;
  };

  const auto run_stage = [&](const std::string& name, std::uint64_t states,
                             std::uint64_t n_sims,
                             const std::function<detail::Candidates()>& body) -> bool {
    if (checkpoint.has_stage(stage_index)) {
      result.stages.push_back(checkpoint.stage(stage_index));
      candidates = checkpoint.candidates(stage_index);
      ++stage_index;
      return true;
    }
    const auto start = std::chrono::steady_clock::now();
    candidates = body();
    StageDiagnostics diag{name, states, n_sims, candidates.empty() ? 0.0 : candidates.front().regret,
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                              .count()};
    result.stages.push_back(diag);
    checkpoint.record(diag, candidates);
    ++stage_index;
    return true;
  };

  const auto finish = [&]() {
    if (!candidates.empty()) {
      result.top = candidates;
      if (result.top.size() > static_cast<std::size_t>(budgets.step3_top)) {
        result.top.resize(static_cast<std::size_t>(budgets.step3_top));
      }
      result.argmax = result.top.front();
      result.value = result.argmax.regret;
    }
    return result;
  };

  // Step 1: coarse full-product guard.
  if (budgets.run_step1) {
    stream_base = stage_stream(stage_index);
    run_stage("step1-full-grid", FamilyStates(design, GridSpec{GridSpec::Family::full_product,
                                                               GridSpec::closed(budgets.step1_grid),
                                                               true})
                                     .count(),
              budgets.step1_sims, [&] {
                GridSpec grid{GridSpec::Family::full_product, GridSpec::closed(budgets.step1_grid),
                              true};
                McEvaluatorSpec mc;
                mc.opts.n_sims = budgets.step1_sims;
                mc.opts.seed = options.seed;
                mc.opts.stream = stream_base;
                mc.opts.threads = options.threads;
                mc.alpha = options.alpha;
                auto r = max_regret_grid(kind, design, grid, mc, budgets.step3_top,
                                         options.threads);
                return r.top;
              });
    if (options.stop_after_stages > 0 &&
        stage_index >= static_cast<std::size_t>(options.stop_after_stages)) {
      return finish();
    }
  }

  // Step 2: dense sweep of the rule's restricted worst-case family.
  GridSpec family;
  family.points = GridSpec::closed(budgets.step2_grid);
  family.constrained = true;
  if (design.arms() == 2) {
    family.family = GridSpec::Family::full_product;
  } else if (kind == RuleKind::empirical_success) {
    family.family = GridSpec::Family::control_vs_rest;
  } else {
    family.family = GridSpec::Family::control_best_rest;
  }
  const std::size_t step2_keep =
      budgets.rerank.empty() ? static_cast<std::size_t>(budgets.step3_top)
                             : static_cast<std::size_t>(budgets.rerank.front().first);
  stream_base = stage_stream(stage_index);
  run_stage("step2-family-grid", FamilyStates(design, family).count(), budgets.step2_sims, [&] {
    McEvaluatorSpec mc;
    mc.opts.n_sims = budgets.step2_sims;
    mc.opts.seed = options.seed;
    mc.opts.stream = stream_base;
    mc.opts.threads = options.threads;
    mc.alpha = options.alpha;
    auto r = max_regret_grid(kind, design, family, mc, static_cast<int>(step2_keep),
                             options.threads);
    return r.top;
  });
  if (options.stop_after_stages > 0 &&
      stage_index >= static_cast<std::size_t>(options.stop_after_stages)) {
    return finish();
  }

  // Rerank cascade (desk profile): tighten the leader list between sweeps.
  for (std::size_t level = 0; level < budgets.rerank.size(); ++level) {
    const auto [keep, sims] = budgets.rerank[level];
    stream_base = stage_stream(stage_index);
    run_stage("rerank-" + std::to_string(level + 1),
              std::min<std::uint64_t>(keep, candidates.size()), sims, [&] {
                return detail::reevaluate(kind, design, candidates,
                                          static_cast<std::size_t>(keep), sims, options.seed,
                                          stream_base, options.alpha, options.threads);
              });
    if (options.stop_after_stages > 0 &&
        stage_index >= static_cast<std::size_t>(options.stop_after_stages)) {
      return finish();
    }
  }

  // Step 3: large-budget re-evaluation of the leaders.
  stream_base = stage_stream(stage_index);
  run_stage("step3-reevaluate", std::min<std::uint64_t>(budgets.step3_top, candidates.size()),
            budgets.step3_sims, [&] {
              return detail::reevaluate(kind, design, candidates,
                                        static_cast<std::size_t>(budgets.step3_top),
                                        budgets.step3_sims, options.seed, stream_base,
                                        options.alpha, options.threads);
            });
  return finish();
}

}  // namespace nearopt
