// nsplan: experiment runner and file-level utilities.
//
// Exit codes: 0 ok, 1 an experiment check failed, 2 bad input or I/O error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nsplan/calibration.hpp"
#include "nsplan/error.hpp"
#include "nsplan/harness.hpp"
#include "nsplan/planner.hpp"
#include "nsplan/rng.hpp"
#include "nsplan/threshold.hpp"

namespace {

using namespace nsplan;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> tau_plan;
  std::optional<double> alpha;
  std::optional<double> noise_flip;
  std::optional<double> noise_sd;
  std::optional<double> miscal_gamma;
  std::optional<std::string> objects;
  std::optional<int> retries;
  std::optional<int> workers;
  std::string out_dir = "results";
  std::string format = "both";
  std::string config;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Experiment seed");
  cmd->add_option("--trials", o.trials, "Trials (episodes, seeds or instances)");
  cmd->add_option("--tau-plan", o.tau_plan, "Planning confidence threshold");
  cmd->add_option("--alpha", o.alpha, "Info-action uncertainty reduction rate");
  cmd->add_option("--noise-flip", o.noise_flip, "Perception flip rate");
  cmd->add_option("--noise-sd", o.noise_sd, "Logit noise standard deviation");
  cmd->add_option("--miscal-gamma", o.miscal_gamma, "Miscalibration exponent (1 = calibrated)");
  cmd->add_option("--objects", o.objects, "Objects per scene: N or MIN-MAX");
  cmd->add_option("--retries", o.retries, "Maximum loop iterations R");
  cmd->add_option("--workers", o.workers, "Worker threads");
  cmd->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--format", o.format, "csv, json or both")->capture_default_str();
  cmd->add_option("--config", o.config, "JSON experiment config; flags override it");
}

std::pair<int, int> parse_objects(const std::string& text) {
  const auto dash = text.find('-');
  try {
    if (dash == std::string::npos) {
      const int n = std::stoi(text);
      return {n, n};
    }
    return {std::stoi(text.substr(0, dash)), std::stoi(text.substr(dash + 1))};
  } catch (const std::exception&) {
    throw DomainError(fmt::format("--objects expects N or MIN-MAX, got '{}'", text));
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(fmt::format("{}: {}", path, e.what()));
  }
}

ExperimentConfig build_config(ExperimentKind kind, const Overrides& o) {
  auto c = default_config(kind);
  if (!o.config.empty()) c = config_from_json(read_json_file(o.config), c);
  c.kind = kind;
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.tau_plan) c.tau_plan = *o.tau_plan;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.noise_flip) c.noise.flip_rate = *o.noise_flip;
  if (o.noise_sd) c.noise.logit_noise_sd = *o.noise_sd;
  if (o.miscal_gamma) c.noise.miscal_gamma = *o.miscal_gamma;
  if (o.objects) std::tie(c.min_objects, c.max_objects) = parse_objects(*o.objects);
  if (o.retries) c.max_retries = *o.retries;
  if (o.workers) c.workers = *o.workers;
  c.out_dir = o.out_dir;
  c.format = parse_export_format(o.format);
  c.validate();
  return c;
}

int run_experiment(ExperimentKind kind, const Overrides& o) {
  const auto config = build_config(kind, o);
  const auto report = run(config);
  for (const auto& path : export_report(report, config.out_dir, config.format)) {
    std::cout << "wrote " << path << "\n";
  }
  for (const auto& [name, ok] : report.checks) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
  }
  return report.pass() ? 0 : 1;
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out || !(out << text)) throw IoError(fmt::format("failed writing '{}'", path.string()));
  std::cout << "wrote " << path.string() << "\n";
}

int calibrate_file(const std::string& input, const Overrides& o) {
  std::ifstream in(input);
  if (!in) throw IoError(fmt::format("cannot open '{}'", input));
  const auto report = reliability_report(read_predictions_csv(in));
  const auto verdict = calibration_verdict(report, 0.02);
  auto doc = to_json(report);
  doc["verdict"] = verdict.pass ? "pass" : "fail";
  doc["epsilon_cal"] = verdict.epsilon_cal;
  write_text(o.out_dir, "calibration_report.json", round_numbers(doc).dump(2) + "\n");
  std::cout << fmt::format("ece={:.6f} mce={:.6f} brier={:.6f} verdict={}\n", report.ece, report.mce,
                           report.brier, verdict.pass ? "pass" : "fail");
  return 0;
}

int fit_alpha_file(const std::string& input, const Overrides& o) {
  std::ifstream in(input);
  if (!in) throw IoError(fmt::format("cannot open '{}'", input));
  const auto fit = fit_alpha(read_episode_traces_csv(in));
  if (fit.dropped > 0) std::cerr << "warning: dropped " << fit.dropped << " transitions with U <= 0\n";
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : fit.per_step) steps.push_back({{"mean", s.mean}, {"sd", s.sd}, {"count", s.count}});
  const nlohmann::json doc{{"alpha_hat", fit.alpha_hat}, {"stderr", fit.stderr_alpha}, {"r2", fit.r2},
                           {"transitions", fit.transitions}, {"dropped", fit.dropped}, {"per_step", steps}};
  write_text(o.out_dir, "alpha_fit.json", round_numbers(doc).dump(2) + "\n");
  std::cout << fmt::format("alpha_hat={:.6f} stderr={:.6f} r2={:.6f}\n", fit.alpha_hat, fit.stderr_alpha, fit.r2);
  return 0;
}

int sweep_file(const std::string& input, const Overrides& o) {
  nlohmann::json doc;
  if (input.empty()) {
    // reference curves only
    std::array<SuccessCurve, 3> s;
    std::array<TimeCurve, 3> t;
    for (std::size_t i = 0; i < 3; ++i) {
      s[i] = reference_success(kSuccessForms[i]);
      t[i] = reference_time(kTimeForms[i]);
    }
    doc["report"] = threshold_report(s[0], t[0]);
    doc["forms"] = forms_table(s, t);
  } else {
    std::ifstream in(input);
    if (!in) throw IoError(fmt::format("cannot open '{}'", input));
    const auto samples = read_sweep_csv(in);
    const auto s = fit_success(samples, SuccessForm::Exponential);
    const auto t = fit_time(samples, TimeForm::Linear);
    doc["report"] = threshold_report(s, t);
    std::array<SuccessCurve, 3> ss;
    std::array<TimeCurve, 3> ts;
    for (std::size_t i = 0; i < 3; ++i) {
      ss[i] = fit_success(samples, kSuccessForms[i]);
      ts[i] = fit_time(samples, kTimeForms[i]);
    }
    doc["forms"] = forms_table(ss, ts);
  }
  write_text(o.out_dir, "threshold_report.json", round_numbers(doc).dump(2) + "\n");
  std::cout << fmt::format("tau*={:.6f} (stated 0.73, 1/b={:.4f})\n", doc["report"]["tau_star_numeric"].get<double>(),
                           doc["report"]["tau_star_inverse_b"].get<double>());
  return 0;
}

int plan_once(const Overrides& o, const std::string& goal_text, const std::string& scene_file, bool no_info) {
  auto c = build_config(ExperimentKind::PlanBenchmark, o);
  Scene scene;
  if (!scene_file.empty()) {
    scene = scene_from_json(read_json_file(scene_file));
  } else {
    scene = generate_scene(c.min_objects, c.stack_bias, derive_seed(c.seed, 0, 2));
  }
  const Goal goal = goal_text.empty() ? random_tower_goal(scene.ids(), derive_seed(c.seed, 0, 3))
                                      : parse_goal(goal_text);
  PlannerOptions options;
  options.tau_plan = c.tau_plan;
  options.max_retries = c.max_retries;
  options.info_gathering = !no_info;
  options.refine = c.refine;
  options.info_cost = c.info_cost;
  SimulatedEnvironment env(scene, c.noise, derive_seed(c.seed, 0, 4));
  const auto episode = plan_under_uncertainty(env, goal, options);
  nlohmann::json doc = to_json(episode);
  doc["scene"] = to_json(scene);
  write_text(c.out_dir, "episode.json", round_numbers(doc).dump(2) + "\n");
  std::cout << fmt::format("goal: {}\nsuccess: {}\ninfo actions: {}\nmanipulation steps: {}\n", goal.to_string(),
                           episode.success, episode.info_actions, episode.manipulation_steps);
  for (const auto& it : episode.iterations) {
    if (it.plan) {
      for (const auto& step : *it.plan) std::cout << "  " << step << "\n";
    }
  }
  return episode.success ? 0 : 1;
}

int mrf_file(const std::string& input, const Overrides& o) {
  const auto state = state_from_json(read_json_file(input));
  const auto mrf = build_mrf(state);
  const auto refined = refine_state(state);
  nlohmann::json doc{{"mrf", to_json(mrf)}, {"refined", to_json(refined)}};
  write_text(o.out_dir, "mrf.json", round_numbers(doc).dump(2) + "\n");
  return 0;
}

int gen_scenes(const Overrides& o, double stack_bias) {
  const int count = o.trials.value_or(10);
  const auto [lo, hi] = parse_objects(o.objects.value_or("3-5"));
  const std::uint64_t seed = o.seed.value_or(1);
  for (int i = 0; i < count; ++i) {
    const auto s = derive_seed(seed, static_cast<std::uint64_t>(i));
    const int n = lo + static_cast<int>(s % static_cast<std::uint64_t>(hi - lo + 1));
    const auto scene = generate_scene(n, stack_bias, s);
    write_text(o.out_dir, fmt::format("scene_{:03d}.json", i), to_json(scene).dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-aware symbolic planning experiments"};
  app.require_subcommand(1);

  Overrides o;
  std::string input, goal, scene_file, kind_name;
  bool no_info = false;
  double stack_bias = 0.5;
  std::optional<double> u0;
  double eps_cal = 0.0;

  auto* calibrate = app.add_subcommand("calibrate", "Calibration experiment, or score a confidence,label CSV");
  add_common(calibrate, o);
  calibrate->add_option("--input", input, "Predictions CSV to score instead of simulating");

  auto* alpha = app.add_subcommand("fit-alpha", "Alpha recovery experiment, or fit an episode CSV");
  add_common(alpha, o);
  alpha->add_option("--input", input, "Episode CSV (episode_id,step,U,action_kind)");

  auto* conv = app.add_subcommand("verify-convergence", "Bound consistency over seeded episodes");
  add_common(conv, o);
  conv->add_option("--u0", u0, "Only evaluate k* for this initial uncertainty");
  conv->add_option("--eps-cal", eps_cal, "Calibration slack for --u0");

  auto* sweep = app.add_subcommand("sweep-threshold", "Threshold sweep, or fit a sweep CSV");
  add_common(sweep, o);
  sweep->add_option("--input", input, "Sweep CSV (tau,success_rate,mean_time_ms,trials)");
  bool reference = false;
  sweep->add_flag("--reference", reference, "Report the quoted reference curves only");

  auto* plan = app.add_subcommand("plan", "Run one planning episode");
  add_common(plan, o);
  plan->add_option("--goal", goal, "Goal, e.g. 'On(a,b) & On(b,c)'");
  plan->add_option("--scene", scene_file, "Scene JSON (default: generated)");
  plan->add_flag("--no-info", no_info, "Disable information gathering");

  auto* mrf = app.add_subcommand("mrf-check", "MRF property experiment, or refine a state JSON");
  add_common(mrf, o);
  mrf->add_option("--input", input, "Probabilistic state JSON");

  auto* gen = app.add_subcommand("gen-scenes", "Write generated scenes as JSON");
  add_common(gen, o);
  gen->add_option("--stack-bias", stack_bias, "Stacking probability")->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "Run the experiment named in a config file");
  add_common(run_cmd, o);
  run_cmd->add_option("--kind", kind_name, "Experiment kind (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*calibrate) {
      return input.empty() ? run_experiment(ExperimentKind::Calibration, o) : calibrate_file(input, o);
    }
    if (*alpha) return input.empty() ? run_experiment(ExperimentKind::AlphaFit, o) : fit_alpha_file(input, o);
    if (*conv) {
      if (u0) {
        const auto c = build_config(ExperimentKind::Convergence, o);
        std::cout << convergence_bound(c.tau_plan, c.alpha, *u0, eps_cal) << "\n";
        return 0;
      }
      return run_experiment(ExperimentKind::Convergence, o);
    }
    if (*sweep) {
      if (reference || !input.empty()) return sweep_file(input, o);
      return run_experiment(ExperimentKind::ThresholdSweep, o);
    }
    if (*plan) return plan_once(o, goal, scene_file, no_info);
    if (*mrf) return input.empty() ? run_experiment(ExperimentKind::MrfCheck, o) : mrf_file(input, o);
    if (*gen) return gen_scenes(o, stack_bias);
    if (*run_cmd) {
      if (kind_name.empty()) {
        if (o.config.empty()) throw DomainError("run needs --config or --kind");
        kind_name = read_json_file(o.config).at("kind").get<std::string>();
      }
      return run_experiment(parse_experiment_kind(kind_name), o);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
