#include "nsplan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "experiments.hpp"
#include "nsplan/error.hpp"
#include "nsplan/rng.hpp"

namespace nsplan {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 6> kKindNames{{
    {ExperimentKind::Calibration, "calibration"},
    {ExperimentKind::AlphaFit, "alpha-fit"},
    {ExperimentKind::Convergence, "convergence"},
    {ExperimentKind::ThresholdSweep, "threshold-sweep"},
    {ExperimentKind::PlanBenchmark, "plan-benchmark"},
    {ExperimentKind::MrfCheck, "mrf-check"},
}};

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw DomainError(fmt::format("unknown experiment kind '{}'", name));
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  if (name == "both") return ExportFormat::Both;
  throw DomainError(fmt::format("unknown format '{}' (csv, json, both)", name));
}

void ExperimentConfig::validate() const {
  if (min_objects < kMinSceneObjects || max_objects > kMaxSceneObjects || min_objects > max_objects) {
    throw DomainError(fmt::format("object range [{}, {}] must lie within [{}, {}]", min_objects,
                                  max_objects, kMinSceneObjects, kMaxSceneObjects));
  }
  if (!(stack_bias >= 0.0 && stack_bias <= 1.0)) throw DomainError("stack_bias must lie in [0,1]");
  noise.validate();
  if (!(tau_plan >= 0.5 && tau_plan < 1.0)) throw DomainError("tau_plan must lie in [0.5,1)");
  if (max_retries < 1) throw DomainError("max_retries must be at least 1");
  if (trials < 1) throw DomainError("trials must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (!(info_cost >= 0.0)) throw DomainError("info_cost must be non-negative");
  if (samples < 1) throw DomainError("samples must be at least 1");
  if (!(compare_gamma > 0.0)) throw DomainError("compare_gamma must be positive");
  if (workers < 1) throw DomainError("workers must be at least 1");
  for (double t : taus) {
    if (!(t >= 0.5 && t < 1.0)) throw DomainError(fmt::format("sweep tau {} outside [0.5,1)", t));
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Calibration:
      c.trials = 20;
      break;
    case ExperimentKind::AlphaFit:
      // a strict threshold keeps episodes gathering long enough to fit a rate
      c.trials = 20;
      c.tau_plan = 0.99;
      c.max_retries = 20;
      c.info_cost = 0.0;
      c.refine = false;
      break;
    case ExperimentKind::Convergence:
      c.trials = 100;
      c.max_retries = 30;
      c.info_cost = 0.0;
      c.refine = false;
      break;
    case ExperimentKind::ThresholdSweep:
      // tuned so a loose threshold acts on false positives and a strict one
      // runs out of retries; enough trials to resolve the shallow drop at 0.9
      c.trials = 1000;
      c.max_retries = 7;
      c.refine = false;
      c.noise.flip_rate = 0.2;
      c.noise.logit_noise_sd = 1.0;
      c.noise.look_closer_gain = 0.8;
      c.noise.push_obstacle_gain = 0.8;
      break;
    case ExperimentKind::PlanBenchmark:
      c.trials = 200;
      c.max_retries = 5;
      c.refine = false;
      c.noise.flip_rate = 0.15;
      c.noise.logit_noise_sd = 1.0;
      break;
    case ExperimentKind::MrfCheck:
      c.trials = 100;
      break;
  }
  return c;
}

ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig c) {
  if (!doc.is_object()) throw DomainError("experiment config must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "kind") {
      c.kind = parse_experiment_kind(value.get<std::string>());
    } else if (key == "objects") {
      c.min_objects = value.at("min").get<int>();
      c.max_objects = value.at("max").get<int>();
    } else if (key == "stack_bias") {
      c.stack_bias = value.get<double>();
    } else if (key == "noise") {
      for (const auto& [nk, nv] : value.items()) {
        if (nk == "flip_rate") c.noise.flip_rate = nv.get<double>();
        else if (nk == "logit_noise_sd") c.noise.logit_noise_sd = nv.get<double>();
        else if (nk == "miscal_gamma") c.noise.miscal_gamma = nv.get<double>();
        else if (nk == "look_closer_gain") c.noise.look_closer_gain = nv.get<double>();
        else if (nk == "push_obstacle_gain") c.noise.push_obstacle_gain = nv.get<double>();
        else throw DomainError(fmt::format("unknown noise key '{}'", nk));
      }
    } else if (key == "tau_plan") {
      c.tau_plan = value.get<double>();
    } else if (key == "max_retries") {
      c.max_retries = value.get<int>();
    } else if (key == "trials") {
      c.trials = value.get<int>();
    } else if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else if (key == "alpha") {
      c.alpha = value.get<double>();
    } else if (key == "refine") {
      c.refine = value.get<bool>();
    } else if (key == "info_cost") {
      c.info_cost = value.get<double>();
    } else if (key == "taus") {
      c.taus = value.get<std::vector<double>>();
    } else if (key == "samples") {
      c.samples = value.get<int>();
    } else if (key == "compare_gamma") {
      c.compare_gamma = value.get<double>();
    } else if (key == "workers") {
      c.workers = value.get<int>();
    } else if (key == "out_dir") {
      c.out_dir = value.get<std::string>();
    } else if (key == "format") {
      c.format = parse_export_format(value.get<std::string>());
    } else {
      throw DomainError(fmt::format("unknown config key '{}'", key));
    }
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"objects", {{"min", c.min_objects}, {"max", c.max_objects}}},
          {"stack_bias", c.stack_bias},
          {"noise",
           {{"flip_rate", c.noise.flip_rate},
            {"logit_noise_sd", c.noise.logit_noise_sd},
            {"miscal_gamma", c.noise.miscal_gamma},
            {"look_closer_gain", c.noise.look_closer_gain},
            {"push_obstacle_gain", c.noise.push_obstacle_gain}}},
          {"tau_plan", c.tau_plan},
          {"max_retries", c.max_retries},
          {"trials", c.trials},
          {"seed", c.seed},
          {"alpha", c.alpha},
          {"refine", c.refine},
          {"info_cost", c.info_cost},
          {"taus", c.taus},
          {"samples", c.samples},
          {"compare_gamma", c.compare_gamma}};
}

bool ExperimentReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second; });
}

ExperimentReport run(const ExperimentConfig& config) {
  config.validate();
  switch (config.kind) {
    case ExperimentKind::Calibration: return detail::run_calibration(config);
    case ExperimentKind::AlphaFit: return detail::run_alpha_fit(config);
    case ExperimentKind::Convergence: return detail::run_convergence(config);
    case ExperimentKind::ThresholdSweep: return detail::run_threshold_sweep(config);
    case ExperimentKind::PlanBenchmark: return detail::run_plan_benchmark(config);
    case ExperimentKind::MrfCheck: return detail::run_mrf_check(config);
  }
  throw DomainError("unknown experiment kind");
}

nlohmann::json round_numbers(const nlohmann::json& doc) {
  if (doc.is_number_float()) {
    const double v = doc.get<double>();
    if (!std::isfinite(v)) return nullptr;
    return std::stod(fmt::format("{:.9g}", v));
  }
  if (doc.is_array() || doc.is_object()) {
    nlohmann::json out = doc;
    for (auto& item : out) item = round_numbers(item);
    return out;
  }
  return doc;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  out.close();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace

std::vector<std::string> export_report(const ExperimentReport& report, const std::string& out_dir,
                                       ExportFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", out_dir, ec.message()));
  std::vector<std::string> written;
  if (format != ExportFormat::Json) {
    for (const auto& [name, content] : report.csv) {
      const auto path = fs::path(out_dir) / name;
      write_file(path, content);
      written.push_back(path.string());
    }
  }
  if (format != ExportFormat::Csv) {
    nlohmann::json doc = report.summary;
    doc["kind"] = to_string(report.kind);
    doc["rows"] = report.rows;
    doc["checks"] = report.checks;
    doc["pass"] = report.pass();
    const auto path = fs::path(out_dir) / fmt::format("{}_summary.json", to_string(report.kind));
    write_file(path, round_numbers(doc).dump(2) + "\n");
    written.push_back(path.string());
  }
  return written;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::exception_ptr> errors(count);
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

EdgeKind random_edge_kind(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> rho(-0.9, 0.9);
  switch (pick(rng)) {
    case 0: return EdgeKind::mutual_exclusion();
    case 1: return EdgeKind::implication(true);
    case 2: return EdgeKind::implication(false);
    default: return EdgeKind::correlation(rho(rng));
  }
}

PredicateMrf random_nodes(std::size_t nodes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> conf(0.05, 0.95);
  PredicateMrf mrf;
  for (std::size_t i = 0; i < nodes; ++i) mrf.add_node(clear(fmt::format("n{}", i)), conf(rng));
  return mrf;
}

}  // namespace

PredicateMrf random_tree_mrf(std::size_t nodes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto mrf = random_nodes(nodes, rng);
  for (std::size_t i = 1; i < nodes; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    const auto p = parent(rng);
    mrf.add_edge(p, i, random_edge_kind(rng));
  }
  return mrf;
}

PredicateMrf random_mrf(std::size_t nodes, double edge_probability, std::uint64_t seed) {
  if (!(edge_probability >= 0.0 && edge_probability <= 1.0)) {
    throw DomainError("edge probability must lie in [0,1]");
  }
  std::mt19937_64 rng(seed);
  auto mrf = random_nodes(nodes, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = i + 1; j < nodes; ++j) {
      if (unit(rng) < edge_probability) mrf.add_edge(i, j, random_edge_kind(rng));
    }
  }
  return mrf;
}

Goal random_tower_goal(const std::vector<std::string>& objects, std::uint64_t seed) {
  if (objects.size() < 2) throw DomainError("a tower needs at least two objects");
  std::mt19937_64 rng(seed);
  std::vector<std::string> order = objects;
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> height(2, std::min<std::size_t>(3, order.size()));
  const auto h = height(rng);
  Goal goal;
  for (std::size_t i = 0; i + 1 < h; ++i) goal.atoms.insert(atoms::on(order[i], order[i + 1]));
  return goal;
}

}  // namespace nsplan
