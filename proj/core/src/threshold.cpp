#include "nsplan/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "nsplan/error.hpp"

namespace nsplan {

std::string_view to_string(SuccessForm form) noexcept {
  switch (form) {
    case SuccessForm::Exponential: return "exponential";
    case SuccessForm::Sigmoid: return "sigmoid";
    case SuccessForm::Logarithmic: return "logarithmic";
  }
  return "?";
}

std::string_view to_string(TimeForm form) noexcept {
  switch (form) {
    case TimeForm::Linear: return "linear";
    case TimeForm::Quadratic: return "quadratic";
    case TimeForm::Logarithmic: return "logarithmic";
  }
  return "?";
}

double SuccessCurve::operator()(double tau) const {
  switch (form) {
    case SuccessForm::Exponential: return a * (1.0 - std::exp(-b * tau));
    case SuccessForm::Sigmoid: return a / (1.0 + std::exp(-b * (tau - tau0)));
    case SuccessForm::Logarithmic: return a * std::log1p(b * tau);
  }
  return 0.0;
}

double SuccessCurve::derivative(double tau) const {
  switch (form) {
    case SuccessForm::Exponential: return a * b * std::exp(-b * tau);
    case SuccessForm::Sigmoid: {
      const double g = 1.0 / (1.0 + std::exp(-b * (tau - tau0)));
      return a * b * g * (1.0 - g);
    }
    case SuccessForm::Logarithmic: return a * b / (1.0 + b * tau);
  }
  return 0.0;
}

namespace {

double time_regressor(TimeForm form, double tau) {
  switch (form) {
    case TimeForm::Linear: return tau;
    case TimeForm::Quadratic: return tau * tau;
    case TimeForm::Logarithmic: return std::log1p(tau);
  }
  return 0.0;
}

}  // namespace

double TimeCurve::operator()(double tau) const { return c + d * time_regressor(form, tau); }

double TimeCurve::derivative(double tau) const {
  switch (form) {
    case TimeForm::Linear: return d;
    case TimeForm::Quadratic: return 2.0 * d * tau;
    case TimeForm::Logarithmic: return d / (1.0 + tau);
  }
  return 0.0;
}

SuccessCurve reference_success(SuccessForm form) {
  switch (form) {
    case SuccessForm::Exponential: return {form, 0.89, 4.73, 0.0, 0.94};
    case SuccessForm::Sigmoid: return {form, 0.89, 8.0, 0.65, 0.92};
    case SuccessForm::Logarithmic: return {form, 0.45, 3.5, 0.0, 0.88};
  }
  return {};
}

TimeCurve reference_time(TimeForm form) {
  switch (form) {
    case TimeForm::Linear: return {form, 8.2, 12.5, 0.87};
    case TimeForm::Quadratic: return {form, 8.0, 15.0, 0.85};
    case TimeForm::Logarithmic: return {form, 8.5, 10.0, 0.83};
  }
  return {};
}

double r_squared(double ss_res, double ss_tot) {
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

namespace {

std::size_t distinct_taus(const std::vector<SweepSample>& samples) {
  std::set<double> taus;
  for (const auto& s : samples) taus.insert(s.tau);
  return taus.size();
}

double total_sum_squares(const std::vector<double>& y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss;
}

SuccessCurve curve_from(SuccessForm form, const Eigen::VectorXd& p) {
  return {form, p[0], p[1], p.size() > 2 ? p[2] : 0.0, 1.0};
}

void clamp_params(Eigen::VectorXd& p) {
  p[0] = std::clamp(p[0], 1e-9, 1.0);
  p[1] = std::clamp(p[1], 1e-9, 1e3);
  if (p.size() > 2) p[2] = std::clamp(p[2], -2.0, 3.0);
}

double sse(SuccessForm form, const Eigen::VectorXd& p, const std::vector<SweepSample>& samples) {
  const auto curve = curve_from(form, p);
  double out = 0.0;
  for (const auto& s : samples) {
    const double r = curve(s.tau) - s.success_rate;
    out += r * r;
  }
  return out;
}

Eigen::MatrixXd jacobian(SuccessForm form, const Eigen::VectorXd& p, const std::vector<SweepSample>& samples) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(samples.size()), p.size());
  const double a = p[0], b = p[1];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = samples[i].tau;
    const auto row = static_cast<Eigen::Index>(i);
    switch (form) {
      case SuccessForm::Exponential: {
        const double e = std::exp(-b * t);
        j(row, 0) = 1.0 - e;
        j(row, 1) = a * t * e;
        break;
      }
      case SuccessForm::Sigmoid: {
        const double g = 1.0 / (1.0 + std::exp(-b * (t - p[2])));
        j(row, 0) = g;
        j(row, 1) = a * g * (1.0 - g) * (t - p[2]);
        j(row, 2) = -a * g * (1.0 - g) * b;
        break;
      }
      case SuccessForm::Logarithmic:
        j(row, 0) = std::log1p(b * t);
        j(row, 1) = a * t / (1.0 + b * t);
        break;
    }
  }
  return j;
}

Eigen::VectorXd levenberg_marquardt(SuccessForm form, Eigen::VectorXd p,
                                    const std::vector<SweepSample>& samples) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) y[static_cast<Eigen::Index>(i)] = samples[i].success_rate;

  double lambda = 1e-3;
  double current = sse(form, p, samples);
  for (int iter = 0; iter < 500; ++iter) {
    const auto curve = curve_from(form, p);
    Eigen::VectorXd r(y.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = curve(samples[i].tau) - y[static_cast<Eigen::Index>(i)];
    }
    const Eigen::MatrixXd j = jacobian(form, p, samples);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;

    bool accepted = false;
    while (lambda < 1e12) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index k = 0; k < damped.rows(); ++k) damped(k, k) += lambda * jtj(k, k) + 1e-15;
      Eigen::VectorXd candidate = p + damped.ldlt().solve(-g);
      clamp_params(candidate);
      const double next = sse(form, candidate, samples);
      if (std::isfinite(next) && next < current) {
        const double improvement = current - next;
        p = candidate;
        current = next;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (improvement <= 1e-30 + 1e-15 * current) return p;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }
  return p;
}

}  // namespace

SuccessCurve fit_success(const std::vector<SweepSample>& samples, SuccessForm form) {
  if (distinct_taus(samples) < 3) throw DomainError("success fit needs at least three distinct taus");
  std::vector<double> y;
  for (const auto& s : samples) y.push_back(s.success_rate);
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
    throw FitFailure("success rates are all equal; no curve is identifiable");
  }
  const double mean_tau = std::accumulate(samples.begin(), samples.end(), 0.0,
                                          [](double acc, const auto& s) { return acc + s.tau; }) /
                          static_cast<double>(samples.size());

  Eigen::VectorXd best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (double a0 : {0.3, 0.65, 1.0}) {
    for (double b0 : {1.0, 5.0, 12.0}) {
      Eigen::VectorXd start(form == SuccessForm::Sigmoid ? 3 : 2);
      start[0] = a0;
      start[1] = b0;
      if (form == SuccessForm::Sigmoid) start[2] = mean_tau;
      const auto p = levenberg_marquardt(form, start, samples);
      const double s = sse(form, p, samples);
      if (s < best_sse) {
        best_sse = s;
        best = p;
      }
    }
  }
  if (!std::isfinite(best_sse)) throw FitFailure("success fit did not converge");
  auto curve = curve_from(form, best);
  curve.r2 = r_squared(best_sse, total_sum_squares(y));
  return curve;
}

TimeCurve fit_time(const std::vector<SweepSample>& samples, TimeForm form) {
  if (distinct_taus(samples) < 2) throw FitFailure("time fit needs at least two distinct taus");
  const double n = static_cast<double>(samples.size());
  double mx = 0.0, my = 0.0;
  for (const auto& s : samples) {
    mx += time_regressor(form, s.tau);
    my += s.mean_time_ms;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    const double dx = time_regressor(form, s.tau) - mx;
    sxx += dx * dx;
    sxy += dx * (s.mean_time_ms - my);
  }
  TimeCurve curve{form, 0.0, sxy / sxx, 1.0};
  curve.c = my - curve.d * mx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& s : samples) {
    const double r = s.mean_time_ms - curve(s.tau);
    ss_res += r * r;
    ss_tot += (s.mean_time_ms - my) * (s.mean_time_ms - my);
  }
  curve.r2 = r_squared(ss_res, ss_tot);
  return curve;
}

double efficiency(double tau, const SuccessCurve& s, const TimeCurve& t) {
  const double time = t(tau);
  if (!(time > 0.0)) throw DomainError(fmt::format("planning time {} at tau={} is not positive", time, tau));
  return s(tau) / time;
}

double optimize_threshold(const SuccessCurve& s, const TimeCurve& t) {
  // A fitted time curve can dip to zero or below away from the sampled
  // thresholds; those points are skipped rather than rejected.
  constexpr int kGrid = 10'000;
  auto eta_at = [&](double tau) {
    const double time = t(tau);
    return time > 0.0 ? s(tau) / time : -std::numeric_limits<double>::infinity();
  };
  int best = 0;
  double best_eta = eta_at(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double eta = eta_at(static_cast<double>(i) / kGrid);
    if (eta > best_eta) {
      best_eta = eta;
      best = i;
    }
  }
  if (!std::isfinite(best_eta)) throw DomainError("planning time is not positive anywhere on [0,1]");
  const double grid_tau = static_cast<double>(best) / kGrid;
  // sign of d(eta)/d(tau)
  auto slope = [&](double tau) { return s.derivative(tau) * t(tau) - s(tau) * t.derivative(tau); };
  double lo = std::max(0.0, static_cast<double>(best - 1) / kGrid);
  double hi = std::min(1.0, static_cast<double>(best + 1) / kGrid);
  if (!(t(lo) > 0.0 && t(hi) > 0.0 && slope(lo) > 0.0 && slope(hi) < 0.0)) return grid_tau;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  const double refined = 0.5 * (lo + hi);
  return eta_at(refined) >= best_eta ? refined : grid_tau;
}

double lambert_optimum(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("b must be positive");
  return 1.0 / b;
}

double plateau_change(const SuccessCurve& s, double tau, double delta) {
  const double base = s(tau);
  if (base == 0.0) throw DomainError("success is zero at the reference threshold");
  return std::max(std::abs(s(tau + delta) - base), std::abs(s(tau - delta) - base)) / std::abs(base);
}

AlphaFit fit_alpha(const std::vector<std::vector<double>>& traces) {
  AlphaFit fit;
  std::vector<double> log_ratio, log_next;
  std::map<std::size_t, std::vector<double>> by_step;
  for (const auto& trace : traces) {
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
      if (!(trace[k] > 0.0) || !(trace[k + 1] > 0.0)) {
        ++fit.dropped;
        continue;
      }
      log_ratio.push_back(std::log(trace[k + 1]) - std::log(trace[k]));
      log_next.push_back(std::log(trace[k + 1]));
      by_step[k].push_back(1.0 - trace[k + 1] / trace[k]);
    }
  }
  if (log_ratio.empty()) throw FitFailure("no transition with positive uncertainty");
  const double n = static_cast<double>(log_ratio.size());
  const double mean = std::accumulate(log_ratio.begin(), log_ratio.end(), 0.0) / n;
  if (!(mean < 0.0)) throw FitFailure("uncertainty does not decay across the traces");

  fit.transitions = static_cast<int>(log_ratio.size());
  fit.alpha_hat = 1.0 - std::exp(mean);
  double ss_res = 0.0;
  for (double v : log_ratio) ss_res += (v - mean) * (v - mean);
  fit.r2 = r_squared(ss_res, total_sum_squares(log_next));
  if (log_ratio.size() > 1) {
    const double sd = std::sqrt(ss_res / (n - 1.0));
    fit.stderr_alpha = std::exp(mean) * sd / std::sqrt(n);
  }
  for (const auto& [step, alphas] : by_step) {
    StepAlpha s;
    s.count = static_cast<int>(alphas.size());
    s.mean = std::accumulate(alphas.begin(), alphas.end(), 0.0) / s.count;
    if (s.count > 1) {
      double ss = 0.0;
      for (double a : alphas) ss += (a - s.mean) * (a - s.mean);
      s.sd = std::sqrt(ss / (s.count - 1));
    }
    if (fit.per_step.size() < step) fit.per_step.resize(step);
    fit.per_step.push_back(s);
  }
  return fit;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError(fmt::format("line {}: cannot parse number '{}'", line_no, s));
  }
}

}  // namespace

std::vector<SweepSample> read_sweep_csv(std::istream& in) {
  std::vector<SweepSample> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("tau", 0) == 0)) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw DomainError(fmt::format("line {}: expected 4 columns", line_no));
    SweepSample s{parse_double(cells[0], line_no), parse_double(cells[1], line_no),
                  parse_double(cells[2], line_no), static_cast<int>(parse_double(cells[3], line_no))};
    if (!(s.tau > 0.0 && s.tau < 1.0) || !(s.success_rate >= 0.0 && s.success_rate <= 1.0) || s.trials < 1) {
      throw DomainError(fmt::format("line {}: value out of range", line_no));
    }
    out.push_back(s);
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepSample>& samples) {
  out << "tau,success_rate,mean_time_ms,trials\n";
  for (const auto& s : samples) {
    out << fmt::format("{:.9g},{:.9g},{:.9g},{}\n", s.tau, s.success_rate, s.mean_time_ms, s.trials);
  }
  if (!out) throw IoError("failed writing sweep CSV");
}

std::vector<std::vector<double>> read_episode_traces_csv(std::istream& in) {
  struct Row {
    double u;
    bool info;
  };
  std::map<long, std::map<long, Row>> episodes;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("episode_id", 0) == 0)) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw DomainError(fmt::format("line {}: expected 4 columns", line_no));
    const auto id = static_cast<long>(parse_double(cells[0], line_no));
    const auto step = static_cast<long>(parse_double(cells[1], line_no));
    const bool info = cells[3] == "look_closer" || cells[3] == "push_obstacle";
    episodes[id][step] = {parse_double(cells[2], line_no), info};
  }
  std::vector<std::vector<double>> traces;
  for (const auto& [id, steps] : episodes) {
    std::vector<double> run;
    bool joined = false;
    for (const auto& [step, row] : steps) {
      if (!joined && run.size() > 1) traces.push_back(run);
      if (!joined) run.clear();
      run.push_back(row.u);
      joined = row.info;
    }
    if (run.size() > 1) traces.push_back(run);
  }
  return traces;
}

namespace {

constexpr double kStatedOptimum = 0.73;
constexpr double kDisagreement = 0.01;
constexpr std::array<std::array<double, 3>, 3> kStatedTable{{
    {0.73, 0.71, 0.75},
    {0.68, 0.66, 0.70},
    {0.76, 0.74, 0.78},
}};

nlohmann::json to_json(const SuccessCurve& s) {
  nlohmann::json j{{"form", to_string(s.form)}, {"a", s.a}, {"b", s.b}, {"r2", s.r2}};
  if (s.form == SuccessForm::Sigmoid) j["tau0"] = s.tau0;
  return j;
}

nlohmann::json to_json(const TimeCurve& t) {
  return {{"form", to_string(t.form)}, {"c", t.c}, {"d", t.d}, {"r2", t.r2}};
}

}  // namespace

nlohmann::json threshold_report(const SuccessCurve& s, const TimeCurve& t) {
  const double numeric = optimize_threshold(s, t);
  const double approx = lambert_optimum(s.b);
  nlohmann::json j{{"success", to_json(s)},
                   {"time", to_json(t)},
                   {"tau_star_numeric", numeric},
                   {"eta_at_optimum", efficiency(numeric, s, t)},
                   {"tau_star_stated", kStatedOptimum},
                   {"tau_star_inverse_b", approx},
                   {"tau_star_lambert_exact", 0.0},
                   {"plateau_change_at_stated", plateau_change(s, kStatedOptimum)}};
  if (s(numeric) > 0.0) j["plateau_change_at_numeric"] = plateau_change(s, numeric);
  const bool inconsistent =
      std::abs(numeric - kStatedOptimum) > kDisagreement || std::abs(numeric - approx) > kDisagreement;
  j["inconsistent"] = inconsistent;
  if (inconsistent) {
    j["note"] = fmt::format(
        "numeric maximum of S/T is {:.4f}; the stated optimum 0.73 and the 1/b approximation {:.4f} "
        "do not maximize the stated curves",
        numeric, approx);
  }
  return j;
}

nlohmann::json forms_table(const std::array<SuccessCurve, 3>& s, const std::array<TimeCurve, 3>& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double numeric = optimize_threshold(s[i], t[k]);
      const double stated =
          kStatedTable[static_cast<std::size_t>(s[i].form)][static_cast<std::size_t>(t[k].form)];
      rows.push_back({{"success_form", to_string(s[i].form)},
                      {"time_form", to_string(t[k].form)},
                      {"tau_star_numeric", numeric},
                      {"tau_star_stated", stated},
                      {"eta_at_optimum", efficiency(numeric, s[i], t[k])},
                      {"inconsistent", std::abs(numeric - stated) > kDisagreement}});
    }
  }
  return rows;
}

}  // namespace nsplan
