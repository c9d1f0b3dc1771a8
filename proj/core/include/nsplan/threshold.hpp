#pragma once

#include <array>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "nsplan/json.hpp"

namespace nsplan {

struct SweepSample {
  double tau = 0.0;
  double success_rate = 0.0;
  double mean_time_ms = 0.0;
  int trials = 1;
};

enum class SuccessForm { Exponential, Sigmoid, Logarithmic };
enum class TimeForm { Linear, Quadratic, Logarithmic };

inline constexpr std::array kSuccessForms{SuccessForm::Exponential, SuccessForm::Sigmoid,
                                          SuccessForm::Logarithmic};
inline constexpr std::array kTimeForms{TimeForm::Linear, TimeForm::Quadratic, TimeForm::Logarithmic};

std::string_view to_string(SuccessForm form) noexcept;
std::string_view to_string(TimeForm form) noexcept;

/// a(1 - e^{-b tau}), a / (1 + e^{-b(tau - tau0)}) or a log(1 + b tau).
struct SuccessCurve {
  SuccessForm form = SuccessForm::Exponential;
  double a = 0.0;
  double b = 0.0;
  double tau0 = 0.0;  // sigmoid only
  double r2 = 1.0;

  double operator()(double tau) const;
  double derivative(double tau) const;
};

/// c + d tau, c + d tau^2 or c + d log(1 + tau).
struct TimeCurve {
  TimeForm form = TimeForm::Linear;
  double c = 0.0;
  double d = 0.0;
  double r2 = 1.0;

  double operator()(double tau) const;
  double derivative(double tau) const;
};

/// The parameter sets quoted for the robustness comparison.
SuccessCurve reference_success(SuccessForm form);
TimeCurve reference_time(TimeForm form);

/// 1 - SS_res / SS_tot, and 1 when both sums vanish.
double r_squared(double ss_res, double ss_tot);

/// Damped Gauss-Newton least squares from nine starts on a fixed 3x3 (a, b)
/// grid. Throws DomainError with fewer than three distinct taus and
/// FitFailure when all success rates are equal.
SuccessCurve fit_success(const std::vector<SweepSample>& samples, SuccessForm form);

/// Ordinary least squares on the form's regressor. Throws FitFailure with
/// fewer than two distinct taus.
TimeCurve fit_time(const std::vector<SweepSample>& samples, TimeForm form);

/// S(tau) / T(tau). Throws DomainError when T(tau) <= 0.
double efficiency(double tau, const SuccessCurve& s, const TimeCurve& t);

/// argmax of efficiency on [0, 1]: a 10^4-point scan, then bisection on the
/// derivative inside the bracket around the best point. Thresholds where T
/// is not positive are skipped; DomainError only if T <= 0 everywhere.
double optimize_threshold(const SuccessCurve& s, const TimeCurve& t);

/// The closed form's stated approximation 1/b. The exact expression
/// (1/b)(1 + W(-1/e)) is identically 0 because W(-1/e) = -1.
double lambert_optimum(double b);

/// max over +-delta of |S(tau +- delta) - S(tau)| / S(tau).
double plateau_change(const SuccessCurve& s, double tau, double delta = 0.1);

struct StepAlpha {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

struct AlphaFit {
  double alpha_hat = 0.0;
  double stderr_alpha = 0.0;
  double r2 = 1.0;
  std::vector<StepAlpha> per_step;  // alpha_k = 1 - U_{k+1}/U_k by step index
  int transitions = 0;
  int dropped = 0;  // transitions with a non-positive U
};

/// Regresses log U_{k+1} - log U_k on a constant: alpha = 1 - exp(mean). R^2
/// compares log U_{k+1} against the fitted log U_k + log(1 - alpha). Throws
/// FitFailure when no usable transition remains or the mean ratio is not a
/// decay.
AlphaFit fit_alpha(const std::vector<std::vector<double>>& traces);

/// Reads `tau,success_rate,mean_time_ms,trials`.
std::vector<SweepSample> read_sweep_csv(std::istream& in);
void write_sweep_csv(std::ostream& out, const std::vector<SweepSample>& samples);

/// Reads `episode_id,step,U,action_kind` and returns the runs of U values
/// joined by info actions: step s and s+1 share a run when step s records
/// look_closer or push_obstacle. Runs of a single value are dropped.
std::vector<std::vector<double>> read_episode_traces_csv(std::istream& in);

/// Full threshold report: the fitted or reference curves, tau* for every form
/// pair, the stated 0.73 and 1/b values, and whether they disagree with the
/// numeric optimum.
nlohmann::json threshold_report(const SuccessCurve& s, const TimeCurve& t);
nlohmann::json forms_table(const std::array<SuccessCurve, 3>& s, const std::array<TimeCurve, 3>& t);

}  // namespace nsplan
