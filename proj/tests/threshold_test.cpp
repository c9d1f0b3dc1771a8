#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nsplan/error.hpp"
#include "nsplan/threshold.hpp"
#include "oracles.hpp"

using namespace nsplan;

namespace {

std::vector<SweepSample> sweep_from(const std::function<double(double)>& s, const std::function<double(double)>& t) {
  std::vector<SweepSample> out;
  for (int i = 1; i <= 9; ++i) {
    const double tau = i / 10.0;
    out.push_back({tau, s(tau), t(tau), 100});
  }
  return out;
}

std::function<double(double)> success_of(const SuccessCurve& c) {
  return [c](double tau) { return oracle::success_formula(static_cast<int>(c.form), c.a, c.b, c.tau0, tau); };
}

std::function<double(double)> time_of(const TimeCurve& c) {
  return [c](double tau) { return oracle::time_formula(static_cast<int>(c.form), c.c, c.d, tau); };
}

}  // namespace

TEST(Curves, MatchTheirFormulas) {
  for (auto f : kSuccessForms) {
    const auto s = reference_success(f);
    for (double tau : {0.0, 0.3, 0.7, 1.0}) EXPECT_NEAR(s(tau), success_of(s)(tau), 1e-15);
    const double h = 1e-6;
    EXPECT_NEAR(s.derivative(0.5), (s(0.5 + h) - s(0.5 - h)) / (2 * h), 1e-6);
  }
  for (auto f : kTimeForms) {
    const auto t = reference_time(f);
    for (double tau : {0.0, 0.3, 0.7, 1.0}) EXPECT_NEAR(t(tau), time_of(t)(tau), 1e-12);
  }
  const auto exp = reference_success(SuccessForm::Exponential);
  EXPECT_EQ(exp.a, 0.89);
  EXPECT_EQ(exp.b, 4.73);
  const auto lin = reference_time(TimeForm::Linear);
  EXPECT_EQ(lin.c, 8.2);
  EXPECT_EQ(lin.d, 12.5);
}

TEST(RSquared, FlatConvention) {
  EXPECT_EQ(r_squared(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(r_squared(1.0, 4.0), 0.75);
}

TEST(FitSuccess, RoundTripEveryForm) {
  const auto linear = [](double tau) { return 8.2 + 12.5 * tau; };
  for (auto f : kSuccessForms) {
    const auto truth = reference_success(f);
    const auto fit = fit_success(sweep_from(success_of(truth), linear), f);
    EXPECT_NEAR(fit.a, truth.a, 1e-3) << to_string(f);
    EXPECT_NEAR(fit.b, truth.b, 1e-3) << to_string(f);
    if (f == SuccessForm::Sigmoid) {
      EXPECT_NEAR(fit.tau0, truth.tau0, 1e-3);
    }
    EXPECT_GE(fit.r2, 0.999);
  }
}

TEST(FitSuccess, Degenerate) {
  const auto constant = sweep_from([](double) { return 0.6; }, [](double) { return 1.0; });
  EXPECT_THROW(fit_success(constant, SuccessForm::Exponential), FitFailure);
  std::vector<SweepSample> two{{0.5, 0.3, 1.0, 1}, {0.6, 0.4, 1.0, 1}};
  EXPECT_THROW(fit_success(two, SuccessForm::Exponential), DomainError);
}

TEST(FitTime, RoundTripAndEdgeCases) {
  for (auto f : kTimeForms) {
    const auto truth = reference_time(f);
    const auto fit = fit_time(sweep_from([](double) { return 0.5; }, time_of(truth)), f);
    EXPECT_NEAR(fit.c, truth.c, 1e-9);
    EXPECT_NEAR(fit.d, truth.d, 1e-9);
    EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  }
  std::vector<SweepSample> two{{0.5, 0.3, 10.0, 1}, {0.7, 0.4, 14.0, 1}};
  const auto line = fit_time(two, TimeForm::Linear);
  EXPECT_NEAR(line.c, 0.0, 1e-9);
  EXPECT_NEAR(line.d, 20.0, 1e-9);

  const auto flat = fit_time(sweep_from([](double) { return 0.5; }, [](double) { return 9.0; }), TimeForm::Linear);
  EXPECT_NEAR(flat.d, 0.0, 1e-12);
  EXPECT_EQ(flat.r2, 1.0);

  std::vector<SweepSample> one{{0.5, 0.3, 10.0, 1}, {0.5, 0.4, 14.0, 1}};
  EXPECT_THROW(fit_time(one, TimeForm::Linear), FitFailure);
}

TEST(Efficiency, Examples) {
  const auto s = reference_success(SuccessForm::Exponential);
  const auto t = reference_time(TimeForm::Linear);
  EXPECT_EQ(efficiency(0.0, s, t), 0.0);
  const double direct = 0.89 * (1 - std::exp(-4.73 * 0.7)) / (8.2 + 12.5 * 0.7);
  EXPECT_NEAR(efficiency(0.7, s, t), direct, 1e-15);
  TimeCurve zero{TimeForm::Linear, 0.0, 0.0, 1.0};
  EXPECT_THROW(efficiency(0.5, s, zero), DomainError);
}

TEST(OptimizeThreshold, ReferenceParametersGiveAboutPointThreeSevenFive) {
  const auto s = reference_success(SuccessForm::Exponential);
  const auto t = reference_time(TimeForm::Linear);
  const double tau = optimize_threshold(s, t);
  const double grid = oracle::grid_argmax(
      [&](double x) { return oracle::success_formula(0, 0.89, 4.73, 0, x) / oracle::time_formula(0, 8.2, 12.5, x); },
      100001);
  EXPECT_NEAR(tau, grid, 1e-3);
  EXPECT_NEAR(tau, 0.375, 5e-3);
}

TEST(OptimizeThreshold, ConstantTimeGoesToEndpoint) {
  const auto s = reference_success(SuccessForm::Exponential);
  TimeCurve flat{TimeForm::Linear, 8.2, 0.0, 1.0};
  EXPECT_NEAR(optimize_threshold(s, flat), 1.0, 1e-9);
}

TEST(OptimizeThreshold, ScaleInvariant) {
  auto s = reference_success(SuccessForm::Sigmoid);
  auto t = reference_time(TimeForm::Quadratic);
  const double base = optimize_threshold(s, t);
  s.a *= 2;
  t.c *= 2;
  t.d *= 2;
  EXPECT_NEAR(optimize_threshold(s, t), base, 1e-9);
}

TEST(OptimizeThreshold, MatchesGridOracleOnRandomCurves) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    SuccessCurve s{kSuccessForms[i % 3], 0.2 + 0.8 * u(rng), 0.5 + 15 * u(rng), 0.2 + 0.6 * u(rng), 1.0};
    TimeCurve t{kTimeForms[(i / 3) % 3], 1 + 10 * u(rng), 30 * u(rng), 1.0};
    const double grid = oracle::grid_argmax(
        [&](double x) {
          return oracle::success_formula(static_cast<int>(s.form), s.a, s.b, s.tau0, x) /
                 oracle::time_formula(static_cast<int>(t.form), t.c, t.d, x);
        },
        100001);
    EXPECT_NEAR(optimize_threshold(s, t), grid, 1e-3) << i;
  }
}

TEST(LambertOptimum, Examples) {
  EXPECT_NEAR(lambert_optimum(4.73), 0.2114, 1e-4);
  EXPECT_EQ(lambert_optimum(1.0), 1.0);
  EXPECT_EQ(lambert_optimum(2.0), 0.5);
  EXPECT_THROW(lambert_optimum(0.0), DomainError);
}

TEST(Plateau, StatedOptimumIsFlat) {
  const auto s = reference_success(SuccessForm::Exponential);
  const double change = plateau_change(s, 0.73);
  const double by_hand = std::max(std::abs(s(0.83) - s(0.73)), std::abs(s(0.63) - s(0.73))) / s(0.73);
  EXPECT_NEAR(change, by_hand, 1e-12);
  EXPECT_LT(change, 0.05);
}

TEST(ThresholdReport, SurfacesTheInconsistency) {
  const auto j = threshold_report(reference_success(SuccessForm::Exponential), reference_time(TimeForm::Linear));
  EXPECT_NEAR(j["tau_star_numeric"].get<double>(), 0.375, 5e-3);
  EXPECT_EQ(j["tau_star_stated"].get<double>(), 0.73);
  EXPECT_NEAR(j["tau_star_inverse_b"].get<double>(), 0.2114, 1e-4);
  EXPECT_TRUE(j["inconsistent"].get<bool>());
  EXPECT_TRUE(j.contains("note"));
}

TEST(FormsTable, NineRowsWithStatedValues) {
  std::array<SuccessCurve, 3> s;
  std::array<TimeCurve, 3> t;
  for (std::size_t i = 0; i < 3; ++i) {
    s[i] = reference_success(kSuccessForms[i]);
    t[i] = reference_time(kTimeForms[i]);
  }
  const auto rows = forms_table(s, t);
  ASSERT_EQ(rows.size(), 9u);
  const double stated[9] = {0.73, 0.71, 0.75, 0.68, 0.66, 0.70, 0.76, 0.74, 0.78};
  for (std::size_t k = 0; k < 9; ++k) EXPECT_EQ(rows[k]["tau_star_stated"].get<double>(), stated[k]);
}

TEST(FitAlpha, Examples) {
  std::vector<std::vector<double>> exact;
  for (double u0 : {0.9, 0.5, 0.3}) {
    std::vector<double> tr{u0};
    for (int k = 0; k < 5; ++k) tr.push_back(tr.back() * 0.7);
    exact.push_back(tr);
  }
  const auto fit = fit_alpha(exact);
  EXPECT_NEAR(fit.alpha_hat, 0.3, 1e-9);
  EXPECT_NEAR(fit.r2, 1.0, 1e-9);
  EXPECT_EQ(fit.transitions, 15);

  const auto single = fit_alpha({{0.5, 0.4}});
  EXPECT_NEAR(single.alpha_hat, 0.2, 1e-12);

  EXPECT_THROW(fit_alpha({{0.5}}), FitFailure);
  EXPECT_THROW(fit_alpha({{0.0, 0.0}}), FitFailure);
  EXPECT_THROW(fit_alpha({{0.3, 0.5}}), FitFailure);
}

TEST(FitAlpha, DropsNonPositiveTransitions) {
  const auto fit = fit_alpha({{0.5, 0.35, 0.0, 0.1, 0.07}});
  EXPECT_EQ(fit.dropped, 2);
  EXPECT_EQ(fit.transitions, 2);
  EXPECT_NEAR(fit.alpha_hat, 0.3, 1e-12);
}

TEST(FitAlpha, ScaleInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 0.9);
  std::vector<std::vector<double>> traces;
  for (int e = 0; e < 10; ++e) {
    std::vector<double> tr{u(rng)};
    for (int k = 0; k < 4; ++k) tr.push_back(tr.back() * u(rng));
    traces.push_back(tr);
  }
  auto scaled = traces;
  for (auto& tr : scaled) {
    for (auto& v : tr) v *= 0.37;
  }
  const auto a = fit_alpha(traces), b = fit_alpha(scaled);
  EXPECT_NEAR(a.alpha_hat, b.alpha_hat, 1e-12);
  EXPECT_NEAR(a.stderr_alpha, b.stderr_alpha, 1e-12);
}

TEST(SweepCsv, RoundTripAndHeaderOnly) {
  std::vector<SweepSample> samples{{0.5, 0.61, 9.5, 200}, {0.6, 0.7, 10.25, 200}};
  std::stringstream io;
  write_sweep_csv(io, samples);
  const auto back = read_sweep_csv(io);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].tau, 0.6);
  EXPECT_EQ(back[1].mean_time_ms, 10.25);
  EXPECT_EQ(back[0].trials, 200);

  std::stringstream empty;
  write_sweep_csv(empty, {});
  EXPECT_EQ(empty.str(), "tau,success_rate,mean_time_ms,trials\n");
}

TEST(EpisodeTraces, SplitAtNonInfoSteps) {
  std::stringstream in(
      "episode_id,step,U,action_kind\n"
      "0,0,0.5,look_closer\n0,1,0.35,push_obstacle\n0,2,0.245,plan\n"
      "1,0,0.4,none\n1,1,0.3,look_closer\n1,2,0.21,none\n");
  const auto traces = read_episode_traces_csv(in);
  // the lone 0.4 carries no transition and is dropped
  ASSERT_EQ(traces.size(), 2u);
  EXPECT_EQ(traces[0], (std::vector<double>{0.5, 0.35, 0.245}));
  EXPECT_EQ(traces[1], (std::vector<double>{0.3, 0.21}));
}

TEST(Optimize, SkipsNonPositiveTime) {
  // T crosses zero at tau = 0.2, as a fit on mid-range samples can
  const SuccessCurve s{SuccessForm::Exponential, 0.9, 4.0};
  const TimeCurve t{TimeForm::Linear, -2.0, 10.0};
  EXPECT_THROW(efficiency(0.1, s, t), DomainError);
  const double grid = oracle::grid_argmax(
      [&](double tau) {
        const double time = oracle::time_formula(0, -2.0, 10.0, tau);
        return time > 0 ? oracle::success_formula(0, 0.9, 4.0, 0, tau) / time : -1e300;
      },
      100'001);
  EXPECT_NEAR(optimize_threshold(s, t), grid, 1e-3);
  EXPECT_THROW(optimize_threshold(s, TimeCurve{TimeForm::Linear, -20.0, 1.0}), DomainError);
}
