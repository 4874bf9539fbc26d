#include <doctest.h>

#include <cmath>
#include <random>

#include "cavpa/analytics.hpp"
#include "cavpa/single_pair.hpp"
#include "cavpa/validation.hpp"

using namespace cavpa;
using namespace cavpa::validation;

TEST_CASE("delta-pulse oracle limits") {
  SUBCASE("strong coupling saturates the cavity branching ratio") {
    const double kappa = 1.0, gamma = 0.8;
    const double eta = delta_pulse_exact(1e7, kappa, gamma);
    CHECK(eta == doctest::Approx(2.0 * kappa / (2.0 * kappa + gamma)).epsilon(1e-9));
  }
  SUBCASE("matched cavity at kappa = g >> Gamma") {
    const double g = 200.0, gamma = 1.0;
    const double eta = delta_pulse_exact(g, g, gamma);
    const double leading = std::pow(2.0 * g / (2.0 * g + gamma), 2);
    CHECK(std::abs(eta - leading) < 2.0 * gamma * gamma / (g * g));
  }
  SUBCASE("rejects non-positive rates") {
    CHECK_THROWS_AS(delta_pulse_exact(0.0, 1.0, 1.0), InvalidParameterError);
    CHECK_THROWS_AS(delta_pulse_exact(1.0, 1.0, -1.0), InvalidParameterError);
  }
}

TEST_CASE("numeric pi-pulse threshold root matches the closed form") {
  for (double eps : {0.01, 0.1, 1.0}) {
    for (double g : {0.5, 2.0, 10.0}) {
      const double gamma = 1.0;
      const double numeric = pi_pulse_threshold_numeric(g, gamma, eps);
      const double closed = analytics::pi_pulse_kappa_threshold(g, gamma, eps);
      CHECK(std::abs(numeric - closed) / closed < 1e-9);
    }
  }
}

TEST_CASE("fixed-step reference") {
  SUBCASE("pure decay follows the analytic exponential") {
    const double gamma = 0.9;
    ComplexMatrix lower = ComplexMatrix::Zero(2, 2);
    lower(1, 0) = std::sqrt(gamma);
    LindbladModel model(ComplexMatrix::Zero(2, 2), {{lower, "decay"}});
    auto traj = fixed_step_reference(model, pure_state(2, 0), 1e-4, 5.0);
    CHECK(traj.final_state.matrix(0, 0).real() ==
          doctest::Approx(std::exp(-gamma * 5.0)).epsilon(1e-10));
  }
  SUBCASE("oversized steps are detected as instability") {
    SystemParams p;
    p.kappa = 1.0;
    p.gamma_g = 1.0;
    p.gamma_h = 0.0;
    p.g = 50.0;
    LindbladModel model = single_pair::build_five_level(p);
    CHECK_THROWS_AS(fixed_step_reference(model, pure_state(5, single_pair::kE0), 0.5, 50.0),
                    IntegrationError);
  }
}

TEST_CASE("fixed-step reference agrees with the adaptive engine on a driven run") {
  SystemParams p;
  p.kappa = 1.0;
  p.gamma_g = 0.37;
  p.gamma_h = 0.63;
  p.g = std::sqrt(10.0);
  const double t_end = 30.0;
  LindbladModel model = single_pair::build_five_level(p, single_pair::SquarePulse{0.5, 1e9});

  IntegratorConfig cfg;
  cfg.sample_interval = t_end;
  auto fast = evolve(model, pure_state(5, single_pair::kI0), 0.0, t_end, cfg, {});

  const double dt = 1.5e-3;
  auto slow = fixed_step_reference(model, pure_state(5, single_pair::kI0), dt, t_end);
  auto slow_half = fixed_step_reference(model, pure_state(5, single_pair::kI0), dt / 2.0, t_end);
  const double self = (slow.final_state.matrix - slow_half.final_state.matrix).cwiseAbs().maxCoeff();
  REQUIRE(self < 1e-8);  // dt fine enough that halving no longer matters

  const double diff = (fast.final_state.matrix - slow_half.final_state.matrix).cwiseAbs().maxCoeff();
  CHECK(diff < 1e-7);
}

TEST_CASE("exponential fit helper") {
  std::vector<double> t, v;
  for (int i = 0; i < 400; ++i) {
    t.push_back(0.05 * i);
    v.push_back(std::exp(-0.3 * t.back()));
  }
  CHECK(fit_exponential_rate(t, v, 0.5, 0.05) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK_THROWS_AS(fit_exponential_rate(t, v, 1e-9, 1e-12), ConvergenceError);
}

TEST_CASE("weak-drive suite passes on the default grid") {
  const auto reports = weak_drive_suite();
  REQUIRE(reports.size() >= 8);
  for (const auto& r : reports) {
    INFO(r.name, " ", r.inputs, ": engine=", r.engine_value, " oracle=", r.oracle_value,
         " rel=", r.relative_error);
    CHECK(r.pass);
    CHECK(r.pass == (r.relative_error <= r.tolerance));
  }
}
