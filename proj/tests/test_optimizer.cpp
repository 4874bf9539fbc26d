#include <doctest.h>

#include <cmath>

#include "cavpa/analytics.hpp"
#include "cavpa/optimizer.hpp"
#include "cavpa/single_pair.hpp"

using namespace cavpa;
using namespace cavpa::optimizer;

namespace {

SystemParams scaled_params(double coop) {
  SystemParams p;
  p.kappa = 1.0;
  p.gamma_g = 0.37;
  p.gamma_h = 0.63;
  p.g = std::sqrt(coop);
  return p;
}

}  // namespace

TEST_CASE("log-bisection search for the largest feasible point") {
  SUBCASE("monotone quadratic objective") {
    auto obj = [](double x) { return x * x; };
    auto out = optimizer::detail::max_feasible(obj, 4.0, 0.01, 1.0, 1024.0, 0.01);
    CHECK(out.monotone);
    CHECK(!out.hit_cap);
    CHECK(out.best == doctest::Approx(2.0).epsilon(0.011));
    CHECK(out.best_value <= 4.0);
  }
  SUBCASE("feasible everywhere hits the cap") {
    auto obj = [](double) { return 0.0; };
    auto out = optimizer::detail::max_feasible(obj, 1.0, 0.01, 1.0, 64.0, 0.01);
    CHECK(out.hit_cap);
    CHECK(out.best == 64.0);
  }
  SUBCASE("infeasible everywhere reports the assumed lower end") {
    auto obj = [](double) { return 10.0; };
    auto out = optimizer::detail::max_feasible(obj, 1.0, 0.01, 1.0, 64.0, 0.01);
    CHECK(!out.lo_feasible);
    CHECK(out.lo_value == 10.0);
  }
  SUBCASE("non-monotone objective is flagged") {
    auto obj = [](double x) { return 2.0 / x; };  // decreasing, so every pair violates
    auto out = optimizer::detail::max_feasible(obj, 2.5, 0.01, 1.0, 16.0, 0.01);
    CHECK(!out.monotone);
    CHECK(out.hit_cap);
  }
}

TEST_CASE("optimizer input validation") {
  SystemParams p = scaled_params(10.0);
  CHECK_THROWS_AS(optimize_pulse(p, 0.0), InvalidParameterError);
  SystemParams detuned = p;
  detuned.delta2 = 0.3;
  CHECK_THROWS_AS(optimize_pulse(detuned, 0.1), InvalidParameterError);
}

TEST_CASE("optimum sits on the constraint boundary") {
  SystemParams p = scaled_params(10.0);
  const double epsilon = 0.1;
  auto opt = optimize_pulse(p, epsilon);
  const double budget = (1.0 + epsilon) * (1.0 - opt.eta_wd_ref);

  CHECK(opt.eta_wd_ref == doctest::Approx(20.0 / 21.0).epsilon(1e-12));
  CHECK(1.0 - opt.eta <= budget * (1.0 + 1e-3));
  CHECK(!opt.omega_unbounded);
  CHECK(!opt.used_fallback_scan);

  // Just beyond the optimum the constraint must fail.
  auto above = single_pair::run_cw_complete(p, opt.omega_star * 1.05);
  CHECK(1.0 - above.efficiency.eta_cavity > budget);

  SUBCASE("replaying the optimum reproduces the efficiency") {
    auto replay = single_pair::run_cw_complete(p, opt.omega_star);
    CHECK(std::abs(replay.efficiency.eta_cavity - opt.eta) < 1e-4);
  }

  SUBCASE("t_p_star is the 99.9% transfer time at omega_star") {
    const double t99 = single_pair::transfer_time_99_9(p, opt.omega_star);
    CHECK(opt.t_p_star == doctest::Approx(t99).epsilon(1e-12));
  }
}

TEST_CASE("huge epsilon sends the optimum to the search cap") {
  // kappa far above the pi-pulse threshold: every Omega is feasible.
  SystemParams p = scaled_params(10.0);
  p.kappa = 40.0;
  p.g = std::sqrt(10.0 * p.kappa);  // keep C = 10
  const double eps = 1e6;
  CHECK(p.kappa > analytics::pi_pulse_kappa_threshold(p.g, p.gamma_total(), eps));
  OptimizerOptions opts;
  opts.omega_cap_factor = 64.0;  // keep the runtime small
  auto opt = optimize_pulse(p, eps, opts);
  CHECK(opt.omega_unbounded);
  CHECK(opt.omega_star == doctest::Approx(64.0 * p.kappa));
  // Deep Rabi regime: the 99.9% crossing happens within the first flop.
  CHECK(opt.t_p_star < 4.0 / opt.omega_star * 4.0);
}

TEST_CASE("tiny epsilon is infeasible and reports the weak-drive gap") {
  SystemParams p = scaled_params(10.0);
  OptimizerOptions opts;
  opts.omega_lo_factor = 0.2;  // keep the descent short; the error path is the same
  try {
    optimize_pulse(p, 1e-9, opts);
    FAIL("expected ConstraintInfeasibleError");
  } catch (const ConstraintInfeasibleError& e) {
    CHECK(std::string(e.what()).find("weak-drive gap") != std::string::npos);
  }
}

TEST_CASE("scan emits rows in grid order and survives per-point failures") {
  const double gmax = std::sqrt(10.0) * 2.0;  // f = 0.25 -> C = 10 at kappa = Gamma = 1
  const std::vector<double> f_list = {0.25, 1.0};
  const std::vector<double> kappas = {1.0, 2.0};
  auto rows = scan_kappa(f_list, kappas, 0.1, gmax, 1.0);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].f_fc == 0.25);
  CHECK(rows[0].kappa == 1.0);
  CHECK(rows[1].kappa == 2.0);
  CHECK(rows[2].f_fc == 1.0);
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.omega_star > 0.0);
    CHECK(r.t_p_star > 0.0);
    // Inefficiency grows as f_fc falls at fixed kappa (C drops).
  }
  CHECK(rows[0].inefficiency > rows[2].inefficiency);
  CHECK(rows[1].inefficiency > rows[3].inefficiency);

  CHECK_THROWS_AS(scan_kappa({}, kappas, 0.1, gmax, 1.0), InvalidParameterError);
}

TEST_CASE("scan is deterministic") {
  const std::vector<double> f_list = {0.5};
  const std::vector<double> kappas = {1.0};
  auto a = scan_kappa(f_list, kappas, 0.2, 3.0, 1.0);
  auto b = scan_kappa(f_list, kappas, 0.2, 3.0, 1.0);
  REQUIRE(a.size() == b.size());
  CHECK(a[0].omega_star == b[0].omega_star);
  CHECK(a[0].t_p_star == b[0].t_p_star);
  CHECK(a[0].inefficiency == b[0].inefficiency);
}
