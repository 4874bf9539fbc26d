#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "cavpa/analytics.hpp"
#include "cavpa/lindblad.hpp"
#include "cavpa/single_pair.hpp"
#include "cavpa/validation.hpp"

using namespace cavpa;

namespace {

ComplexMatrix random_hermitian(int dim, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) m(r, c) = Complex(n(rng), n(rng));
  return (m + m.adjoint()) / 2.0;
}

ComplexMatrix random_matrix(int dim, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) m(r, c) = Complex(n(rng), n(rng));
  return m;
}

SystemParams scaled_params(double coop, double omega) {
  SystemParams p;
  p.kappa = 1.0;
  p.gamma_g = 0.37;
  p.gamma_h = 0.63;
  p.g = std::sqrt(coop);
  p.omega = omega;
  return p;
}

}  // namespace

TEST_CASE("liouvillian of the trivial model is zero") {
  LindbladModel model(ComplexMatrix::Zero(3, 3), {});
  std::mt19937 rng(3);
  DensityMatrix rho{random_hermitian(3, rng)};
  rho.matrix /= rho.matrix.trace();
  CHECK(liouvillian_apply(model, rho, 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pure cavity decay algebra") {
  // Two photon levels, jump sqrt(2 kappa) a, rho = |1><1|:
  // d rho/dt = 2 kappa (|0><0| - |1><1|).
  const double kappa = 0.7;
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  LindbladModel model(ComplexMatrix::Zero(2, 2), {{std::sqrt(2.0 * kappa) * a, "cavity"}});
  const ComplexMatrix d = liouvillian_apply(model, pure_state(2, 1), 0.0);
  CHECK(d(0, 0).real() == doctest::Approx(2.0 * kappa).epsilon(1e-15));
  CHECK(d(1, 1).real() == doctest::Approx(-2.0 * kappa).epsilon(1e-15));
  CHECK(std::abs(d(0, 1)) == 0.0);
  CHECK(std::abs(d(1, 0)) == 0.0);
}

TEST_CASE("five-level model at t = 0 only builds the drive coherence") {
  SystemParams p = scaled_params(10.0, 0.25);
  LindbladModel model = single_pair::build_five_level(p);
  const ComplexMatrix d = liouvillian_apply(model, pure_state(5, single_pair::kI0), 0.0);
  const Complex expected(0.0, -0.5 * p.omega);
  CHECK(std::abs(d(single_pair::kE0, single_pair::kI0) - expected) < 1e-15);
  CHECK(std::abs(d(single_pair::kI0, single_pair::kE0) - std::conj(expected)) < 1e-15);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      if ((r == single_pair::kE0 && c == single_pair::kI0) ||
          (r == single_pair::kI0 && c == single_pair::kE0))
        continue;
      CHECK(std::abs(d(r, c)) < 1e-16);
    }
}

TEST_CASE("liouvillian output is Hermitian and traceless for random models") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 4;
    LindbladModel model(random_hermitian(dim, rng),
                        {{random_matrix(dim, rng), "j1"}, {random_matrix(dim, rng), "j2"}});
    ComplexMatrix rho = random_hermitian(dim, rng);
    rho = rho * rho;  // positive
    rho /= rho.trace();
    const ComplexMatrix d = liouvillian_apply(model, {rho}, 0.0);
    const double scale = d.cwiseAbs().maxCoeff();
    CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, scale));
    CHECK(std::abs(d.trace()) < 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("dimension mismatches are structural errors") {
  LindbladModel model(ComplexMatrix::Zero(3, 3), {});
  CHECK_THROWS_AS(liouvillian_apply(model, pure_state(4, 0), 0.0), StructuralError);
  CHECK_THROWS_AS(LindbladModel(ComplexMatrix::Zero(3, 3),
                                {{ComplexMatrix::Zero(2, 2), "bad"}}),
                  StructuralError);
  ComplexMatrix not_hermitian = ComplexMatrix::Zero(2, 2);
  not_hermitian(0, 1) = 1.0;
  CHECK_THROWS_AS(LindbladModel(not_hermitian, {}), StructuralError);
}

TEST_CASE("undriven initial state stays put") {
  SystemParams p = scaled_params(10.0, 0.0);
  LindbladModel model = single_pair::build_five_level(p);
  IntegratorConfig cfg;
  auto traj = evolve(model, pure_state(5, single_pair::kI0), 0.0, 50.0, cfg,
                     std::vector<ObservableSpec>{{"p_i0", [] {
                        ComplexMatrix m = ComplexMatrix::Zero(5, 5);
                        m(0, 0) = 1.0;
                        return m;
                      }()}});
  for (double v : traj.observable("p_i0")) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-level decay into the cavity matches the closed-form yield") {
  // States {e, g1, g0, h0}: coherent g-coupling e <-> g1, cavity loss from
  // g1, free-space loss from e. Exercises a model that is not the five-level
  // builder's.
  const double g = 1.3, kappa = 0.8, gamma = 0.6;
  ComplexMatrix h = ComplexMatrix::Zero(4, 4);
  h(1, 0) = g;
  h(0, 1) = g;
  ComplexMatrix cavity = ComplexMatrix::Zero(4, 4);
  cavity(2, 1) = std::sqrt(2.0 * kappa);
  ComplexMatrix spont = ComplexMatrix::Zero(4, 4);
  spont(3, 0) = std::sqrt(gamma);
  LindbladModel model(h, {{cavity, "cavity"}, {spont, "gamma"}});

  ComplexMatrix p_g1 = ComplexMatrix::Zero(4, 4);
  p_g1(1, 1) = 1.0;
  ComplexMatrix excited = ComplexMatrix::Zero(4, 4);
  excited(0, 0) = 1.0;
  excited(1, 1) = 1.0;

  IntegratorConfig cfg;
  StopRule stop{excited, 1e-10, 0.0, false, 1e-3};
  auto traj = evolve(model, pure_state(4, 0), 0.0, 4000.0, cfg, {},
                     std::vector<AccumulatorSpec>{{"eta", p_g1, 2.0 * kappa}}, &stop);
  REQUIRE(traj.stopped);
  const double expected = validation::delta_pulse_exact(g, kappa, gamma);
  CHECK(traj.final_accumulator("eta") == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("weak-drive survival decays at the closed-form rate") {
  SystemParams p = scaled_params(1.0, 0.02);
  IntegratorConfig cfg;
  auto run = single_pair::run_square_pulse(p, p.omega, std::nullopt, cfg);
  const double rate = validation::fit_exponential_rate(run.trajectory.times,
                                                       run.trajectory.observable("p_i0"), 0.5,
                                                       0.05);
  const double expected = analytics::rate_wd(p.omega, p.gamma_total(), 1.0);
  CHECK(std::abs(rate - expected) / expected < 0.02);
}

TEST_CASE("embedded integrator reaches design order on the damped Rabi benchmark") {
  const double omega = 1.0, gamma = 0.3, t_end = 5.0;
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 1) = omega / 2.0;
  h(1, 0) = omega / 2.0;
  ComplexMatrix lower = ComplexMatrix::Zero(2, 2);
  lower(1, 0) = std::sqrt(gamma);
  LindbladModel model(h, {{lower, "decay"}});

  auto truth = validation::fixed_step_reference(model, pure_state(2, 0), 2e-5, t_end);

  auto run_fixed = [&](double step) {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e30;  // force max_step-limited stepping
    cfg.abs_tol = 1e30;
    cfg.max_step = step;
    cfg.sample_interval = t_end;
    auto traj = evolve(model, pure_state(2, 0), 0.0, t_end, cfg, {});
    return (traj.final_state.matrix - truth.final_state.matrix).cwiseAbs().maxCoeff();
  };

  const double e1 = run_fixed(0.2);
  const double e2 = run_fixed(0.1);
  CHECK(e1 / e2 > 16.0);  // order >= 4 (embedded pair runs at order 5)
}

TEST_CASE("state diagnostics") {
  SUBCASE("maximally mixed state") {
    DensityMatrix rho{ComplexMatrix::Identity(4, 4) / 4.0};
    const auto d = check_state(rho);
    CHECK(d.trace_dev < 1e-15);
    CHECK(d.hermiticity_dev == 0.0);
    CHECK(d.min_eigenvalue == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("corrupted matrix is flagged") {
    ComplexMatrix m = ComplexMatrix::Identity(3, 3) / 3.0;
    m(0, 2) = Complex(0.0, 0.5);
    const auto d = check_state({m});
    CHECK(d.hermiticity_dev > 0.1);
  }
}

TEST_CASE("trace, hermiticity and positivity hold along a driven-dissipative run") {
  SystemParams p = scaled_params(10.0, 0.5);
  IntegratorConfig cfg;
  cfg.sample_interval = 1.0;
  auto run = single_pair::run_square_pulse(p, 0.5, 100.0, cfg);
  // Rebuild states only at endpoints; along the way use sampled observables.
  const auto d = check_state(run.trajectory.final_state);
  CHECK(d.trace_dev < 1e-9);
  CHECK(d.hermiticity_dev < 1e-10);
  CHECK(d.min_eigenvalue > -1e-8);
}

TEST_CASE("augmented accumulator agrees with trapezoidal quadrature") {
  SystemParams p = scaled_params(10.0, 0.5);
  IntegratorConfig cfg;
  const double t_p = 582.0;
  const double horizon = t_p + 40.0;
  cfg.sample_interval = horizon / 262144;
  auto run = single_pair::run_square_pulse(p, 0.5, t_p, cfg);

  const auto& t = run.trajectory.times;
  const auto& pg1 = run.trajectory.observable("p_g1");
  double trapezoid = 0.0;
  for (size_t i = 1; i < t.size(); ++i)
    trapezoid += 0.5 * (pg1[i] + pg1[i - 1]) * (t[i] - t[i - 1]);
  trapezoid *= 2.0 * p.kappa;

  const double exact = run.trajectory.final_accumulator("eta_cum");
  CHECK(std::abs(trapezoid - exact) / exact < 1e-6);
}

TEST_CASE("unattainable tolerances raise an integration error naming the time") {
  SystemParams p = scaled_params(10.0, 0.5);
  LindbladModel model = single_pair::build_five_level(p);
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-300;
  cfg.abs_tol = 1e-300;
  try {
    evolve(model, pure_state(5, single_pair::kI0), 0.0, 10.0, cfg, {});
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
  }
}

TEST_CASE("quasi-steady state") {
  const std::vector<RepumpChannel> channels = {{single_pair::kG0, single_pair::kI0},
                                               {single_pair::kH0, single_pair::kI0}};

  SUBCASE("undriven system repumps into |i,0>") {
    SystemParams p = scaled_params(10.0, 0.0);
    LindbladModel model = single_pair::build_five_level(p);
    IntegratorConfig cfg;
    auto ss = quasi_steady_state(model, channels, 0.05, pure_state(5, single_pair::kG0), cfg);
    CHECK(ss.matrix(single_pair::kI0, single_pair::kI0).real() ==
          doctest::Approx(1.0).epsilon(1e-8));
  }

  SUBCASE("population ratio reproduces the weak-drive efficiency") {
    SystemParams p = scaled_params(1.0, 0.01);
    LindbladModel model = single_pair::build_five_level(p);
    IntegratorConfig cfg;
    cfg.abs_tol = 1e-14;
    const double zeta = analytics::rate_wd(p.omega, p.gamma_total(), 1.0) / 10.0;
    auto ss = quasi_steady_state(model, channels, zeta, pure_state(5, single_pair::kI0), cfg);
    const double pg1 = ss.matrix(single_pair::kG1, single_pair::kG1).real();
    const double pe0 = ss.matrix(single_pair::kE0, single_pair::kE0).real();
    const double eta = 2.0 * p.kappa * pg1 / (2.0 * p.kappa * pg1 + p.gamma_total() * pe0);
    CHECK(std::abs(eta - analytics::eta_wd(1.0)) / analytics::eta_wd(1.0) < 0.01);
  }

  SUBCASE("population ratio is independent of the repump rate") {
    SystemParams p = scaled_params(10.0, 0.1);
    LindbladModel model = single_pair::build_five_level(p);
    IntegratorConfig cfg;
    cfg.abs_tol = 1e-14;
    const double zeta = analytics::rate_wd(p.omega, p.gamma_total(), 10.0) / 10.0;
    double ratio[2];
    int idx = 0;
    for (double z : {zeta, zeta / 10.0}) {
      auto ss = quasi_steady_state(model, channels, z, pure_state(5, single_pair::kI0), cfg);
      ratio[idx++] = ss.matrix(single_pair::kE0, single_pair::kE0).real() /
                     ss.matrix(single_pair::kG1, single_pair::kG1).real();
    }
    CHECK(std::abs(ratio[0] - ratio[1]) / ratio[0] < 1e-6);
  }

  SUBCASE("exhausted budget raises a convergence error") {
    SystemParams p = scaled_params(10.0, 0.1);
    LindbladModel model = single_pair::build_five_level(p);
    IntegratorConfig cfg;
    CHECK_THROWS_AS(quasi_steady_state(model, channels, 1e-4,
                                       pure_state(5, single_pair::kI0), cfg, 1e-30, 10.0),
                    ConvergenceError);
  }
}
