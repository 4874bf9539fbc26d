#include "cavpa/single_pair.hpp"

#include <cmath>
#include <fmt/format.h>

#include "cavpa/analytics.hpp"

namespace cavpa::single_pair {

namespace {

ComplexMatrix projector(int index) {
  ComplexMatrix p = ComplexMatrix::Zero(kDim, kDim);
  p(index, index) = 1.0;
  return p;
}

std::vector<ObservableSpec> population_observables() {
  const auto& labels = basis_labels();
  std::vector<ObservableSpec> obs;
  for (int i = 0; i < kDim; ++i) obs.push_back({"p_" + labels[i], projector(i)});
  return obs;
}

std::vector<AccumulatorSpec> efficiency_accumulators(const SystemParams& p) {
  return {{"eta_cum", projector(kG1), 2.0 * p.kappa},
          {"eta_direct", projector(kE0), p.gamma_g},
          {"eta_lost", projector(kE0), p.gamma_h}};
}

ComplexMatrix excited_projector() {
  ComplexMatrix p = ComplexMatrix::Zero(kDim, kDim);
  p(kE0, kE0) = 1.0;
  p(kG1, kG1) = 1.0;
  return p;
}

EfficiencyResult efficiency_from(const Trajectory& traj) {
  EfficiencyResult r;
  r.eta_cavity = traj.final_accumulator("eta_cum");
  r.eta_direct = traj.final_accumulator("eta_direct");
  r.eta_lost = traj.final_accumulator("eta_lost");
  const ComplexMatrix& rho = traj.final_state.matrix;
  r.p_i0_final = rho(kI0, kI0).real();
  r.residual = rho(kE0, kE0).real() + rho(kG1, kG1).real();
  return r;
}

// Decay of the excited manifold after the drive is gone proceeds at least
// at a quarter of the slower of Gamma and 2 kappa; the budget leaves two
// orders of magnitude of headroom over the 1e-8 residual horizon.
double free_decay_budget(const SystemParams& p) {
  const double gamma = p.gamma_total();
  const double floor_rate = p.kappa > 0.0 ? std::min(gamma, 2.0 * p.kappa) : gamma;
  return 1600.0 / floor_rate;
}

double transfer_budget(const SystemParams& p, double omega) {
  const double gamma = p.gamma_total();
  const double coop = p.kappa > 0.0 ? p.cooperativity() : p.g * p.g / (gamma * gamma);
  const double rate = analytics::rate_wd(omega, gamma, coop);
  // Covers both the weak-drive rate and the saturated strong-drive regime.
  return std::log(1e3) * (30.0 / rate + 60.0 / gamma);
}

struct PulsePhase {
  Trajectory trajectory;
  double t_p = 0.0;
};

// Constant drive from |i,0> until rho_i0i0 crosses 1e-3.
PulsePhase run_transfer_phase(const SystemParams& params, double omega,
                              const IntegratorConfig& config) {
  if (!(omega > 0.0))
    throw TransferTimeoutError("99.9% transfer is unreachable without drive (Omega = 0)");
  SystemParams cw = params;
  cw.omega = omega;
  cw.validate();
  LindbladModel model = build_five_level(cw);

  const double budget = transfer_budget(cw, omega);
  StopRule stop{projector(kI0), 1e-3, 0.0, true, 1e-3};
  Trajectory traj = evolve(model, pure_state(kDim, kI0), 0.0, budget, config,
                           population_observables(), efficiency_accumulators(cw), &stop);
  if (!traj.stopped)
    throw TransferTimeoutError(fmt::format(
        "population in |i,0> did not drop below 1e-3 within the time budget {} s", budget));
  const double t_cross = traj.stop_time;
  return {std::move(traj), t_cross};
}

void append_trajectory(Trajectory& dst, const Trajectory& src) {
  const size_t skip = (!dst.times.empty() && !src.times.empty() && dst.times.back() == src.times[0])
                          ? 1
                          : 0;
  dst.times.insert(dst.times.end(), src.times.begin() + skip, src.times.end());
  for (size_t i = 0; i < dst.observables.size(); ++i)
    dst.observables[i].insert(dst.observables[i].end(), src.observables[i].begin() + skip,
                              src.observables[i].end());
  for (size_t i = 0; i < dst.accumulators.size(); ++i)
    dst.accumulators[i].insert(dst.accumulators[i].end(), src.accumulators[i].begin() + skip,
                               src.accumulators[i].end());
  dst.final_state = src.final_state;
  dst.final_accumulators = src.final_accumulators;
  dst.stopped = src.stopped;
  dst.stop_time = src.stop_time;
  dst.max_trace_dev = std::max(dst.max_trace_dev, src.max_trace_dev);
  dst.max_hermiticity_dev = std::max(dst.max_hermiticity_dev, src.max_hermiticity_dev);
  dst.min_eigenvalue = std::min(dst.min_eigenvalue, src.min_eigenvalue);
}

}  // namespace

const std::vector<std::string>& basis_labels() {
  static const std::vector<std::string> labels = {"i0", "e0", "g1", "g0", "h0"};
  return labels;
}

double EfficiencyResult::bookkeeping_gap() const {
  return std::abs(eta_cavity + eta_direct + eta_lost + p_i0_final + residual - 1.0);
}

LindbladModel build_five_level(const SystemParams& params,
                               const std::optional<SquarePulse>& pulse) {
  params.validate();
  if (pulse) {
    if (!(pulse->t_p > 0.0))
      throw InvalidParameterError(fmt::format("pulse duration must be > 0, got {}", pulse->t_p));
    if (pulse->omega < 0.0)
      throw InvalidParameterError(fmt::format("pulse Omega must be >= 0, got {}", pulse->omega));
  }

  ComplexMatrix h0 = ComplexMatrix::Zero(kDim, kDim);
  h0(kE0, kE0) = params.delta1;
  h0(kG1, kG1) = params.delta2;
  h0(kG1, kE0) = params.g;
  h0(kE0, kG1) = params.g;

  ComplexMatrix drive = ComplexMatrix::Zero(kDim, kDim);
  drive(kE0, kI0) = 0.5;
  drive(kI0, kE0) = 0.5;

  std::function<double(double)> amplitude;
  std::vector<double> breakpoints;
  if (pulse) {
    const double om = pulse->omega;
    const double tp = pulse->t_p;
    amplitude = [om, tp](double t) { return t < tp ? om : 0.0; };
    breakpoints = {tp};
  } else {
    const double om = params.omega;
    amplitude = [om](double) { return om; };
  }

  std::vector<CollapseOp> collapses;
  ComplexMatrix cavity = ComplexMatrix::Zero(kDim, kDim);
  cavity(kG0, kG1) = std::sqrt(2.0 * params.kappa);
  collapses.push_back({std::move(cavity), "cavity"});
  ComplexMatrix direct = ComplexMatrix::Zero(kDim, kDim);
  direct(kG0, kE0) = std::sqrt(params.gamma_g);
  collapses.push_back({std::move(direct), "gamma_g"});
  ComplexMatrix lost = ComplexMatrix::Zero(kDim, kDim);
  lost(kH0, kE0) = std::sqrt(params.gamma_h);
  collapses.push_back({std::move(lost), "gamma_h"});

  return LindbladModel(std::move(h0), std::move(drive), std::move(amplitude),
                       std::move(breakpoints), std::move(collapses), basis_labels());
}

RunResult run_square_pulse(const SystemParams& params, double omega, std::optional<double> t_p,
                           const IntegratorConfig& config, double residual_threshold) {
  params.validate();

  RunResult result;
  DensityMatrix rho_after;
  std::vector<double> acc_after;
  if (t_p) {
    if (!(*t_p > 0.0))
      throw InvalidParameterError(fmt::format("t_p must be > 0, got {}", *t_p));
    SystemParams p = params;
    p.omega = omega;
    LindbladModel model = build_five_level(p, SquarePulse{omega, *t_p});
    result.trajectory = evolve(model, pure_state(kDim, kI0), 0.0, *t_p, config,
                               population_observables(), efficiency_accumulators(p));
    result.t_p = *t_p;
  } else {
    PulsePhase phase = run_transfer_phase(params, omega, config);
    result.trajectory = std::move(phase.trajectory);
    result.t_p = phase.t_p;
  }

  // Free decay of what is left in |e,0> and |g,1> after the pulse.
  SystemParams off = params;
  off.omega = 0.0;
  LindbladModel model_off = build_five_level(off);
  StopRule stop{excited_projector(), residual_threshold, result.t_p, false, 1e-3};
  Trajectory tail = evolve(model_off, result.trajectory.final_state, result.t_p,
                           result.t_p + free_decay_budget(off), config, population_observables(),
                           efficiency_accumulators(off), &stop, result.trajectory.final_accumulators);
  append_trajectory(result.trajectory, tail);

  result.efficiency = efficiency_from(result.trajectory);
  return result;
}

double transfer_time_99_9(const SystemParams& params, double omega,
                          const IntegratorConfig& config) {
  params.validate();
  return run_transfer_phase(params, omega, config).t_p;
}

RunResult run_cw_complete(const SystemParams& params, double omega,
                          const IntegratorConfig& config, double active_threshold) {
  params.validate();
  if (!(omega > 0.0))
    throw TransferTimeoutError("complete transfer is unreachable without drive (Omega = 0)");
  SystemParams cw = params;
  cw.omega = omega;
  LindbladModel model = build_five_level(cw);

  ComplexMatrix active = ComplexMatrix::Zero(kDim, kDim);
  active(kI0, kI0) = 1.0;
  active(kE0, kE0) = 1.0;
  active(kG1, kG1) = 1.0;

  const double budget =
      std::log(1.0 / active_threshold) / std::log(1e3) * transfer_budget(cw, omega);
  StopRule stop{active, active_threshold, 0.0, false, 1e-3};
  RunResult result;
  result.trajectory = evolve(model, pure_state(kDim, kI0), 0.0, budget, config,
                             population_observables(), efficiency_accumulators(cw), &stop);
  if (!result.trajectory.stopped)
    throw TransferTimeoutError(fmt::format(
        "population did not complete the transfer within the time budget {} s", budget));
  result.t_p = result.trajectory.stop_time;
  result.efficiency = efficiency_from(result.trajectory);
  return result;
}

RunResult run_delta_pulse(const SystemParams& params, const IntegratorConfig& config,
                          double residual_threshold) {
  params.validate();
  SystemParams off = params;
  off.omega = 0.0;
  LindbladModel model = build_five_level(off);
  StopRule stop{excited_projector(), residual_threshold, 0.0, false, 1e-3};
  RunResult result;
  result.trajectory = evolve(model, pure_state(kDim, kE0), 0.0, free_decay_budget(off), config,
                             population_observables(), efficiency_accumulators(off), &stop);
  result.efficiency = efficiency_from(result.trajectory);
  result.t_p = 0.0;
  return result;
}

}  // namespace cavpa::single_pair
