#include "cavpa/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <utility>

namespace cavpa {

namespace {

constexpr int kDefaultSamples = 4096;

void scan_entries(const ComplexMatrix& m, std::vector<detail::Entry>& out) {
  out.clear();
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r)
      if (m(r, c) != Complex(0.0, 0.0)) out.push_back({r, c, m(r, c)});
}

double max_abs_row_sum(const ComplexMatrix& m) {
  double best = 0.0;
  for (int r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (int c = 0; c < m.cols(); ++c) s += std::abs(m(r, c));
    best = std::max(best, s);
  }
  return best;
}

void require_hermitian(const ComplexMatrix& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-12 * scale)
    throw StructuralError(fmt::format("{} is not Hermitian (max deviation {})", what, dev));
}

}  // namespace

DensityMatrix pure_state(int dim, int index) {
  if (dim <= 0 || index < 0 || index >= dim)
    throw StructuralError(fmt::format("pure_state index {} outside dimension {}", index, dim));
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return {std::move(m)};
}

StateDiagnostics check_state(const DensityMatrix& rho) {
  const ComplexMatrix& m = rho.matrix;
  StateDiagnostics d;
  d.trace_dev = std::abs(m.trace() - Complex(1.0, 0.0));
  d.hermiticity_dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((m + m.adjoint()) / 2.0,
                                                  Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

LindbladModel::LindbladModel(ComplexMatrix h0, std::vector<CollapseOp> collapses,
                             std::vector<std::string> basis_labels)
    : LindbladModel(std::move(h0), ComplexMatrix(), nullptr, {}, std::move(collapses),
                    std::move(basis_labels)) {}

LindbladModel::LindbladModel(ComplexMatrix h0, ComplexMatrix drive,
                             std::function<double(double)> amplitude,
                             std::vector<double> breakpoints, std::vector<CollapseOp> collapses,
                             std::vector<std::string> basis_labels)
    : h0_(std::move(h0)),
      drive_(std::move(drive)),
      amplitude_(std::move(amplitude)),
      breakpoints_(std::move(breakpoints)),
      collapses_(std::move(collapses)),
      basis_labels_(std::move(basis_labels)) {
  if (h0_.rows() != h0_.cols() || h0_.rows() == 0)
    throw StructuralError("Hamiltonian must be a square, non-empty matrix");
  dim_ = static_cast<int>(h0_.rows());
  require_hermitian(h0_, "static Hamiltonian");
  if (drive_.size() > 0) {
    if (drive_.rows() != dim_ || drive_.cols() != dim_)
      throw StructuralError(fmt::format("drive operator is {}x{}, expected {}x{}", drive_.rows(),
                                        drive_.cols(), dim_, dim_));
    require_hermitian(drive_, "drive operator");
    if (!amplitude_) throw StructuralError("drive operator given without amplitude function");
  }
  for (const auto& c : collapses_) {
    if (c.op.rows() != dim_ || c.op.cols() != dim_)
      throw StructuralError(fmt::format("collapse '{}' is {}x{}, expected {}x{}", c.label,
                                        c.op.rows(), c.op.cols(), dim_, dim_));
  }
  if (basis_labels_.empty()) {
    for (int i = 0; i < dim_; ++i) basis_labels_.push_back(std::to_string(i));
  } else if (static_cast<int>(basis_labels_.size()) != dim_) {
    throw StructuralError(
        fmt::format("{} basis labels for dimension {}", basis_labels_.size(), dim_));
  }
  std::sort(breakpoints_.begin(), breakpoints_.end());
  compile();
}

void LindbladModel::compile() {
  scan_entries(h0_, plan_.h0);
  if (drive_.size() > 0) scan_entries(drive_, plan_.drive);
  plan_.jumps.resize(collapses_.size());
  ComplexMatrix damping = ComplexMatrix::Zero(dim_, dim_);
  for (size_t j = 0; j < collapses_.size(); ++j) {
    scan_entries(collapses_[j].op, plan_.jumps[j]);
    damping += collapses_[j].op.adjoint() * collapses_[j].op;
  }
  scan_entries(damping, plan_.damping);
  plan_.rate_scale = std::max({max_abs_row_sum(h0_), max_abs_row_sum(damping),
                               drive_.size() > 0 ? max_abs_row_sum(drive_) : 0.0, 1e-300});
}

ComplexMatrix LindbladModel::hamiltonian(double t) const {
  if (!has_drive()) return h0_;
  return h0_ + drive_amplitude(t) * drive_;
}

namespace {

// out = -i [H0 + amp*D, rho] + sum_j b_j rho b_j^dag - 1/2 {K, rho},
// assembled from the nonzero entries of each operator.
void apply_liouvillian_plan(const detail::LiouvillianPlan& plan, const ComplexMatrix& rho,
                            double amp, ComplexMatrix& out) {
  const Complex neg_i(0.0, -1.0);
  const Complex pos_i(0.0, 1.0);
  out.setZero();
  for (const auto& e : plan.h0) {
    out.row(e.row) += (neg_i * e.value) * rho.row(e.col);
    out.col(e.col) += (pos_i * e.value) * rho.col(e.row);
  }
  if (amp != 0.0) {
    for (const auto& e : plan.drive) {
      const Complex v = amp * e.value;
      out.row(e.row) += (neg_i * v) * rho.row(e.col);
      out.col(e.col) += (pos_i * v) * rho.col(e.row);
    }
  }
  for (const auto& jump : plan.jumps) {
    for (const auto& e1 : jump)
      for (const auto& e2 : jump)
        out(e1.row, e2.row) += e1.value * std::conj(e2.value) * rho(e1.col, e2.col);
  }
  for (const auto& e : plan.damping) {
    const Complex v = 0.5 * e.value;
    out.row(e.row) -= v * rho.row(e.col);
    out.col(e.col) -= v * rho.col(e.row);
  }
}

double trace_with(const std::vector<detail::Entry>& op, const ComplexMatrix& rho) {
  Complex s(0.0, 0.0);
  for (const auto& e : op) s += e.value * rho(e.col, e.row);
  return s.real();
}

struct OdeState {
  ComplexMatrix rho;
  Eigen::VectorXd acc;
};

// Dormand-Prince 5(4). kA[6] doubles as the 5th-order weight row (FSAL).
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

class Evolver {
 public:
  Evolver(const LindbladModel& model, const IntegratorConfig& cfg,
          std::span<const ObservableSpec> observables,
          std::span<const AccumulatorSpec> accumulators)
      : model_(model), cfg_(cfg) {
    if (!(cfg_.rel_tol > 0.0) || !(cfg_.abs_tol > 0.0))
      throw InvalidParameterError("integrator tolerances must be > 0");
    for (const auto& o : observables) {
      check_op(o.op, o.name);
      obs_.emplace_back();
      scan_entries(o.op, obs_.back());
    }
    for (const auto& a : accumulators) {
      check_op(a.op, a.name);
      acc_ops_.emplace_back();
      scan_entries(a.op, acc_ops_.back());
      acc_weights_.push_back(a.weight);
    }
    const int dim = model_.dim();
    const int nacc = static_cast<int>(acc_ops_.size());
    for (auto& k : k_) {
      k.rho.resize(dim, dim);
      k.acc.resize(nacc);
    }
    tmp_.rho.resize(dim, dim);
    tmp_.acc.resize(nacc);
    err_rho_.resize(dim, dim);
    err_acc_.resize(nacc);
  }

  size_t observable_count() const { return obs_.size(); }
  size_t accumulator_count() const { return acc_ops_.size(); }

  double observable_value(size_t idx, const ComplexMatrix& rho) const {
    return trace_with(obs_[idx], rho);
  }

  void derivative(double t, const OdeState& y, OdeState& dy) {
    const double amp = model_.has_drive() ? model_.drive_amplitude(t) : 0.0;
    apply_liouvillian_plan(model_.plan(), y.rho, amp, dy.rho);
    for (size_t k = 0; k < acc_ops_.size(); ++k)
      dy.acc[static_cast<int>(k)] = acc_weights_[k] * trace_with(acc_ops_[k], y.rho);
  }

  void invalidate_fsal() { primed_ = false; }

  // Stop-rule support: checked after every accepted internal step.
  void arm_stop(const StopRule* stop) {
    stop_ = stop;
    stop_hit_ = false;
    if (stop) {
      check_op(stop->op, "stop rule");
      scan_entries(stop->op, stop_op_);
    }
  }
  void suspend_stop(bool suspended) { stop_suspended_ = suspended; }
  bool stop_hit() const { return stop_hit_; }
  double stop_value(const ComplexMatrix& rho) const { return trace_with(stop_op_, rho); }
  double prev_time() const { return prev_t_; }
  OdeState take_prev_state() { return std::move(prev_); }

  // Advance y to exactly t_target (or to the step where the stop rule
  // fires). Stage times are clamped just below t_limit so a right-continuous
  // envelope jump at a segment end is never sampled from inside the segment.
  void advance_to(OdeState& y, double& t, double t_target, double t_limit, double& h) {
    while (t < t_target) {
      if (!primed_) {
        derivative(t, y, k_[0]);
        primed_ = true;
      }
      const bool stop_active = stop_ && !stop_suspended_;
      if (stop_active && stop_->refine) {
        prev_ = y;  // kept for crossing refinement
        prev_t_ = t;
      }
      const double rem = t_target - t;
      const double natural = std::min(h, cfg_.max_step);
      const bool landing = natural >= rem;
      const double taken = step_once(y, t, landing ? rem : natural, t_limit, h, landing);
      if (landing && taken == rem) t = t_target;
      if (stop_active && t >= stop_->arm_after && stop_value(y.rho) < stop_->threshold) {
        stop_hit_ = true;
        return;
      }
    }
  }

 private:
  void check_op(const ComplexMatrix& op, const std::string& name) const {
    if (op.rows() != model_.dim() || op.cols() != model_.dim())
      throw StructuralError(fmt::format("operator '{}' has wrong dimension", name));
  }

  // One accepted step of size at most `request`; returns the size taken and
  // updates the controller suggestion h.
  double step_once(OdeState& y, double& t, double request, double t_limit, double& h,
                   bool capped) {
    const double h_floor = 1e-13 * std::max({std::abs(t), request, 1.0 / model_.rate_scale()});
    double step = request;
    bool rejected = false;
    for (;;) {
      if (!(step > h_floor) || !(t + step > t))
        throw IntegrationError(
            fmt::format("step size underflow at t = {} (rel_tol={}, abs_tol={} not attainable)", t,
                        cfg_.rel_tol, cfg_.abs_tol));
      for (int s = 1; s < 7; ++s) {
        tmp_.rho = y.rho;
        tmp_.acc = y.acc;
        for (int j = 0; j < s; ++j) {
          if (kA[s][j] == 0.0) continue;
          tmp_.rho.noalias() += (step * kA[s][j]) * k_[j].rho;
          tmp_.acc += (step * kA[s][j]) * k_[j].acc;
        }
        const double ts = std::min(t + kC[s] * step, std::nextafter(t_limit, t));
        derivative(ts, tmp_, k_[s]);
      }
      // tmp_ now holds the 5th-order candidate (stage-7 node equals the
      // 5th-order weights); k_[6] its derivative (FSAL).
      err_rho_ = (kA[6][0] - kB4[0]) * k_[0].rho;
      err_acc_ = (kA[6][0] - kB4[0]) * k_[0].acc;
      for (int s = 1; s < 6; ++s) {
        if (kA[6][s] == kB4[s]) continue;
        err_rho_.noalias() += (kA[6][s] - kB4[s]) * k_[s].rho;
        err_acc_ += (kA[6][s] - kB4[s]) * k_[s].acc;
      }
      err_rho_.noalias() -= kB4[6] * k_[6].rho;
      err_acc_ -= kB4[6] * k_[6].acc;

      double err_sq = 0.0;
      const int dim = model_.dim();
      const auto* yd = y.rho.data();
      const auto* cd = tmp_.rho.data();
      const auto* ed = err_rho_.data();
      for (int i = 0; i < dim * dim; ++i) {
        const double scale =
            cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(yd[i]), std::abs(cd[i]));
        const double w = step * std::abs(ed[i]) / scale;
        err_sq += w * w;
      }
      for (int i = 0; i < err_acc_.size(); ++i) {
        const double scale =
            cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y.acc[i]), std::abs(tmp_.acc[i]));
        const double w = step * std::abs(err_acc_[i]) / scale;
        err_sq += w * w;
      }
      const double n = static_cast<double>(dim) * dim + err_acc_.size();
      const double err = std::sqrt(err_sq / n);

      if (err <= 1.0) {
        y.rho.swap(tmp_.rho);
        y.acc.swap(tmp_.acc);
        t += step;
        k_[0].rho.swap(k_[6].rho);  // FSAL
        k_[0].acc.swap(k_[6].acc);
        double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        if (rejected) fac = std::min(fac, 1.0);
        const double suggestion = step * std::clamp(fac, 0.2, 5.0);
        // A size-capped step says nothing against the previous suggestion.
        h = (capped && !rejected) ? std::max(h, suggestion) : suggestion;
        return step;
      }
      rejected = true;
      step *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
  }

  const LindbladModel& model_;
  IntegratorConfig cfg_;
  std::vector<std::vector<detail::Entry>> obs_;
  std::vector<std::vector<detail::Entry>> acc_ops_;
  std::vector<double> acc_weights_;
  const StopRule* stop_ = nullptr;
  std::vector<detail::Entry> stop_op_;
  bool stop_hit_ = false;
  bool stop_suspended_ = false;
  OdeState prev_;
  double prev_t_ = 0.0;
  OdeState k_[7];
  OdeState tmp_;
  ComplexMatrix err_rho_;
  Eigen::VectorXd err_acc_;
  bool primed_ = false;
};

double initial_step(const LindbladModel& model, const IntegratorConfig& cfg, double span) {
  return std::min({cfg.max_step, span / 100.0, 0.01 / model.rate_scale()});
}

}  // namespace

ComplexMatrix liouvillian_apply(const LindbladModel& model, const DensityMatrix& rho, double t) {
  if (rho.dim() != model.dim())
    throw StructuralError(
        fmt::format("density matrix dimension {} does not match model dimension {}", rho.dim(),
                    model.dim()));
  ComplexMatrix out(model.dim(), model.dim());
  apply_liouvillian_plan(model.plan(), rho.matrix,
                         model.has_drive() ? model.drive_amplitude(t) : 0.0, out);
  return out;
}

const std::vector<double>& Trajectory::observable(std::string_view name) const {
  for (size_t i = 0; i < observable_names.size(); ++i)
    if (observable_names[i] == name) return observables[i];
  throw StructuralError(fmt::format("trajectory has no observable '{}'", name));
}

const std::vector<double>& Trajectory::accumulator(std::string_view name) const {
  for (size_t i = 0; i < accumulator_names.size(); ++i)
    if (accumulator_names[i] == name) return accumulators[i];
  throw StructuralError(fmt::format("trajectory has no accumulator '{}'", name));
}

double Trajectory::final_accumulator(std::string_view name) const {
  for (size_t i = 0; i < accumulator_names.size(); ++i)
    if (accumulator_names[i] == name) return final_accumulators[i];
  throw StructuralError(fmt::format("trajectory has no accumulator '{}'", name));
}

Trajectory evolve(const LindbladModel& model, const DensityMatrix& rho0, double t0, double t_end,
                  const IntegratorConfig& config, std::span<const ObservableSpec> observables,
                  std::span<const AccumulatorSpec> accumulators, const StopRule* stop,
                  std::span<const double> initial_accumulators) {
  if (rho0.dim() != model.dim())
    throw StructuralError("initial state dimension does not match model");
  if (!(t_end > t0)) throw InvalidParameterError("evolve requires t_end > t0");

  Evolver ev(model, config, observables, accumulators);
  ev.arm_stop(stop);

  const double span = t_end - t0;
  const double dt_sample =
      config.sample_interval > 0.0 ? config.sample_interval : span / kDefaultSamples;
  if (span / dt_sample > 2e7)
    throw InvalidParameterError("sample_interval too small for the requested span");

  std::vector<double> boundaries;
  for (double b : model.breakpoints())
    if (b > t0 && b < t_end) boundaries.push_back(b);
  boundaries.push_back(t_end);

  OdeState y{rho0.matrix, Eigen::VectorXd::Zero(static_cast<int>(ev.accumulator_count()))};
  if (!initial_accumulators.empty()) {
    if (initial_accumulators.size() != ev.accumulator_count())
      throw StructuralError("initial accumulator count mismatch");
    for (size_t i = 0; i < initial_accumulators.size(); ++i)
      y.acc[static_cast<int>(i)] = initial_accumulators[i];
  }

  Trajectory traj;
  for (const auto& o : observables) traj.observable_names.push_back(o.name);
  for (const auto& a : accumulators) traj.accumulator_names.push_back(a.name);
  traj.observables.resize(observables.size());
  traj.accumulators.resize(accumulators.size());

  auto record = [&](double t, const OdeState& s) {
    if (!traj.times.empty() && traj.times.back() == t) return;
    traj.times.push_back(t);
    for (size_t i = 0; i < ev.observable_count(); ++i)
      traj.observables[i].push_back(ev.observable_value(i, s.rho));
    for (size_t i = 0; i < ev.accumulator_count(); ++i)
      traj.accumulators[i].push_back(s.acc[static_cast<int>(i)]);
    if (config.track_hygiene) {
      const StateDiagnostics d = check_state({s.rho});
      traj.max_trace_dev = std::max(traj.max_trace_dev, d.trace_dev);
      traj.max_hermiticity_dev = std::max(traj.max_hermiticity_dev, d.hermiticity_dev);
      traj.min_eigenvalue = std::min(traj.min_eigenvalue, d.min_eigenvalue);
    }
  };

  double t = t0;
  double h = initial_step(model, config, span);
  long sample_index = 1;
  double next_sample = t0 + dt_sample;
  record(t0, y);

  bool done = false;
  for (double boundary : boundaries) {
    if (done) break;
    ev.invalidate_fsal();
    while (t < boundary && !done) {
      const double target = std::min(boundary, next_sample);
      ev.advance_to(y, t, target, boundary, h);

      if (!ev.stop_hit() && t >= next_sample) {
        record(t, y);
        ++sample_index;
        next_sample = t0 + static_cast<double>(sample_index) * dt_sample;
      }

      if (ev.stop_hit()) {
        if (stop->refine) {
          double ta = ev.prev_time();
          double tb = t;
          OdeState ya = ev.take_prev_state();
          ev.suspend_stop(true);
          if (ev.stop_value(ya.rho) >= stop->threshold) {
            while (tb - ta > stop->time_rel_tol * tb) {
              const double tm = 0.5 * (ta + tb);
              OdeState ym = ya;
              double tcur = ta;
              double hloc = std::min(h, tm - ta);
              ev.invalidate_fsal();
              ev.advance_to(ym, tcur, tm, boundary, hloc);
              if (ev.stop_value(ym.rho) < stop->threshold) {
                tb = tm;
              } else {
                ta = tm;
                ya = std::move(ym);
              }
            }
            double tcur = ta;
            double hloc = std::min(h, tb - ta);
            ev.invalidate_fsal();
            ev.advance_to(ya, tcur, tb, boundary, hloc);
            y = std::move(ya);
            t = tb;
          }
          ev.suspend_stop(false);
        }
        traj.stopped = true;
        traj.stop_time = t;
        record(t, y);
        done = true;
      }
    }
    if (!done && boundary != t_end) record(boundary, y);
  }

  record(t, y);
  traj.final_state = {std::move(y.rho)};
  traj.final_accumulators.assign(y.acc.data(), y.acc.data() + y.acc.size());
  if (!traj.stopped) traj.stop_time = t;
  return traj;
}

DensityMatrix quasi_steady_state(const LindbladModel& model, std::span<const RepumpChannel> repump,
                                 double repump_rate, const DensityMatrix& rho0,
                                 const IntegratorConfig& config, double converge_tol,
                                 double time_budget) {
  if (!(repump_rate > 0.0)) throw InvalidParameterError("repump rate must be > 0");
  if (rho0.dim() != model.dim()) throw StructuralError("initial state dimension mismatch");

  std::vector<CollapseOp> collapses = model.collapses();
  for (const auto& ch : repump) {
    if (ch.from < 0 || ch.from >= model.dim() || ch.to < 0 || ch.to >= model.dim())
      throw StructuralError("repump channel index outside model dimension");
    ComplexMatrix op = ComplexMatrix::Zero(model.dim(), model.dim());
    op(ch.to, ch.from) = std::sqrt(repump_rate);
    collapses.push_back({std::move(op), fmt::format("repump {}->{}", ch.from, ch.to)});
  }
  std::function<double(double)> amp;
  if (model.has_drive()) amp = [&model](double t) { return model.drive_amplitude(t); };
  LindbladModel closed(model.static_hamiltonian(), model.drive_operator(), std::move(amp),
                       model.breakpoints(), std::move(collapses), model.basis_labels());

  if (time_budget <= 0.0) time_budget = 400.0 / repump_rate;
  const double chunk = 2.0 / repump_rate;
  const double tol = converge_tol * closed.rate_scale();
  IntegratorConfig cfg = config;
  cfg.sample_interval = chunk;

  DensityMatrix rho = rho0;
  double t = 0.0;
  while (t < time_budget) {
    const double t_next = t + chunk;
    Trajectory leg = evolve(closed, rho, t, t_next, cfg, {}, {}, nullptr, {});
    rho = std::move(leg.final_state);
    t = t_next;
    const double residual = liouvillian_apply(closed, rho, t).norm();
    if (residual < tol) return rho;
  }
  throw ConvergenceError(
      fmt::format("quasi-steady state did not converge within time budget {} (repump rate {})",
                  time_budget, repump_rate));
}

}  // namespace cavpa
