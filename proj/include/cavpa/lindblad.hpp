#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cavpa/errors.hpp"

namespace cavpa {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Jump operator, already scaled so the dissipator
// D[b, rho] = b rho b^dag - 1/2 {b^dag b, rho} carries no extra rate
// (e.g. the cavity term 2 kappa D[a, .] is encoded as b = sqrt(2 kappa) a).
struct CollapseOp {
  ComplexMatrix op;
  std::string label;
};

struct DensityMatrix {
  ComplexMatrix matrix;
  int dim() const { return static_cast<int>(matrix.rows()); }
};

// rho = |index><index|.
DensityMatrix pure_state(int dim, int index);

struct StateDiagnostics {
  double trace_dev = 0.0;        // |tr rho - 1|
  double hermiticity_dev = 0.0;  // max_ij |rho - rho^dag|
  double min_eigenvalue = 0.0;   // smallest eigenvalue of (rho + rho^dag)/2
};

StateDiagnostics check_state(const DensityMatrix& rho);

namespace detail {

struct Entry {
  int row = 0;
  int col = 0;
  Complex value;
};

// Nonzero entries of the model operators, extracted once at construction.
// This is an application plan only; the dense matrices stay the contract.
struct LiouvillianPlan {
  std::vector<Entry> h0;
  std::vector<Entry> drive;
  std::vector<std::vector<Entry>> jumps;
  std::vector<Entry> damping;  // K = sum_j b_j^dag b_j
  double rate_scale = 1.0;     // coarse magnitude of the fastest rate
};

}  // namespace detail

// H(t) = h0 + amplitude(t) * drive together with a fixed set of collapse
// operators. Immutable after construction; safe to share between threads.
// Evolutions own their private state, so concurrent evolve() calls on one
// model are fine.
class LindbladModel {
 public:
  LindbladModel(ComplexMatrix h0, std::vector<CollapseOp> collapses,
                std::vector<std::string> basis_labels = {});

  // `breakpoints` lists the envelope discontinuities; the integrator splits
  // steps there and re-evaluates the derivative on each side.
  LindbladModel(ComplexMatrix h0, ComplexMatrix drive, std::function<double(double)> amplitude,
                std::vector<double> breakpoints, std::vector<CollapseOp> collapses,
                std::vector<std::string> basis_labels = {});

  int dim() const { return dim_; }
  bool has_drive() const { return drive_.size() > 0; }
  double drive_amplitude(double t) const { return amplitude_ ? amplitude_(t) : 0.0; }

  // Dense H(t); Hermitian for every t by construction.
  ComplexMatrix hamiltonian(double t) const;

  const ComplexMatrix& static_hamiltonian() const { return h0_; }
  const ComplexMatrix& drive_operator() const { return drive_; }
  const std::vector<CollapseOp>& collapses() const { return collapses_; }
  const std::vector<std::string>& basis_labels() const { return basis_labels_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const detail::LiouvillianPlan& plan() const { return plan_; }
  double rate_scale() const { return plan_.rate_scale; }

 private:
  void compile();

  int dim_ = 0;
  ComplexMatrix h0_;
  ComplexMatrix drive_;
  std::function<double(double)> amplitude_;
  std::vector<double> breakpoints_;
  std::vector<CollapseOp> collapses_;
  std::vector<std::string> basis_labels_;
  detail::LiouvillianPlan plan_;
};

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double sample_interval = 0.0;  // 0: span / 4096
  bool track_hygiene = false;    // run check_state at every sample
};

// Sampled quantity Re tr(op rho).
struct ObservableSpec {
  std::string name;
  ComplexMatrix op;
};

// Running integral d(acc)/dt = weight * Re tr(op rho), carried as an
// augmented component of the ODE state so the step controller bounds its
// error directly.
struct AccumulatorSpec {
  std::string name;
  ComplexMatrix op;
  double weight = 1.0;
};

// Terminate once Re tr(op rho) < threshold, checked after each accepted step
// at t >= arm_after. With refine, the crossing time is located by bisection
// to time_rel_tol relative precision.
struct StopRule {
  ComplexMatrix op;
  double threshold = 0.0;
  double arm_after = 0.0;
  bool refine = false;
  double time_rel_tol = 1e-3;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observables;  // one series per name
  std::vector<std::string> accumulator_names;
  std::vector<std::vector<double>> accumulators;  // running integrals at sample times
  DensityMatrix final_state;
  std::vector<double> final_accumulators;
  bool stopped = false;
  double stop_time = 0.0;

  // Worst-case state diagnostics over all samples; meaningful when the
  // config had track_hygiene set.
  double max_trace_dev = 0.0;
  double max_hermiticity_dev = 0.0;
  double min_eigenvalue = 1.0;

  const std::vector<double>& observable(std::string_view name) const;
  const std::vector<double>& accumulator(std::string_view name) const;
  double final_accumulator(std::string_view name) const;
};

// d rho/dt = -i [H(t), rho] + sum_j (b_j rho b_j^dag - 1/2 {b_j^dag b_j, rho}).
ComplexMatrix liouvillian_apply(const LindbladModel& model, const DensityMatrix& rho, double t);

// Adaptive Dormand-Prince 5(4) propagation with embedded error control.
// Observables and accumulators are recorded on the fixed sample grid
// (plus breakpoints and the final time); the grid is independent of the
// internal adaptive steps.
Trajectory evolve(const LindbladModel& model, const DensityMatrix& rho0, double t0, double t_end,
                  const IntegratorConfig& config, std::span<const ObservableSpec> observables,
                  std::span<const AccumulatorSpec> accumulators = {},
                  const StopRule* stop = nullptr, std::span<const double> initial_accumulators = {});

struct RepumpChannel {
  int from = 0;
  int to = 0;
};

// Fixed point of the model closed by artificial repump collapses
// sqrt(zeta) |to><from|. Evolves until ||d rho/dt||_F < converge_tol *
// rate_scale, in chunks of a few repump times. time_budget 0 selects
// 400/zeta.
DensityMatrix quasi_steady_state(const LindbladModel& model, std::span<const RepumpChannel> repump,
                                 double repump_rate, const DensityMatrix& rho0,
                                 const IntegratorConfig& config, double converge_tol = 1e-12,
                                 double time_budget = 0.0);

}  // namespace cavpa
