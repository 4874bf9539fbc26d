#include "cavpa/collective.hpp"

#include <cmath>
#include <fmt/format.h>

namespace cavpa::collective {

namespace {

constexpr char kLevelChars[kLevelsPerMolecule + 1] = "iegh";

void check_basis(const CollectiveBasis& b) {
  if (b.n_molecules < 1) throw StructuralError("collective basis needs at least one molecule");
  if (b.n_photon_max < 0) throw StructuralError("photon cutoff must be >= 0");
}

int pow_int(int base, int exp) {
  int v = 1;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

}  // namespace

int CollectiveBasis::dim() const {
  check_basis(*this);
  return pow_int(kLevelsPerMolecule, n_molecules) * (n_photon_max + 1);
}

int CollectiveBasis::index(std::span<const int> levels, int photons) const {
  check_basis(*this);
  if (static_cast<int>(levels.size()) != n_molecules)
    throw StructuralError(fmt::format("expected {} molecular levels, got {}", n_molecules,
                                      levels.size()));
  if (photons < 0 || photons > n_photon_max)
    throw StructuralError(fmt::format("photon number {} outside cutoff {}", photons, n_photon_max));
  int idx = 0;
  for (int j = 0; j < n_molecules; ++j) {
    if (levels[j] < 0 || levels[j] >= kLevelsPerMolecule)
      throw StructuralError(fmt::format("molecular level {} out of range", levels[j]));
    idx = idx * kLevelsPerMolecule + levels[j];
  }
  return idx * (n_photon_max + 1) + photons;
}

void CollectiveBasis::decode(int index, std::span<int> levels, int& photons) const {
  check_basis(*this);
  if (index < 0 || index >= dim())
    throw StructuralError(fmt::format("basis index {} outside dimension {}", index, dim()));
  if (static_cast<int>(levels.size()) != n_molecules)
    throw StructuralError("level span size mismatch");
  photons = index % (n_photon_max + 1);
  int rem = index / (n_photon_max + 1);
  for (int j = n_molecules - 1; j >= 0; --j) {
    levels[j] = rem % kLevelsPerMolecule;
    rem /= kLevelsPerMolecule;
  }
}

std::string CollectiveBasis::label(int index) const {
  std::vector<int> levels(n_molecules);
  int photons = 0;
  decode(index, levels, photons);
  std::string s;
  for (int l : levels) s += kLevelChars[l];
  s += ',';
  s += std::to_string(photons);
  return s;
}

std::vector<std::string> CollectiveBasis::labels() const {
  std::vector<std::string> out;
  const int d = dim();
  out.reserve(d);
  for (int i = 0; i < d; ++i) out.push_back(label(i));
  return out;
}

ComplexMatrix collective_hamiltonian(const CollectiveBasis& basis, double g, double delta1,
                                     double delta2) {
  const int d = basis.dim();
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  std::vector<int> levels(basis.n_molecules);
  int n = 0;
  for (int s = 0; s < d; ++s) {
    basis.decode(s, levels, n);
    h(s, s) += delta2 * n;
    for (int j = 0; j < basis.n_molecules; ++j) {
      if (levels[j] != kLevelE) continue;
      h(s, s) += delta1;
      if (n < basis.n_photon_max) {
        // a^dag sigma_ge^j : |...e..., n> -> sqrt(n+1) |...g..., n+1>
        std::vector<int> to = levels;
        to[j] = kLevelG;
        const int sp = basis.index(to, n + 1);
        const double v = g * std::sqrt(static_cast<double>(n + 1));
        h(sp, s) += v;
        h(s, sp) += v;
      }
    }
  }
  return h;
}

ComplexMatrix collective_drive(const CollectiveBasis& basis) {
  const int d = basis.dim();
  ComplexMatrix drv = ComplexMatrix::Zero(d, d);
  std::vector<int> levels(basis.n_molecules);
  int n = 0;
  for (int s = 0; s < d; ++s) {
    basis.decode(s, levels, n);
    for (int j = 0; j < basis.n_molecules; ++j) {
      if (levels[j] != kLevelI) continue;
      std::vector<int> to = levels;
      to[j] = kLevelE;
      const int sp = basis.index(to, n);
      drv(sp, s) += 0.5;
      drv(s, sp) += 0.5;
    }
  }
  return drv;
}

std::vector<CollapseOp> collective_collapses(const CollectiveBasis& basis, double kappa,
                                             double gamma_g, double gamma_h) {
  const int d = basis.dim();
  std::vector<CollapseOp> out;

  ComplexMatrix cavity = ComplexMatrix::Zero(d, d);
  std::vector<int> levels(basis.n_molecules);
  int n = 0;
  for (int s = 0; s < d; ++s) {
    basis.decode(s, levels, n);
    if (n >= 1) {
      const int sp = basis.index(levels, n - 1);
      cavity(sp, s) = std::sqrt(2.0 * kappa) * std::sqrt(static_cast<double>(n));
    }
  }
  out.push_back({std::move(cavity), "cavity"});

  for (int j = 0; j < basis.n_molecules; ++j) {
    ComplexMatrix decay_g = ComplexMatrix::Zero(d, d);
    ComplexMatrix decay_h = ComplexMatrix::Zero(d, d);
    for (int s = 0; s < d; ++s) {
      basis.decode(s, levels, n);
      if (levels[j] != kLevelE) continue;
      std::vector<int> to = levels;
      to[j] = kLevelG;
      decay_g(basis.index(to, n), s) = std::sqrt(gamma_g);
      to[j] = kLevelH;
      decay_h(basis.index(to, n), s) = std::sqrt(gamma_h);
    }
    out.push_back({std::move(decay_g), fmt::format("gamma_g[{}]", j + 1)});
    out.push_back({std::move(decay_h), fmt::format("gamma_h[{}]", j + 1)});
  }
  return out;
}

ComplexMatrix total_excited_operator(const CollectiveBasis& basis) {
  const int d = basis.dim();
  ComplexMatrix op = ComplexMatrix::Zero(d, d);
  std::vector<int> levels(basis.n_molecules);
  int n = 0;
  for (int s = 0; s < d; ++s) {
    basis.decode(s, levels, n);
    int excited = 0;
    for (int l : levels) excited += (l == kLevelE) ? 1 : 0;
    op(s, s) = static_cast<double>(excited);
  }
  return op;
}

ComplexMatrix photon_number_operator(const CollectiveBasis& basis) {
  const int d = basis.dim();
  ComplexMatrix op = ComplexMatrix::Zero(d, d);
  std::vector<int> levels(basis.n_molecules);
  int n = 0;
  for (int s = 0; s < d; ++s) {
    basis.decode(s, levels, n);
    op(s, s) = static_cast<double>(n);
  }
  return op;
}

LindbladModel build_collective(int n, const SystemParams& params, double omega) {
  if (n < 1 || n > kMaxMolecules)
    throw UnsupportedSizeError(
        fmt::format("collective simulation supports 1..{} molecules, got {}", kMaxMolecules, n));
  params.validate();
  if (omega < 0.0) throw InvalidParameterError(fmt::format("Omega must be >= 0, got {}", omega));

  const CollectiveBasis basis{n, n};
  ComplexMatrix h0 = collective_hamiltonian(basis, params.g, params.delta1, params.delta2);
  auto collapses = collective_collapses(basis, params.kappa, params.gamma_g, params.gamma_h);
  if (omega > 0.0) {
    return LindbladModel(std::move(h0), collective_drive(basis),
                         [omega](double) { return omega; }, {}, std::move(collapses),
                         basis.labels());
  }
  return LindbladModel(std::move(h0), std::move(collapses), basis.labels());
}

CollectiveRun run_collective_decay(int n, const SystemParams& params,
                                   const IntegratorConfig& config, double residual_threshold) {
  LindbladModel model = build_collective(n, params, 0.0);
  const CollectiveBasis basis{n, n};

  ComplexMatrix excited = total_excited_operator(basis);
  ComplexMatrix photon = photon_number_operator(basis);

  std::vector<ObservableSpec> obs;
  obs.push_back({"mean_excited", excited / static_cast<double>(n)});
  obs.push_back({"mean_photon", photon});

  std::vector<AccumulatorSpec> accs;
  accs.push_back({"cavity_yield", photon, 2.0 * params.kappa});
  accs.push_back({"direct_g", excited, params.gamma_g});
  accs.push_back({"lost", excited, params.gamma_h});

  std::vector<int> all_excited(n, kLevelE);
  DensityMatrix rho0 = pure_state(basis.dim(), basis.index(all_excited, 0));

  const double gamma = params.gamma_total();
  const double floor_rate = params.kappa > 0.0 ? std::min(gamma, 2.0 * params.kappa) : gamma;
  const double budget = 1600.0 / floor_rate;

  StopRule stop{excited + photon, residual_threshold, 0.0, false, 1e-3};
  CollectiveRun run;
  run.trajectory = evolve(model, rho0, 0.0, budget, config, obs, accs, &stop);

  run.summary.n_molecules = n;
  run.summary.cavity_yield_per_molecule =
      run.trajectory.final_accumulator("cavity_yield") / static_cast<double>(n);
  run.summary.direct_g_per_molecule =
      run.trajectory.final_accumulator("direct_g") / static_cast<double>(n);
  run.summary.lost_per_molecule = run.trajectory.final_accumulator("lost") / static_cast<double>(n);
  const ComplexMatrix& rho = run.trajectory.final_state.matrix;
  double residual = 0.0;
  for (int s = 0; s < basis.dim(); ++s)
    residual += ((excited(s, s) + photon(s, s)) * rho(s, s)).real();
  run.summary.residual = residual;
  return run;
}

double collective_yield(const Trajectory& trajectory, int n_molecules) {
  if (n_molecules < 1) throw InvalidParameterError("molecule count must be >= 1");
  return trajectory.final_accumulator("cavity_yield") / static_cast<double>(n_molecules);
}

}  // namespace cavpa::collective
