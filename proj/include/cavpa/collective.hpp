#pragma once

#include <span>
#include <string>
#include <vector>

#include "cavpa/lindblad.hpp"
#include "cavpa/params.hpp"

namespace cavpa::collective {

enum MolecularLevel : int { kLevelI = 0, kLevelE = 1, kLevelG = 2, kLevelH = 3 };
inline constexpr int kLevelsPerMolecule = 4;
inline constexpr int kMaxMolecules = 3;

// Product basis of n four-level molecules and one photon mode truncated at
// n_photon_max, lexicographic: molecule 1 slowest, photon fastest.
struct CollectiveBasis {
  int n_molecules = 1;
  int n_photon_max = 1;

  int dim() const;
  int index(std::span<const int> levels, int photons) const;
  void decode(int index, std::span<int> levels, int& photons) const;
  std::string label(int index) const;  // e.g. "eg,1"
  std::vector<std::string> labels() const;
};

// H = sum_j [delta1 sigma_ee^j + (Omega/2)(sigma_ei^j + h.c.)] + delta2 a^dag a
//   + g sum_j (a^dag sigma_ge^j + h.c.).
ComplexMatrix collective_hamiltonian(const CollectiveBasis& basis, double g, double delta1,
                                     double delta2);
ComplexMatrix collective_drive(const CollectiveBasis& basis);  // sum_j (sigma_ei^j + h.c.)/2

// sqrt(2 kappa) a, and sqrt(Gamma_g) sigma_ge^j, sqrt(Gamma_h) sigma_he^j per molecule.
std::vector<CollapseOp> collective_collapses(const CollectiveBasis& basis, double kappa,
                                             double gamma_g, double gamma_h);

ComplexMatrix total_excited_operator(const CollectiveBasis& basis);  // sum_j sigma_ee^j
ComplexMatrix photon_number_operator(const CollectiveBasis& basis);  // a^dag a

// n in 1..3 (hard cap). The photon cutoff n_photon_max = n is exact: each
// molecule passes through |e> at most once and ends in |g> or |h>, so no more
// than n photons can ever be present, drive or not.
LindbladModel build_collective(int n, const SystemParams& params, double omega);

struct CollectiveObservables {
  int n_molecules = 1;
  double cavity_yield_per_molecule = 0.0;  // 2 kappa int <a^dag a> dt / N
  double direct_g_per_molecule = 0.0;      // Gamma_g int sum_j <sigma_ee^j> dt / N
  double lost_per_molecule = 0.0;          // Gamma_h int sum_j <sigma_ee^j> dt / N
  double residual = 0.0;                   // excitation left at truncation
};

struct CollectiveRun {
  Trajectory trajectory;
  CollectiveObservables summary;
};

// All molecules start in |e>, photon vacuum, no drive; evolve until the
// total excitation drops below residual_threshold.
CollectiveRun run_collective_decay(int n, const SystemParams& params,
                                   const IntegratorConfig& config = {},
                                   double residual_threshold = 1e-8);

// (2 kappa int <a^dag a> dt) / N from a finished trajectory.
double collective_yield(const Trajectory& trajectory, int n_molecules);

}  // namespace cavpa::collective
