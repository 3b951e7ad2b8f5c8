// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>
#include <vector>

#include "assemblage/corpus.hpp"
#include "assemblage/matrix.hpp"
#include "assemblage/sampler.hpp"

namespace assemblage {

struct DirichletFitOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 1000;
  double floor = 1e-6;
  // Record the Dirichlet-multinomial log-likelihood before each update and
  // after the last one.
  bool record_trace = false;
};

struct DirichletFit {
  std::vector<double> alpha;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> log_likelihood_trace;
};

// Dirichlet-multinomial log-likelihood of count rows, without multinomial
// coefficients (they do not depend on alpha).
double dirichlet_multinomial_log_likelihood(const Matrix<int>& observations,
                                            std::span<const double> alpha);

// Fixed-point maximum likelihood estimate of a Dirichlet-multinomial prior:
//   alpha_k <- alpha_k * sum_d [psi(n_dk + alpha_k) - psi(alpha_k)]
//                      / sum_d [psi(n_d + alpha_0) - psi(alpha_0)]
// Rows with zero total are ignored; at least two non-empty rows are required.
DirichletFit fit_dirichlet(const Matrix<int>& observations,
                           std::span<const double> init,
                           const DirichletFitOptions& options = {});

// Updates the asymmetric room-group prior using rooms as observations.
std::vector<double> optimize_alpha(const Matrix<int>& room_group_counts,
                                   std::span<const double> alpha,
                                   std::size_t passes = 20);

// Symmetric fixed point for the shared group-type smoother:
//   beta <- beta * sum_k sum_a [psi(N_ak + beta) - psi(beta)]
//               / (|A| sum_k [psi(N_k + |A| beta) - psi(|A| beta)])
double optimize_beta(const Matrix<int>& group_type_counts,
                     std::span<const int> group_totals, double beta,
                     std::size_t passes = 20);

// Per-room-type Dirichlet priors over groups (23 x K). Rows for types with
// fewer than two pooled observations hold the global alpha and are flagged.
struct RoomTypePriors {
  Matrix<double> alpha_by_type;
  std::vector<char> fallback;
  std::vector<double> global_alpha;

  std::size_t k() const { return alpha_by_type.cols(); }
  std::span<const double> alpha_for(int room_type) const;
};

// Pools the N_{k|r} rows of every (snapshot, room) of each room type and fits
// one Dirichlet per type. Snapshot rows must line up with train.rooms().
RoomTypePriors fit_room_type_priors(std::span<const Snapshot> snapshots,
                                    const CorpusView& train, std::size_t k);

}  // namespace assemblage
