// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/priors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "assemblage/error.hpp"
#include "assemblage/special.hpp"

namespace assemblage {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw NumericError(std::string("non-finite value in ") + what);
}

}  // namespace

double dirichlet_multinomial_log_likelihood(const Matrix<int>& observations,
                                            std::span<const double> alpha) {
  if (observations.cols() != alpha.size())
    throw ConfigError("alpha and observation widths differ");
  // Histograms of per-cell counts and row totals keep the number of lgamma
  // terms small. Terms and sums are carried in extended precision and rounded
  // once, so changes between fixed-point iterations are not lost to rounding.
  std::vector<std::map<int, long long>> cells(alpha.size());
  std::map<long long, long long> totals;
  for (std::size_t d = 0; d < observations.rows(); ++d) {
    auto row = observations.row(d);
    long long n = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] == 0) continue;
      n += row[k];
      ++cells[k][row[k]];
    }
    if (n > 0) ++totals[n];
  }
  long double alpha0 = 0.0L;
  for (double a : alpha) alpha0 += a;
  long double sum = 0.0L, carry = 0.0L;
  auto add = [&](long double x) {
    const long double t = sum + x;
    carry += fabsl(sum) >= fabsl(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  };
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const long double a = alpha[k];
    for (const auto& [c, m] : cells[k])
      add(static_cast<long double>(m) * (lgammal(c + a) - lgammal(a)));
  }
  for (const auto& [n, m] : totals)
    add(static_cast<long double>(m) *
        (lgammal(alpha0) - lgammal(static_cast<long double>(n) + alpha0)));
  return static_cast<double>(sum + carry);
}

DirichletFit fit_dirichlet(const Matrix<int>& observations,
                           std::span<const double> init,
                           const DirichletFitOptions& options) {
  const std::size_t k_count = init.size();
  if (k_count == 0) throw ConfigError("Dirichlet fit needs at least one dimension");
  if (observations.rows() > 0 && observations.cols() != k_count)
    throw ConfigError("initial alpha and observation widths differ");
  for (double a : init)
    if (!(a > 0.0) || !std::isfinite(a))
      throw ConfigError("initial alpha must be positive and finite");

  // Non-empty rows only, with their totals.
  std::vector<std::size_t> rows;
  std::vector<long long> totals;
  for (std::size_t d = 0; d < observations.rows(); ++d) {
    auto row = observations.row(d);
    long long n = 0;
    for (int c : row) {
      if (c < 0) throw DataError("negative count in Dirichlet observations");
      n += c;
    }
    if (n > 0) {
      rows.push_back(d);
      totals.push_back(n);
    }
  }
  if (rows.size() < 2)
    throw DataError("Dirichlet fit needs at least 2 observations with "
                    "non-zero totals, got " + std::to_string(rows.size()));

  DirichletFit fit;
  fit.alpha.assign(init.begin(), init.end());
  std::vector<double> next(k_count);

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    if (options.record_trace)
      fit.log_likelihood_trace.push_back(
          dirichlet_multinomial_log_likelihood(observations, fit.alpha));

    const double alpha0 =
        std::accumulate(fit.alpha.begin(), fit.alpha.end(), 0.0);
    const double psi_alpha0 = digamma(alpha0);
    double denom = 0.0;
    for (long long n : totals)
      denom += digamma(static_cast<double>(n) + alpha0) - psi_alpha0;
    require_finite(denom, "Dirichlet fit denominator");

    double max_change = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const double a = fit.alpha[k];
      const double psi_a = digamma(a);
      double num = 0.0;
      for (std::size_t d : rows) {
        int c = observations(d, k);
        if (c > 0) num += digamma(c + a) - psi_a;
      }
      double updated = a * num / denom;
      require_finite(updated, "Dirichlet fit update");
      updated = std::max(updated, options.floor);
      next[k] = updated;
      max_change = std::max(max_change, std::fabs(updated - a) / a);
    }
    fit.alpha.swap(next);
    fit.iterations = iter + 1;
    if (max_change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }
  if (options.record_trace)
    fit.log_likelihood_trace.push_back(
        dirichlet_multinomial_log_likelihood(observations, fit.alpha));
  return fit;
}

std::vector<double> optimize_alpha(const Matrix<int>& room_group_counts,
                                   std::span<const double> alpha,
                                   std::size_t passes) {
  DirichletFitOptions options;
  options.max_iterations = std::max<std::size_t>(passes, 1);
  return fit_dirichlet(room_group_counts, alpha, options).alpha;
}

double optimize_beta(const Matrix<int>& group_type_counts,
                     std::span<const int> group_totals, double beta,
                     std::size_t passes) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw ConfigError("beta must be positive and finite");
  if (group_totals.size() != group_type_counts.rows())
    throw ConfigError("group totals and group-type counts disagree on K");
  const double vocab = static_cast<double>(group_type_counts.cols());
  constexpr double kFloor = 1e-6;
  constexpr double kTolerance = 1e-8;

  for (std::size_t pass = 0; pass < std::max<std::size_t>(passes, 1); ++pass) {
    const double psi_beta = digamma(beta);
    const double psi_vbeta = digamma(vocab * beta);
    double num = 0.0;
    double denom = 0.0;
    for (std::size_t k = 0; k < group_type_counts.rows(); ++k) {
      if (group_totals[k] == 0) continue;
      for (int c : group_type_counts.row(k))
        if (c > 0) num += digamma(c + beta) - psi_beta;
      denom += digamma(group_totals[k] + vocab * beta) - psi_vbeta;
    }
    if (denom <= 0.0) return beta;
    double updated = beta * num / (vocab * denom);
    if (!std::isfinite(updated))
      throw NumericError("non-finite beta update");
    updated = std::max(updated, kFloor);
    const double change = std::fabs(updated - beta) / beta;
    beta = updated;
    if (change < kTolerance) break;
  }
  return beta;
}

std::span<const double> RoomTypePriors::alpha_for(int room_type) const {
  if (!valid_room_type(room_type)) throw DataError("room type outside 0..22");
  if (fallback[room_type]) return global_alpha;
  return alpha_by_type.row(room_type);
}

RoomTypePriors fit_room_type_priors(std::span<const Snapshot> snapshots,
                                    const CorpusView& train, std::size_t k) {
  if (snapshots.empty())
    throw ConfigError("room-type priors need at least one snapshot");
  const auto rooms = train.rooms();
  for (const auto& s : snapshots) {
    if (s.k() != k) throw ConfigError("snapshot K differs from requested K");
    if (s.room_group.rows() != rooms.size())
      throw DataError("snapshot covers " + std::to_string(s.room_group.rows()) +
                      " rooms, training corpus has " +
                      std::to_string(rooms.size()));
  }

  RoomTypePriors priors;
  priors.global_alpha = snapshots.back().hyper.alpha();
  priors.alpha_by_type = Matrix<double>(kRoomTypeCount, k, 0.0);
  priors.fallback.assign(kRoomTypeCount, 1);

  std::vector<Matrix<int>> pooled(kRoomTypeCount);
  for (const auto& s : snapshots)
    for (std::size_t r = 0; r < rooms.size(); ++r)
      pooled[rooms[r]->room_type].append_row(s.room_group.row(r));

  for (int t = 0; t < kRoomTypeCount; ++t) {
    auto out = priors.alpha_by_type.row(t);
    std::size_t usable = 0;
    for (std::size_t d = 0; d < pooled[t].rows(); ++d) {
      auto row = pooled[t].row(d);
      if (std::any_of(row.begin(), row.end(), [](int c) { return c > 0; }))
        ++usable;
    }
    if (usable >= 2) {
      auto fit = fit_dirichlet(pooled[t], priors.global_alpha);
      std::copy(fit.alpha.begin(), fit.alpha.end(), out.begin());
      priors.fallback[t] = 0;
    } else {
      std::copy(priors.global_alpha.begin(), priors.global_alpha.end(),
                out.begin());
    }
  }
  return priors;
}

}  // namespace assemblage
