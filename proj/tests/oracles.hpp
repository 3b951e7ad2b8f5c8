// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "assemblage/matrix.hpp"
#include "assemblage/sampler.hpp"

// Reference computations written independently of the library code paths.
namespace oracles {

// Marginal probability of a token sequence under a mixture with fixed phi
// and a Dirichlet(alpha) prior on the mixture weights, by brute-force
// enumeration of assignments in probability space. The prior over an
// assignment is the sequential Polya urn product.
inline double marginal(const std::vector<int>& tokens,
                       const assemblage::Matrix<double>& phi,
                       const std::vector<double>& alpha) {
  const std::size_t k = alpha.size();
  const std::size_t n = tokens.size();
  double a0 = 0.0;
  for (double a : alpha) a0 += a;
  std::vector<std::size_t> z(n, 0);
  double total = 0.0;
  for (;;) {
    std::vector<double> c(k, 0.0);
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      p *= (c[z[i]] + alpha[z[i]]) / (static_cast<double>(i) + a0);
      p *= phi(z[i], tokens[i]);
      c[z[i]] += 1.0;
    }
    total += p;
    std::size_t pos = 0;
    while (pos < n && ++z[pos] == k) z[pos++] = 0;
    if (pos == n) break;
  }
  return total;
}

struct Counts {
  assemblage::Matrix<int> room_group;
  assemblage::Matrix<int> group_type;
  std::vector<int> group_totals;
};

inline Counts recount(const assemblage::TrainingData& data,
                      const std::vector<std::vector<int>>& z, std::size_t k) {
  Counts c{assemblage::Matrix<int>(data.docs.size(), k),
           assemblage::Matrix<int>(k, data.vocab_size),
           std::vector<int>(k, 0)};
  for (std::size_t r = 0; r < data.docs.size(); ++r)
    for (std::size_t i = 0; i < data.docs[r].size(); ++i) {
      const int g = z[r][i];
      c.room_group(r, g) += 1;
      c.group_type(g, data.docs[r][i]) += 1;
      c.group_totals[g] += 1;
    }
  return c;
}

// Dirichlet-multinomial draws using the standard library generators.
inline assemblage::Matrix<int> dirichlet_multinomial(
    const std::vector<double>& alpha, std::size_t rows, int n,
    std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  assemblage::Matrix<int> out(rows, alpha.size());
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> theta;
    double sum = 0.0;
    for (double a : alpha) {
      theta.push_back(std::gamma_distribution<double>(a, 1.0)(gen));
      sum += theta.back();
    }
    for (auto& t : theta) t /= sum;
    std::discrete_distribution<int> draw(theta.begin(), theta.end());
    for (int i = 0; i < n; ++i) out(r, draw(gen)) += 1;
  }
  return out;
}

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1.0;
      if (v[j] == v[i]) equal += 1.0;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double spearman(const std::vector<double>& a,
                       const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracles
