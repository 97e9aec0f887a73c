#pragma once

#include <vector>

#include <Eigen/Dense>

#include "seqgp/seqspace.hpp"

namespace seqgp {

/// A product distribution over sequences: one probability vector per position.
class ProductDistribution {
 public:
  /// Rows are positions, columns characters. Each row must be nonnegative and
  /// sum to 1 within 1e-12.
  explicit ProductDistribution(Eigen::MatrixXd probs);

  static ProductDistribution uniform(int alpha, int length);
  /// Point mass on `reference` (the wild-type style distribution).
  static ProductDistribution point_mass(const Sequence& reference, int alpha);

  int alpha() const { return static_cast<int>(probs_.cols()); }
  int length() const { return static_cast<int>(probs_.rows()); }
  double operator()(int p, int c) const { return probs_(p, c); }
  const Eigen::MatrixXd& probs() const { return probs_; }

  bool full_support() const { return (probs_.array() > 0.0).all(); }
  /// True when every position is a point mass.
  bool is_point_mass() const;
  /// The sequence carrying all the mass; only meaningful when is_point_mass().
  Sequence mode() const;

 private:
  Eigen::MatrixXd probs_;
};

}  // namespace seqgp
