#include "seqgp/distribution.hpp"

#include <cmath>

#include "seqgp/errors.hpp"

namespace seqgp {

ProductDistribution::ProductDistribution(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 2) {
    throw DimensionError("product distribution needs >= 1 position and >= 2 characters");
  }
  if (!probs_.allFinite() || (probs_.array() < 0.0).any()) {
    throw DomainError("product distribution entries must be finite and nonnegative");
  }
  for (Eigen::Index p = 0; p < probs_.rows(); ++p) {
    const double total = probs_.row(p).sum();
    if (std::abs(total - 1.0) > 1e-12) {
      throw DomainError("product distribution row " + std::to_string(p + 1) + " sums to " +
                        std::to_string(total) + ", not 1");
    }
  }
}

ProductDistribution ProductDistribution::uniform(int alpha, int length) {
  return ProductDistribution(Eigen::MatrixXd::Constant(length, alpha, 1.0 / alpha));
}

ProductDistribution ProductDistribution::point_mass(const Sequence& reference, int alpha) {
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(reference.size()), alpha);
  for (std::size_t p = 0; p < reference.size(); ++p) {
    if (reference[p] < 0 || reference[p] >= alpha) {
      throw DomainError("point-mass reference character out of range");
    }
    probs(static_cast<Eigen::Index>(p), reference[p]) = 1.0;
  }
  return ProductDistribution(std::move(probs));
}

bool ProductDistribution::is_point_mass() const {
  for (Eigen::Index p = 0; p < probs_.rows(); ++p) {
    if (probs_.row(p).maxCoeff() != 1.0) return false;
  }
  return true;
}

Sequence ProductDistribution::mode() const {
  Sequence x;
  for (Eigen::Index p = 0; p < probs_.rows(); ++p) {
    Eigen::Index c;
    probs_.row(p).maxCoeff(&c);
    x.chars.push_back(static_cast<int>(c));
  }
  return x;
}

}  // namespace seqgp
