#pragma once

#include <vector>

#include <Eigen/Dense>

namespace seqgp {

/// Diagonal jitter values tried in order before a factorization is declared
/// failed.
struct JitterPolicy {
  std::vector<double> ladder{0.0, 1e-12, 1e-10, 1e-8};
};

/// Cholesky factorization of a symmetric positive-definite matrix, retried
/// along a jitter ladder. Immutable once computed.
class SpdFactor {
 public:
  explicit SpdFactor(const Eigen::MatrixXd& a, const JitterPolicy& policy = {});

  Eigen::Index size() const { return size_; }
  /// The diagonal jitter that was actually added.
  double jitter() const { return jitter_; }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd inverse() const;
  /// Lower-triangular L with L L^T = A + jitter I.
  Eigen::MatrixXd lower() const;

 private:
  Eigen::Index size_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Basis (as columns) of the null space of `a`, using singular values below
/// rel_tol * sigma_max.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

/// Orthonormal basis of the column space of `a`, same tolerance rule.
Eigen::MatrixXd column_space(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

bool is_symmetric(const Eigen::MatrixXd& a, double tol);

}  // namespace seqgp
