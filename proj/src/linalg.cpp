#include "seqgp/linalg.hpp"

#include <cmath>
#include <sstream>

#include "seqgp/errors.hpp"

namespace seqgp {

SpdFactor::SpdFactor(const Eigen::MatrixXd& a, const JitterPolicy& policy) : size_(a.rows()) {
  if (a.rows() != a.cols()) throw DimensionError("SpdFactor: matrix is not square");
  if (!a.allFinite()) throw NumericalError("SpdFactor: matrix has non-finite entries");
  for (double jitter : policy.ladder) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    llt_.compute(shifted);
    if (llt_.info() == Eigen::Success && llt_.matrixLLT().diagonal().allFinite() &&
        (llt_.matrixLLT().diagonal().array() > 0.0).all()) {
      jitter_ = jitter;
      return;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  std::ostringstream msg;
  msg << "symmetric factorization failed after jitter ladder (n=" << a.rows();
  if (eig.info() == Eigen::Success && a.rows() > 0) {
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    msg << ", min eigenvalue=" << lo << ", max eigenvalue=" << hi;
    if (lo > 0) msg << ", condition=" << hi / lo;
  }
  msg << ")";
  throw NumericalError(msg.str());
}

Eigen::MatrixXd SpdFactor::solve(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != size_) throw DimensionError("SpdFactor::solve: rhs row mismatch");
  return llt_.solve(rhs);
}

Eigen::VectorXd SpdFactor::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != size_) throw DimensionError("SpdFactor::solve: rhs size mismatch");
  return llt_.solve(rhs);
}

Eigen::MatrixXd SpdFactor::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(size_, size_));
}

Eigen::MatrixXd SpdFactor::lower() const { return llt_.matrixL(); }

Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff;
  return svd.matrixV().rightCols(a.cols() - rank);
}

Eigen::MatrixXd column_space(const Eigen::MatrixXd& a, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double cutoff = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff;
  return svd.matrixU().leftCols(rank);
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

bool is_symmetric(const Eigen::MatrixXd& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace seqgp
