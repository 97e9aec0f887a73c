#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqgp/gauges.hpp"
#include "seqgp/kernels.hpp"
#include "seqgp/linalg.hpp"
#include "seqgp/seqspace.hpp"

namespace seqgp {

struct TrainingData {
  std::vector<Sequence> X;  // duplicates are kept as separate observations
  Eigen::VectorXd y;
  double noise_variance = 1.0;

  std::size_t size() const { return X.size(); }
  /// Throws DataError on shape mismatch, non-finite values or noise_variance <= 0.
  void validate() const;
};

struct GaussianPosterior {
  std::vector<std::string> labels;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  std::optional<Eigen::MatrixXd> covariance;
  double jitter = 0.0;  // diagonal jitter applied to K_XX + noise I
};

/// A GP conditioned on training data: the factorization of K_XX + noise I and
/// Q y, shared by every query against the same data.
class FittedGp {
 public:
  FittedGp(const KernelFunction& k, const TrainingData& data, const JitterPolicy& policy = {});

  const TrainingData& data() const { return data_; }
  bool empty() const { return data_.X.empty(); }
  double jitter() const { return factor_ ? factor_->jitter() : 0.0; }
  /// Q y.
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Q rhs, rhs with |X| rows.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  TrainingData data_;
  std::optional<SpdFactor> factor_;
  Eigen::VectorXd weights_;
};

/// Posterior over function values at `query`; with empty data this is the prior.
GaussianPosterior gp_posterior(const KernelFunction& k, const TrainingData& data,
                               const std::vector<Sequence>& query, bool want_covariance = true,
                               const JitterPolicy& policy = {});

/// K over the whole space in canonical order.
Eigen::MatrixXd dense_kernel(const SequenceSpace& space, const KernelFunction& k);

/// argmin |y - Phi_X w|^2 + beta w^T Lambda w.
Eigen::VectorXd ridge_weights(const SequenceSpace& space, const Eigen::MatrixXd& lambda,
                              const TrainingData& data, double beta);

/// argmin |y - f_X|^2 + beta f^T Delta f over the whole function vector.
Eigen::VectorXd ridge_function(const SequenceSpace& space, const Eigen::MatrixXd& delta,
                               const TrainingData& data, double beta);

/// Weight posterior under w ~ N(0, W).
GaussianPosterior bayes_weight_posterior(const SequenceSpace& space, const Eigen::MatrixXd& w,
                                         const TrainingData& data);
/// Same posterior with the prior given by its precision W^{-1}.
GaussianPosterior bayes_weight_posterior_from_precision(const SequenceSpace& space,
                                                        const Eigen::MatrixXd& precision,
                                                        const TrainingData& data);

/// Phi^T K^{-1} Phi from a dense K.
Eigen::MatrixXd dense_phit_kinv_phi(const SequenceSpace& space, const Eigen::MatrixXd& k);

double phit_kinv_phi_vc(const VcKernel& k, const Subsequence& a, const Subsequence& b);
double phit_kinv_phi_product(const ProductKernel& k, const Subsequence& a, const Subsequence& b);
/// The product formula over explicit per-position block inverses.
double phit_kinv_phi_blocks(const std::vector<Eigen::MatrixXd>& inverses, const Subsequence& a,
                            const Subsequence& b);
double phit_kinv_phi_jenga(const JengaSpec& spec, const Subsequence& a, const Subsequence& b);
double phit_kinv_phi_connectedness(const ConnectednessSpec& spec, int alpha, const Subsequence& a,
                                   const Subsequence& b);
double phit_kinv_phi_geometric(const GeometricSpec& spec, const SequenceSpace& space,
                               const Subsequence& a, const Subsequence& b);

/// Lambda = Phi^T K^{-1} Phi + Z from a dense K.
Eigen::MatrixXd build_theta_regularizer(const SequenceSpace& space, const Eigen::MatrixXd& k,
                                        const GaugeSpec& gauge);
/// Lambda = Phi^T K^{-1} Phi + Z from the closed forms.
Eigen::MatrixXd build_theta_regularizer(const SequenceSpace& space, const AnyKernel& k,
                                        const GaugeSpec& gauge);

}  // namespace seqgp
