#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqgp/gauges.hpp"
#include "seqgp/kernels.hpp"
#include "seqgp/regress.hpp"
#include "seqgp/seqspace.hpp"

namespace seqgp {

/// Every dense object for one (space, kernel, gauge), in canonical orders.
/// Single-threaded; small spaces only.
struct DenseWorkspace {
  SequenceSpace space;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd kernel;
  Eigen::MatrixXd projection;
  Eigen::MatrixXd penalty;      // empty when the gauge is trivial (eta = 0)
  Eigen::MatrixXd regularizer;  // empty when the gauge is trivial (eta = 0)

  DenseWorkspace(const SequenceSpace& space, const KernelFunction& k, const GaugeSpec& gauge);
};

/// Posterior of M f with every matrix formed densely. `m` is j x alpha^l and
/// `k` is the full alpha^l x alpha^l kernel.
GaussianPosterior dense_transform_posterior(const SequenceSpace& space, const Eigen::MatrixXd& m,
                                            const Eigen::MatrixXd& k, const TrainingData& data);

/// Dense P (restricted to full-length columns) applied to the dense GP
/// posterior over all sequences: the gauge-fixed weights on `subsequences`.
GaussianPosterior dense_gauge_weight_posterior(const SequenceSpace& space, const GaugeSpec& gauge,
                                               const Eigen::MatrixXd& k, const TrainingData& data,
                                               const std::vector<Subsequence>& subsequences);

/// max |v^T Lambda g| over v in a basis of the gauge (columns of P) and g in
/// a basis of the null space of Phi.
double check_orthogonality(const SequenceSpace& space, const Eigen::MatrixXd& lambda,
                           const GaugeSpec& gauge);

/// Columns are independent draws from N(mean, cov). Uses a symmetric
/// eigendecomposition so singular covariances are fine.
Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, int n,
                                std::mt19937_64& rng);
Eigen::MatrixXd sample_function_prior(const Eigen::MatrixXd& k, int n, std::mt19937_64& rng);
Eigen::MatrixXd sample_weight_prior(const Eigen::MatrixXd& w, int n, std::mt19937_64& rng);

/// Neighborhoods are 0-based position sets; neighborhood p must contain p.
/// Identical neighborhoods are counted once.
std::vector<Subsequence> gnk_subsequences(const SequenceSpace& space,
                                          const std::vector<std::vector<int>>& neighborhoods);
/// Columns are GNK landscapes Phi w, with w_(N,s) ~ N(0, 1/|N|).
Eigen::MatrixXd gnk_sample(const SequenceSpace& space,
                           const std::vector<std::vector<int>>& neighborhoods, int n,
                           std::mt19937_64& rng);
/// Phi Lambda^{-1} Phi^T of the GNK diagonal prior.
Eigen::MatrixXd gnk_covariance(const SequenceSpace& space,
                               const std::vector<std::vector<int>>& neighborhoods);

/// P_k = alpha^{-l} [K_k(d(x,y))], k = 0..l.
std::vector<Eigen::MatrixXd> spectral_projectors(const SequenceSpace& space);

/// Bi-allelic bases with columns indexed by position mask: H_{x,S} = prod
/// (+1 for allele 0, -1 for allele 1) and T_{x,S} = prod [x_p = 1].
Eigen::MatrixXd dense_wh_basis(const SequenceSpace& space);
Eigen::MatrixXd dense_wt_basis(const SequenceSpace& space);
/// Diagonal of prod_{p in S} rho_p over masks.
Eigen::VectorXd biallelic_regularizer(const std::vector<double>& rho);

/// Phi Lambda^{-1} Phi^T for a diagonal Lambda over subsequences.
Eigen::MatrixXd dense_induced_kernel(const SequenceSpace& space, const Eigen::VectorXd& lambda_diag);

// ---------------------------------------------------------------------------
// Conformance suite
// ---------------------------------------------------------------------------

struct ConformanceResult {
  std::string name;
  int trials = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ConformanceReport {
  std::uint64_t seed = 0;
  std::vector<ConformanceResult> results;
  bool all_passed() const;
};

constexpr std::uint64_t kDefaultSeed = 20240917;

/// Compares every closed form against its dense oracle on random instances
/// over alpha, l in {2, 3}.
ConformanceReport run_conformance(std::uint64_t seed = kDefaultSeed, int trials = 20);

}  // namespace seqgp

namespace seqgp {

/// Transform rows evaluated straight from their defining formulas, one dense
/// entry at a time (no factor tables).
Eigen::MatrixXd dense_table_transform(const SequenceSpace& space, const TransformSpec& spec,
                                      const std::vector<Subsequence>& indices);

/// Random instances for randomized comparisons.
ProductKernel random_product_kernel(int alpha, int length, std::mt19937_64& rng);
VcKernel random_vc_kernel(const SequenceSpace& space, std::mt19937_64& rng);
ProductDistribution random_distribution(int alpha, int length, std::mt19937_64& rng);
Sequence random_sequence(const SequenceSpace& space, std::mt19937_64& rng);
TrainingData random_training_data(const SequenceSpace& space, std::size_t count, double noise_variance,
                         std::mt19937_64& rng);
ConnectednessSpec random_connectedness(int alpha, int length, std::mt19937_64& rng);
JengaSpec random_jenga(int alpha, int length, std::mt19937_64& rng);

}  // namespace seqgp
