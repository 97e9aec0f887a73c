#pragma once

#include <vector>

#include <Eigen/Dense>

#include "seqgp/gauges.hpp"
#include "seqgp/kernels.hpp"
#include "seqgp/linalg.hpp"
#include "seqgp/regress.hpp"

namespace seqgp {

/// (MK)_{i,y} = prod_p sum_c m^{i,p}_c a^p_{c,y_p}.
double mk_row(const TransformRow& row, const ProductKernel& k, const Sequence& y);

/// (M K M^T)_{i,j} = prod_p sum_{c,c'} m^{i,p}_c m^{j,p}_{c'} a^p_{c,c'}.
double mkmt_entry(const TransformRow& a, const TransformRow& b, const ProductKernel& k);

struct PosteriorOptions {
  bool want_covariance = true;  // otherwise only per-coefficient variances
  int threads = 1;
  JitterPolicy jitter;
};

struct TransformPosteriorRequest {
  ProductKernel kernel;
  TrainingData data;
  FactorizedTransform transform;
  PosteriorOptions options;
};

/// Posterior of M f for f under the GP posterior, without forming any
/// alpha^l-sized object.
GaussianPosterior transform_posterior(const TransformPosteriorRequest& req);

/// Posterior of the gauge-fixed weights on `subsequences`, via the closed-form
/// zeta expressions for lambda-pi gauges and product kernels.
GaussianPosterior gauge_weight_posterior(const SequenceSpace& space, const GaugeSpec& gauge,
                                         const ProductKernel& kernel, const TrainingData& data,
                                         const std::vector<Subsequence>& subsequences,
                                         const PosteriorOptions& options = {});

}  // namespace seqgp
