#include "seqgp/regress.hpp"

#include <cmath>

#include "seqgp/errors.hpp"

namespace seqgp {

void TrainingData::validate() const {
  if (static_cast<Eigen::Index>(X.size()) != y.size()) {
    throw DataError("training data has " + std::to_string(X.size()) + " sequences but " +
                    std::to_string(y.size()) + " values");
  }
  if (!y.allFinite()) throw DataError("training values must be finite");
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw DataError("noise variance must be finite and > 0");
  }
}

FittedGp::FittedGp(const KernelFunction& k, const TrainingData& data, const JitterPolicy& policy)
    : data_(data) {
  data_.validate();
  if (data_.X.empty()) {
    weights_ = Eigen::VectorXd(0);
    return;
  }
  Eigen::MatrixXd kxx = kernel_matrix(k, data_.X, data_.X);
  kxx.diagonal().array() += data_.noise_variance;
  factor_.emplace(kxx, policy);
  weights_ = factor_->solve(data_.y);
}

Eigen::MatrixXd FittedGp::solve(const Eigen::MatrixXd& rhs) const {
  if (!factor_) return Eigen::MatrixXd(0, rhs.cols());
  return factor_->solve(rhs);
}

GaussianPosterior gp_posterior(const KernelFunction& k, const TrainingData& data,
                               const std::vector<Sequence>& query, bool want_covariance,
                               const JitterPolicy& policy) {
  FittedGp gp(k, data, policy);
  const auto q = static_cast<Eigen::Index>(query.size());
  GaussianPosterior out;
  out.jitter = gp.jitter();
  const Eigen::MatrixXd kqx = kernel_matrix(k, query, data.X);
  const Eigen::MatrixXd qkxq = gp.solve(kqx.transpose());
  out.mean = gp.empty() ? Eigen::VectorXd::Zero(q) : Eigen::VectorXd(kqx * gp.weights());
  if (want_covariance) {
    Eigen::MatrixXd cov = kernel_matrix(k, query, query);
    if (!gp.empty()) cov -= kqx * qkxq;
    cov = 0.5 * (cov + cov.transpose());
    out.variance = cov.diagonal();
    out.covariance = std::move(cov);
  } else {
    out.variance.resize(q);
    for (Eigen::Index i = 0; i < q; ++i) {
      const auto& x = query[static_cast<std::size_t>(i)];
      double v = k(x, x);
      if (!gp.empty()) v -= kqx.row(i).dot(qkxq.col(i));
      out.variance(i) = v;
    }
  }
  return out;
}

Eigen::MatrixXd dense_kernel(const SequenceSpace& space, const KernelFunction& k) {
  space.require_dense();
  const auto seqs = space.enumerate();
  return kernel_matrix(k, seqs, seqs);
}

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("ridge strength beta must be > 0");
}

void check_square(const Eigen::MatrixXd& m, std::uint64_t n, const char* what) {
  if (static_cast<std::uint64_t>(m.rows()) != n || static_cast<std::uint64_t>(m.cols()) != n) {
    throw DimensionError(std::string(what) + " has the wrong shape");
  }
}

}  // namespace

Eigen::VectorXd ridge_weights(const SequenceSpace& space, const Eigen::MatrixXd& lambda,
                              const TrainingData& data, double beta) {
  check_beta(beta);
  space.require_dense_weights();
  check_square(lambda, space.subsequence_count(), "regularizer");
  const Eigen::MatrixXd phi = phi_rows(space, data.X);
  const Eigen::MatrixXd system = phi.transpose() * phi + beta * lambda;
  return SpdFactor(system).solve(Eigen::VectorXd(phi.transpose() * data.y));
}

Eigen::VectorXd ridge_function(const SequenceSpace& space, const Eigen::MatrixXd& delta,
                               const TrainingData& data, double beta) {
  check_beta(beta);
  space.require_dense();
  check_square(delta, space.sequence_count(), "function-space penalty");
  Eigen::MatrixXd system = beta * delta;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(delta.rows());
  for (std::size_t i = 0; i < data.X.size(); ++i) {
    const auto x = static_cast<Eigen::Index>(space.index_of(data.X[i]));
    system(x, x) += 1.0;
    rhs(x) += data.y(static_cast<Eigen::Index>(i));
  }
  return SpdFactor(system).solve(rhs);
}

GaussianPosterior bayes_weight_posterior_from_precision(const SequenceSpace& space,
                                                        const Eigen::MatrixXd& precision,
                                                        const TrainingData& data) {
  data.validate();
  space.require_dense_weights();
  check_square(precision, space.subsequence_count(), "weight prior precision");
  const Eigen::MatrixXd phi = phi_rows(space, data.X);
  const double inv_noise = 1.0 / data.noise_variance;
  const Eigen::MatrixXd a = inv_noise * phi.transpose() * phi + precision;
  SpdFactor factor(a);
  GaussianPosterior out;
  out.mean = factor.solve(Eigen::VectorXd(inv_noise * (phi.transpose() * data.y)));
  Eigen::MatrixXd cov = factor.inverse();
  cov = 0.5 * (cov + cov.transpose());
  out.variance = cov.diagonal();
  out.covariance = std::move(cov);
  out.jitter = factor.jitter();
  for (const auto& sub : space.enumerate_subseq()) out.labels.push_back(space.format(sub));
  return out;
}

GaussianPosterior bayes_weight_posterior(const SequenceSpace& space, const Eigen::MatrixXd& w,
                                         const TrainingData& data) {
  space.require_dense_weights();
  check_square(w, space.subsequence_count(), "weight prior covariance");
  return bayes_weight_posterior_from_precision(space, SpdFactor(w).inverse(), data);
}

Eigen::MatrixXd dense_phit_kinv_phi(const SequenceSpace& space, const Eigen::MatrixXd& k) {
  space.require_dense();
  space.require_dense_weights();
  check_square(k, space.sequence_count(), "kernel matrix");
  const Eigen::MatrixXd phi = phi_dense(space);
  return phi.transpose() * SpdFactor(k).solve(phi);
}

namespace {

struct Overlap {
  int both = 0;      // |S intersect T|
  int mismatch = 0;  // positions of S intersect T where s and t differ
  int either = 0;    // |S union T|
};

Overlap overlap(const Subsequence& a, const Subsequence& b) {
  Overlap o;
  std::size_t i = 0, j = 0;
  while (i < a.positions.size() || j < b.positions.size()) {
    if (j == b.positions.size() || (i < a.positions.size() && a.positions[i] < b.positions[j])) {
      ++i;
    } else if (i == a.positions.size() || b.positions[j] < a.positions[i]) {
      ++j;
    } else {
      ++o.both;
      if (a.chars[i] != b.chars[j]) ++o.mismatch;
      ++i;
      ++j;
    }
    ++o.either;
  }
  return o;
}

}  // namespace

double phit_kinv_phi_vc(const VcKernel& k, const Subsequence& a, const Subsequence& b) {
  const int l = k.length();
  const int alpha = k.alpha();
  const Overlap o = overlap(a, b);
  const int free = l - o.both;
  double total = 0.0;
  for (int e = 0; e <= free; ++e) {
    total += static_cast<double>(binomial(free, e)) * std::pow(alpha - 1.0, e) *
             k.inverse_entry(o.mismatch + e);
  }
  return std::pow(static_cast<double>(alpha), l - o.either) * total;
}

double phit_kinv_phi_blocks(const std::vector<Eigen::MatrixXd>& inverses, const Subsequence& a,
                            const Subsequence& b) {
  double v = 1.0;
  for (int p = 0; p < static_cast<int>(inverses.size()); ++p) {
    const auto& inv = inverses[static_cast<std::size_t>(p)];
    const int s = a.char_at(p);
    const int t = b.char_at(p);
    if (s >= 0 && t >= 0) {
      v *= inv(s, t);
    } else if (s >= 0) {
      v *= inv.row(s).sum();
    } else if (t >= 0) {
      v *= inv.row(t).sum();
    } else {
      v *= inv.sum();
    }
  }
  return v;
}

double phit_kinv_phi_product(const ProductKernel& k, const Subsequence& a, const Subsequence& b) {
  std::vector<Eigen::MatrixXd> inverses;
  inverses.reserve(static_cast<std::size_t>(k.length()));
  for (int p = 0; p < k.length(); ++p) inverses.push_back(k.block_inverse(p));
  return phit_kinv_phi_blocks(inverses, a, b);
}

double phit_kinv_phi_jenga(const JengaSpec& spec, const Subsequence& a, const Subsequence& b) {
  validate(spec);
  std::vector<Eigen::MatrixXd> inverses;
  for (std::size_t p = 0; p < spec.signs.size(); ++p) {
    inverses.push_back(jenga_block_inverse(spec.signs[p], spec.factors[p]));
  }
  return phit_kinv_phi_blocks(inverses, a, b);
}

double phit_kinv_phi_connectedness(const ConnectednessSpec& spec, int alpha, const Subsequence& a,
                                   const Subsequence& b) {
  validate(spec, alpha);
  double v = 1.0;
  for (int p = 0; p < static_cast<int>(spec.z.size()); ++p) {
    const double z = spec.z[static_cast<std::size_t>(p)];
    v /= 1.0 + (alpha - 1) * z;
    const int s = a.char_at(p);
    const int t = b.char_at(p);
    if (s >= 0 && t >= 0) {
      v *= s == t ? (1.0 + (alpha - 2) * z) / (1.0 - z) : -z / (1.0 - z);
    } else if (s < 0 && t < 0) {
      v *= alpha;
    }
  }
  return v;
}

double phit_kinv_phi_geometric(const GeometricSpec& spec, const SequenceSpace& space,
                               const Subsequence& a, const Subsequence& b) {
  validate(spec);
  const double beta = spec.beta;
  const int alpha = space.alpha();
  const int l = space.length();
  const Overlap o = overlap(a, b);
  return std::pow(static_cast<double>(alpha), l - o.either) /
         std::pow(1.0 + (alpha - 1) * beta, l) *
         std::pow((1.0 + (alpha - 2) * beta) / (1.0 - beta), o.both - o.mismatch) *
         std::pow(-beta / (1.0 - beta), o.mismatch);
}

Eigen::MatrixXd build_theta_regularizer(const SequenceSpace& space, const Eigen::MatrixXd& k,
                                        const GaugeSpec& gauge) {
  gauge.ratio();
  Eigen::MatrixXd lambda = dense_phit_kinv_phi(space, k);
  lambda += Eigen::MatrixXd(sparse_penalty(space, gauge));
  return 0.5 * (lambda + lambda.transpose());
}

Eigen::MatrixXd build_theta_regularizer(const SequenceSpace& space, const AnyKernel& k,
                                        const GaugeSpec& gauge) {
  gauge.ratio();
  space.require_dense_weights();
  const auto subs = space.enumerate_subseq();
  const auto n = static_cast<Eigen::Index>(subs.size());
  Eigen::MatrixXd lambda(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const auto& a = subs[static_cast<std::size_t>(i)];
      const auto& b = subs[static_cast<std::size_t>(j)];
      const double v = std::visit(
          [&](const auto& kern) {
            using T = std::decay_t<decltype(kern)>;
            if constexpr (std::is_same_v<T, VcKernel>) {
              return phit_kinv_phi_vc(kern, a, b);
            } else {
              return phit_kinv_phi_product(kern, a, b);
            }
          },
          k);
      lambda(i, j) = v;
      lambda(j, i) = v;
    }
  }
  lambda += Eigen::MatrixXd(sparse_penalty(space, gauge));
  return lambda;
}

}  // namespace seqgp
