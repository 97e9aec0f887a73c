#include "seqgp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seqgp/errors.hpp"
#include "seqgp/linalg.hpp"

namespace seqgp {

DenseWorkspace::DenseWorkspace(const SequenceSpace& sp, const KernelFunction& k,
                               const GaugeSpec& gauge)
    : space(sp) {
  space.require_dense();
  space.require_dense_weights();
  phi = phi_dense(space);
  kernel = dense_kernel(space, k);
  projection = dense_projection(space, gauge);
  if (gauge.eta > 0.0) {
    penalty = Eigen::MatrixXd(sparse_penalty(space, gauge));
    regularizer = phi.transpose() * SpdFactor(kernel).solve(phi) + penalty;
    regularizer = 0.5 * (regularizer + regularizer.transpose());
  }
}

GaussianPosterior dense_transform_posterior(const SequenceSpace& space, const Eigen::MatrixXd& m,
                                            const Eigen::MatrixXd& k, const TrainingData& data) {
  space.require_dense();
  data.validate();
  const auto n = static_cast<Eigen::Index>(space.sequence_count());
  if (k.rows() != n || k.cols() != n || m.cols() != n) {
    throw DimensionError("dense transform posterior: shape mismatch");
  }
  const auto t = static_cast<Eigen::Index>(data.X.size());
  Eigen::MatrixXd k_all_x(n, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    k_all_x.col(i) = k.col(static_cast<Eigen::Index>(space.index_of(data.X[static_cast<std::size_t>(i)])));
  }
  Eigen::MatrixXd kxx(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    kxx.row(i) = k_all_x.row(static_cast<Eigen::Index>(space.index_of(data.X[static_cast<std::size_t>(i)])));
  }
  kxx.diagonal().array() += data.noise_variance;

  GaussianPosterior out;
  const Eigen::MatrixXd mk = m * k_all_x;
  Eigen::MatrixXd cov = m * k * m.transpose();
  if (t == 0) {
    out.mean = Eigen::VectorXd::Zero(m.rows());
  } else {
    SpdFactor factor(kxx);
    out.jitter = factor.jitter();
    out.mean = mk * factor.solve(data.y);
    cov -= mk * factor.solve(Eigen::MatrixXd(mk.transpose()));
  }
  cov = 0.5 * (cov + cov.transpose());
  out.variance = cov.diagonal();
  out.covariance = std::move(cov);
  return out;
}

GaussianPosterior dense_gauge_weight_posterior(const SequenceSpace& space, const GaugeSpec& gauge,
                                               const Eigen::MatrixXd& k, const TrainingData& data,
                                               const std::vector<Subsequence>& subsequences) {
  const Eigen::MatrixXd p = dense_projection(space, gauge);
  const auto seqs = space.enumerate();
  const auto n = static_cast<Eigen::Index>(seqs.size());
  Subsequence full;
  for (int q = 0; q < space.length(); ++q) full.positions.push_back(q);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(subsequences.size()), n);
  for (std::size_t i = 0; i < subsequences.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(space.index_of(subsequences[i]));
    for (Eigen::Index x = 0; x < n; ++x) {
      full.chars = seqs[static_cast<std::size_t>(x)].chars;
      m(static_cast<Eigen::Index>(i), x) = p(row, static_cast<Eigen::Index>(space.index_of(full)));
    }
  }
  auto out = dense_transform_posterior(space, m, k, data);
  for (const auto& sub : subsequences) out.labels.push_back(space.format(sub));
  return out;
}

double check_orthogonality(const SequenceSpace& space, const Eigen::MatrixXd& lambda,
                           const GaugeSpec& gauge) {
  const Eigen::MatrixXd v = column_space(dense_projection(space, gauge));
  const Eigen::MatrixXd g = null_space(phi_dense(space));
  if (lambda.rows() != v.rows() || lambda.cols() != v.rows()) {
    throw DimensionError("orthogonality check: regularizer shape mismatch");
  }
  const Eigen::MatrixXd form = v.transpose() * lambda * g;
  return form.size() == 0 ? 0.0 : form.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, int n,
                                std::mt19937_64& rng) {
  if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
    throw DimensionError("sample_gaussian: shape mismatch");
  }
  if (n < 0) throw DomainError("sample count must be nonnegative");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw NumericalError("covariance is not positive semidefinite");
  }
  const Eigen::MatrixXd root =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(mean.size(), n);
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
  }
  Eigen::MatrixXd out = root * z;
  out.colwise() += mean;
  return out;
}

Eigen::MatrixXd sample_function_prior(const Eigen::MatrixXd& k, int n, std::mt19937_64& rng) {
  return sample_gaussian(Eigen::VectorXd::Zero(k.rows()), k, n, rng);
}

Eigen::MatrixXd sample_weight_prior(const Eigen::MatrixXd& w, int n, std::mt19937_64& rng) {
  return sample_gaussian(Eigen::VectorXd::Zero(w.rows()), w, n, rng);
}

std::vector<Subsequence> gnk_subsequences(const SequenceSpace& space,
                                          const std::vector<std::vector<int>>& neighborhoods) {
  if (static_cast<int>(neighborhoods.size()) != space.length()) {
    throw DimensionError("GNK needs one neighborhood per position");
  }
  std::set<std::uint64_t> masks;
  for (std::size_t p = 0; p < neighborhoods.size(); ++p) {
    std::uint64_t mask = 0;
    for (int q : neighborhoods[p]) {
      if (q < 0 || q >= space.length()) throw DomainError("GNK neighborhood position out of range");
      mask |= std::uint64_t{1} << q;
    }
    if (!(mask & (std::uint64_t{1} << p))) {
      throw DomainError("GNK neighborhood " + std::to_string(p + 1) + " must contain its own position");
    }
    masks.insert(mask);
  }
  std::vector<Subsequence> out;
  for (std::uint64_t mask : masks) {
    for (auto& sub : space.subsequences_on(mask)) out.push_back(std::move(sub));
  }
  return out;
}

Eigen::MatrixXd gnk_sample(const SequenceSpace& space,
                           const std::vector<std::vector<int>>& neighborhoods, int n,
                           std::mt19937_64& rng) {
  space.require_dense();
  if (n < 0) throw DomainError("sample count must be nonnegative");
  const auto subs = gnk_subsequences(space, neighborhoods);
  const auto seqs = space.enumerate();
  Eigen::MatrixXd features(static_cast<Eigen::Index>(seqs.size()), static_cast<Eigen::Index>(subs.size()));
  Eigen::VectorXd sd(static_cast<Eigen::Index>(subs.size()));
  for (std::size_t j = 0; j < subs.size(); ++j) {
    sd(static_cast<Eigen::Index>(j)) = 1.0 / std::sqrt(static_cast<double>(subs[j].order()));
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          subseq_indicator(seqs[i], subs[j]) ? 1.0 : 0.0;
    }
  }
  std::normal_distribution<double> normal;
  Eigen::MatrixXd w(static_cast<Eigen::Index>(subs.size()), n);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = sd(r) * normal(rng);
  }
  return features * w;
}

Eigen::MatrixXd gnk_covariance(const SequenceSpace& space,
                               const std::vector<std::vector<int>>& neighborhoods) {
  space.require_dense_weights();
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(space.subsequence_count()), std::numeric_limits<double>::infinity());
  for (const auto& sub : gnk_subsequences(space, neighborhoods)) {
    diag(static_cast<Eigen::Index>(space.index_of(sub))) = static_cast<double>(sub.order());
  }
  return dense_induced_kernel(space, diag);
}

std::vector<Eigen::MatrixXd> spectral_projectors(const SequenceSpace& space) {
  space.require_dense();
  const auto seqs = space.enumerate();
  const auto n = static_cast<Eigen::Index>(seqs.size());
  const double scale = std::pow(static_cast<double>(space.alpha()), -space.length());
  std::vector<Eigen::MatrixXd> out;
  for (int k = 0; k <= space.length(); ++k) {
    Eigen::MatrixXd pk(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const int d = hamming(seqs[static_cast<std::size_t>(i)], seqs[static_cast<std::size_t>(j)]);
        pk(i, j) = scale * static_cast<double>(krawtchouk(k, d, space.length(), space.alpha()));
      }
    }
    out.push_back(std::move(pk));
  }
  return out;
}

namespace {

Eigen::MatrixXd biallelic_basis(const SequenceSpace& space, bool walsh) {
  if (space.alpha() != 2) throw DomainError("bi-allelic bases require alpha = 2");
  space.require_dense();
  const auto seqs = space.enumerate();
  const auto masks = std::uint64_t{1} << space.length();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(seqs.size()), static_cast<Eigen::Index>(masks));
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
      double v = 1.0;
      for (int p = 0; p < space.length(); ++p) {
        if (!(mask & (std::uint64_t{1} << p))) continue;
        const int c = seqs[i][static_cast<std::size_t>(p)];
        v *= walsh ? (c == 0 ? 1.0 : -1.0) : (c == 1 ? 1.0 : 0.0);
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(mask)) = v;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd dense_wh_basis(const SequenceSpace& space) { return biallelic_basis(space, true); }
Eigen::MatrixXd dense_wt_basis(const SequenceSpace& space) { return biallelic_basis(space, false); }

Eigen::VectorXd biallelic_regularizer(const std::vector<double>& rho) {
  const auto masks = std::uint64_t{1} << rho.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(masks));
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    double v = 1.0;
    for (std::size_t p = 0; p < rho.size(); ++p) {
      if (mask & (std::uint64_t{1} << p)) v *= rho[p];
    }
    out(static_cast<Eigen::Index>(mask)) = v;
  }
  return out;
}

Eigen::MatrixXd dense_induced_kernel(const SequenceSpace& space, const Eigen::VectorXd& lambda_diag) {
  const Eigen::MatrixXd phi = phi_dense(space);
  if (lambda_diag.size() != phi.cols()) throw DimensionError("regularizer diagonal length mismatch");
  Eigen::VectorXd inv(lambda_diag.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (!(lambda_diag(i) > 0.0)) throw DomainError("diagonal regularizer entries must be > 0");
    inv(i) = std::isinf(lambda_diag(i)) ? 0.0 : 1.0 / lambda_diag(i);
  }
  return phi * inv.asDiagonal() * phi.transpose();
}

bool ConformanceReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

}  // namespace seqgp

namespace seqgp {

Eigen::MatrixXd dense_table_transform(const SequenceSpace& space, const TransformSpec& spec,
                                      const std::vector<Subsequence>& indices) {
  validate(space, spec);
  const auto seqs = space.enumerate();
  const int l = space.length();
  const double alpha = space.alpha();
  Sequence ref = spec.reference ? *spec.reference
                                : Sequence{std::vector<int>(static_cast<std::size_t>(l), 0)};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(seqs.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Subsequence& sub = indices[i];
    if (!is_valid_index(space, spec, sub)) throw IndexError("invalid index for the transform kind");
    for (std::size_t n = 0; n < seqs.size(); ++n) {
      const Sequence& x = seqs[n];
      double v = 1.0;
      for (int p = 0; p < l; ++p) {
        const int xp = x[static_cast<std::size_t>(p)];
        const int s = sub.char_at(p);
        const bool in = s >= 0;
        const double match = (xp == s) ? 1.0 : 0.0;
        const double at_ref = (xp == ref[static_cast<std::size_t>(p)]) ? 1.0 : 0.0;
        switch (spec.kind) {
          case TransformKind::GaugeWeights: {
            const double q = spec.gauge->pi(p, xp) * spec.gauge->eta;
            v *= in ? match - q : q;
            break;
          }
          case TransformKind::Hierarchical: {
            const double q = spec.gauge->pi(p, xp);
            v *= in ? match - q : q;
            break;
          }
          case TransformKind::ZeroSum:
            v *= in ? match - 1.0 / alpha : 1.0 / alpha;
            break;
          case TransformKind::WildType:
            v *= in ? match - at_ref : at_ref;
            break;
          case TransformKind::BackgroundAveraged:
            v *= in ? match - at_ref : 1.0 / alpha;
            break;
          case TransformKind::Fourier:
            if (in) v *= at_ref - (1.0 - at_ref) / (std::sqrt(alpha) - 1.0) + std::sqrt(alpha) * match;
            break;
          case TransformKind::WalshHadamard:
            if (in) v *= at_ref - (1.0 - at_ref);
            break;
        }
      }
      if (spec.kind == TransformKind::Fourier || spec.kind == TransformKind::WalshHadamard) {
        v /= std::sqrt(std::pow(alpha, l));
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = v;
    }
  }
  return out;
}

ProductKernel random_product_kernel(int alpha, int length, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<Eigen::MatrixXd> blocks;
  for (int p = 0; p < length; ++p) {
    Eigen::MatrixXd b(alpha, alpha);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = normal(rng);
    Eigen::MatrixXd block = b * b.transpose() / alpha;
    block.diagonal().array() += 0.3;
    blocks.push_back(0.5 * (block + block.transpose()));
  }
  return ProductKernel(std::move(blocks));
}

VcKernel random_vc_kernel(const SequenceSpace& space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.2, 2.0);
  std::vector<double> lambdas(static_cast<std::size_t>(space.length() + 1));
  for (auto& v : lambdas) v = unit(rng);
  return VcKernel(space, std::move(lambdas));
}

ProductDistribution random_distribution(int alpha, int length, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  Eigen::MatrixXd probs(length, alpha);
  for (int p = 0; p < length; ++p) {
    for (int c = 0; c < alpha; ++c) probs(p, c) = unit(rng);
    probs.row(p) /= probs.row(p).sum();
  }
  return ProductDistribution(std::move(probs));
}

Sequence random_sequence(const SequenceSpace& space, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, space.alpha() - 1);
  Sequence x;
  for (int p = 0; p < space.length(); ++p) x.chars.push_back(pick(rng));
  return x;
}

TrainingData random_training_data(const SequenceSpace& space, std::size_t count, double noise_variance,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  TrainingData data;
  data.noise_variance = noise_variance;
  data.y.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    data.X.push_back(random_sequence(space, rng));
    data.y(static_cast<Eigen::Index>(i)) = normal(rng);
  }
  return data;
}

ConnectednessSpec random_connectedness(int alpha, int length, std::mt19937_64& rng) {
  const double lower = -1.0 / (alpha - 1);
  std::uniform_real_distribution<double> unit(0.8 * lower, 0.8);
  ConnectednessSpec spec;
  for (int p = 0; p < length; ++p) spec.z.push_back(unit(rng));
  return spec;
}

JengaSpec random_jenga(int alpha, int length, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  std::bernoulli_distribution coin(0.5);
  JengaSpec spec;
  for (int p = 0; p < length; ++p) {
    Eigen::VectorXd z(alpha);
    for (int c = 0; c < alpha; ++c) z(c) = unit(rng);
    if (coin(rng)) {
      spec.signs.push_back(1);
    } else {
      spec.signs.push_back(-1);
      // Rescale so that sum z^2/(1+z^2) stays at or below 0.8.
      while ((z.array().square() / (1.0 + z.array().square())).sum() > 0.8) z *= 0.9;
    }
    spec.factors.push_back(std::move(z));
  }
  return spec;
}

}  // namespace seqgp
