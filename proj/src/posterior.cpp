#include "seqgp/posterior.hpp"

#include <algorithm>
#include <thread>

#include "seqgp/errors.hpp"

namespace seqgp {

namespace {

void check_row(const TransformRow& row, const ProductKernel& k) {
  if (row.factors.rows() != k.length() || row.factors.cols() != k.alpha()) {
    throw DimensionError("transform row '" + row.label + "' does not match the kernel shape");
  }
}

/// Runs body(i) for i in [0, n), split into contiguous chunks. Each index is
/// written by exactly one worker, so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Assembles mean and (co)variance from the prior block and the j x t cross
/// matrix C = (M K)_{*,X}: mean = C Q y, cov = prior - C Q C^T.
template <typename PriorEntry>
GaussianPosterior assemble(std::size_t j, const Eigen::MatrixXd& cross, const FittedGp& gp,
                           const PosteriorOptions& options, PriorEntry prior) {
  GaussianPosterior out;
  out.jitter = gp.jitter();
  const auto n = static_cast<Eigen::Index>(j);
  out.mean = gp.empty() ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(cross * gp.weights());
  const Eigen::MatrixXd qct = gp.solve(cross.transpose());
  if (options.want_covariance) {
    Eigen::MatrixXd cov(n, n);
    parallel_for(j, options.threads, [&](std::size_t i) {
      for (std::size_t k = i; k < j; ++k) {
        const auto a = static_cast<Eigen::Index>(i);
        const auto b = static_cast<Eigen::Index>(k);
        double v = prior(i, k);
        if (!gp.empty()) v -= cross.row(a).dot(qct.col(b));
        cov(a, b) = v;
      }
    });
    cov.triangularView<Eigen::StrictlyLower>() = cov.transpose().triangularView<Eigen::StrictlyLower>();
    out.variance = cov.diagonal();
    out.covariance = std::move(cov);
  } else {
    out.variance.resize(n);
    parallel_for(j, options.threads, [&](std::size_t i) {
      const auto a = static_cast<Eigen::Index>(i);
      double v = prior(i, i);
      if (!gp.empty()) v -= cross.row(a).dot(qct.col(a));
      out.variance(a) = v;
    });
  }
  return out;
}

}  // namespace

double mk_row(const TransformRow& row, const ProductKernel& k, const Sequence& y) {
  check_row(row, k);
  if (static_cast<int>(y.size()) != k.length()) throw DimensionError("mk_row: sequence length mismatch");
  double v = 1.0;
  for (int p = 0; p < k.length(); ++p) {
    v *= row.factors.row(p).dot(k.block(p).col(y[static_cast<std::size_t>(p)]));
  }
  return v;
}

double mkmt_entry(const TransformRow& a, const TransformRow& b, const ProductKernel& k) {
  check_row(a, k);
  check_row(b, k);
  double v = 1.0;
  for (int p = 0; p < k.length(); ++p) {
    v *= a.factors.row(p) * k.block(p) * b.factors.row(p).transpose();
  }
  return v;
}

GaussianPosterior transform_posterior(const TransformPosteriorRequest& req) {
  const auto& rows = req.transform.rows;
  if (rows.empty()) throw DimensionError("transform has no rows");
  const ProductKernel& kernel = req.kernel;
  for (const auto& x : req.data.X) {
    if (static_cast<int>(x.size()) != kernel.length()) {
      throw DimensionError("training sequence length does not match the kernel");
    }
  }
  FittedGp gp(as_function(kernel), req.data, req.options.jitter);
  const std::size_t j = rows.size();
  const std::size_t t = req.data.X.size();
  Eigen::MatrixXd cross(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t));
  parallel_for(j, req.options.threads, [&](std::size_t i) {
    for (std::size_t x = 0; x < t; ++x) {
      cross(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x)) =
          mk_row(rows[i], kernel, req.data.X[x]);
    }
  });
  auto out = assemble(j, cross, gp, req.options, [&](std::size_t a, std::size_t b) {
    return mkmt_entry(rows[a], rows[b], kernel);
  });
  for (const auto& row : rows) out.labels.push_back(row.label);
  return out;
}

GaussianPosterior gauge_weight_posterior(const SequenceSpace& space, const GaugeSpec& gauge,
                                         const ProductKernel& kernel, const TrainingData& data,
                                         const std::vector<Subsequence>& subsequences,
                                         const PosteriorOptions& options) {
  if (subsequences.empty()) throw DimensionError("no subsequences requested");
  const int l = space.length();
  const int alpha = space.alpha();
  if (kernel.length() != l || kernel.alpha() != alpha || gauge.pi.length() != l ||
      gauge.pi.alpha() != alpha) {
    throw DimensionError("gauge, kernel and sequence space shapes disagree");
  }
  for (const auto& sub : subsequences) space.validate(sub);
  for (const auto& x : data.X) space.validate(x);

  const double eta = gauge.eta;
  // zeta(p, c) and zeta_bar(p).
  Eigen::MatrixXd zeta(l, alpha);
  Eigen::VectorXd zeta_bar(l);
  for (int p = 0; p < l; ++p) {
    const Eigen::VectorXd pi = gauge.pi.probs().row(p).transpose();
    zeta.row(p) = (eta * (kernel.block(p) * pi)).transpose();
    zeta_bar(p) = eta * eta * pi.dot(kernel.block(p) * pi);
  }

  FittedGp gp(as_function(kernel), data, options.jitter);
  const std::size_t j = subsequences.size();
  const std::size_t t = data.X.size();
  std::vector<std::vector<int>> chars(j, std::vector<int>(static_cast<std::size_t>(l), -1));
  for (std::size_t i = 0; i < j; ++i) {
    const auto& sub = subsequences[i];
    for (std::size_t k = 0; k < sub.positions.size(); ++k) {
      chars[i][static_cast<std::size_t>(sub.positions[k])] = sub.chars[k];
    }
  }

  Eigen::MatrixXd z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t));
  parallel_for(j, options.threads, [&](std::size_t i) {
    for (std::size_t n = 0; n < t; ++n) {
      const Sequence& x = data.X[n];
      double v = 1.0;
      for (int p = 0; p < l; ++p) {
        const int xp = x[static_cast<std::size_t>(p)];
        const int sp = chars[i][static_cast<std::size_t>(p)];
        v *= sp >= 0 ? kernel.block(p)(xp, sp) - zeta(p, xp) : zeta(p, xp);
      }
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = v;
    }
  });

  auto prior = [&](std::size_t a, std::size_t b) {
    double v = 1.0;
    for (int p = 0; p < l; ++p) {
      const int s = chars[a][static_cast<std::size_t>(p)];
      const int u = chars[b][static_cast<std::size_t>(p)];
      if (s >= 0 && u >= 0) {
        v *= zeta_bar(p) - zeta(p, s) - zeta(p, u) + kernel.block(p)(s, u);
      } else if (s >= 0) {
        v *= zeta(p, s) - zeta_bar(p);
      } else if (u >= 0) {
        v *= zeta(p, u) - zeta_bar(p);
      } else {
        v *= zeta_bar(p);
      }
    }
    return v;
  };
  auto out = assemble(j, z, gp, options, prior);
  for (const auto& sub : subsequences) out.labels.push_back(space.format(sub));
  return out;
}

}  // namespace seqgp
