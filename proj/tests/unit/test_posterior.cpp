#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "seqgp/errors.hpp"
#include "seqgp/oracle.hpp"
#include "seqgp/posterior.hpp"

using namespace seqgp;

namespace {

SequenceSpace make_space(int alpha, int length) {
  return SequenceSpace(std::string("abcdef").substr(0, static_cast<std::size_t>(alpha)), length);
}

TransformRow delta_row(const SequenceSpace& space, const Sequence& x) {
  TransformRow row{space.format(x), Subsequence::empty(), Eigen::MatrixXd::Zero(space.length(), space.alpha())};
  for (int p = 0; p < space.length(); ++p) row.factors(p, x[static_cast<std::size_t>(p)]) = 1.0;
  return row;
}

TrainingData empty_data(double noise = 1.0) {
  TrainingData d;
  d.y.resize(0);
  d.noise_variance = noise;
  return d;
}

std::vector<TransformSpec> kinds_for(const SequenceSpace& space, std::mt19937_64& rng) {
  const auto ref = random_sequence(space, rng);
  std::vector<TransformSpec> specs{
      {TransformKind::GaugeWeights, GaugeSpec(0.3, random_distribution(space.alpha(), space.length(), rng)), std::nullopt},
      {TransformKind::Hierarchical, GaugeSpec(1.0, random_distribution(space.alpha(), space.length(), rng)), std::nullopt},
      {TransformKind::ZeroSum, std::nullopt, std::nullopt},
      {TransformKind::WildType, std::nullopt, ref},
      {TransformKind::BackgroundAveraged, std::nullopt, ref},
      {TransformKind::Fourier, std::nullopt, ref},
  };
  if (space.alpha() == 2) specs.push_back({TransformKind::WalshHadamard, std::nullopt, std::nullopt});
  return specs;
}

}  // namespace

TEST(MkRow, DeltaRowSelectsKernelRow) {
  std::mt19937_64 rng(1);
  const auto space = make_space(3, 2);
  const auto k = random_product_kernel(3, 2, rng);
  for (const auto& x : space.enumerate()) {
    for (const auto& y : space.enumerate()) {
      EXPECT_NEAR(mk_row(delta_row(space, x), k, y), product_entry(k, x, y), 1e-15);
    }
  }
}

TEST(MkRow, ZeroSumEmptyRowIdentityBlocks) {
  const auto space = make_space(2, 1);
  const ProductKernel id({Eigen::MatrixXd::Identity(2, 2)});
  const TransformSpec zs{TransformKind::ZeroSum, std::nullopt, std::nullopt};
  const auto rows = transform_rows(space, zs, {Subsequence::empty(), space.parse_subsequence("1:a")});
  for (const auto& y : space.enumerate()) EXPECT_DOUBLE_EQ(mk_row(rows.rows[0], id, y), 0.5);
  EXPECT_DOUBLE_EQ(mkmt_entry(rows.rows[0], rows.rows[0], id), 0.5);
  EXPECT_DOUBLE_EQ(mkmt_entry(rows.rows[0], rows.rows[1], id), 0.0);
}

TEST(MkRow, MatchesDenseProducts) {
  std::mt19937_64 rng(3);
  for (int alpha = 2; alpha <= 3; ++alpha) {
    for (int l = 1; l <= 3; ++l) {
      const auto space = make_space(alpha, l);
      const auto k = random_product_kernel(alpha, l, rng);
      const Eigen::MatrixXd kd = dense_kernel(space, as_function(k));
      const auto seqs = space.enumerate();
      for (const auto& spec : kinds_for(space, rng)) {
        const auto m = transform_rows(space, spec, all_indices(space, spec));
        const Eigen::MatrixXd md = dense_transform(space, m);
        const Eigen::MatrixXd mk = md * kd;
        const Eigen::MatrixXd mkmt = mk * md.transpose();
        for (std::size_t i = 0; i < m.size(); ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          for (std::size_t y = 0; y < seqs.size(); ++y) {
            EXPECT_NEAR(mk_row(m.rows[i], k, seqs[y]), mk(ii, static_cast<Eigen::Index>(y)), 1e-12);
          }
          for (std::size_t j = 0; j < m.size(); ++j) {
            const double v = mkmt_entry(m.rows[i], m.rows[j], k);
            EXPECT_NEAR(v, mkmt(ii, static_cast<Eigen::Index>(j)), 1e-12);
            EXPECT_NEAR(v, mkmt_entry(m.rows[j], m.rows[i], k), 1e-14 * std::max(1.0, std::abs(v)));
          }
        }
      }
    }
  }
}

TEST(TransformPosterior, EmptyDataIsPrior) {
  std::mt19937_64 rng(5);
  const auto space = make_space(3, 2);
  const auto k = random_product_kernel(3, 2, rng);
  const TransformSpec zs{TransformKind::ZeroSum, std::nullopt, std::nullopt};
  const auto m = transform_rows(space, zs, all_indices(space, zs));
  const auto post = transform_posterior({k, empty_data(), m, {}});
  EXPECT_EQ(post.mean.cwiseAbs().maxCoeff(), 0.0);
  const Eigen::MatrixXd md = dense_transform(space, m);
  EXPECT_LE(max_abs_diff(*post.covariance, md * dense_kernel(space, as_function(k)) * md.transpose()), 1e-12);
}

TEST(TransformPosterior, DeltaRowReducesToGp) {
  std::mt19937_64 rng(7);
  const auto space = make_space(2, 3);
  const auto k = random_product_kernel(2, 3, rng);
  const auto d = random_training_data(space, 4, 0.2, rng);
  const auto x = random_sequence(space, rng);
  FactorizedTransform m{2, 3, {delta_row(space, x)}};
  const auto post = transform_posterior({k, d, m, {}});
  const auto gp = gp_posterior(as_function(k), d, {x});
  EXPECT_NEAR(post.mean(0), gp.mean(0), 1e-12);
  EXPECT_NEAR(post.variance(0), gp.variance(0), 1e-12);
  EXPECT_EQ(post.labels.front(), space.format(x));
}

TEST(TransformPosterior, EveryKindMatchesDenseOracle) {
  std::mt19937_64 rng(9);
  for (int alpha = 2; alpha <= 3; ++alpha) {
    for (int l = 2; l <= 3; ++l) {
      const auto space = make_space(alpha, l);
      const auto k = random_product_kernel(alpha, l, rng);
      const Eigen::MatrixXd kd = dense_kernel(space, as_function(k));
      const auto d = random_training_data(space, space.sequence_count() / 2, 0.05, rng);
      for (const auto& spec : kinds_for(space, rng)) {
        const auto m = transform_rows(space, spec, all_indices(space, spec));
        const auto fast = transform_posterior({k, d, m, {}});
        const auto dense = dense_transform_posterior(space, dense_transform(space, m), kd, d);
        EXPECT_LE((fast.mean - dense.mean).cwiseAbs().maxCoeff(), 1e-8) << to_string(spec.kind);
        EXPECT_LE(max_abs_diff(*fast.covariance, *dense.covariance), 1e-8) << to_string(spec.kind);
      }
    }
  }
}

TEST(TransformPosterior, VarianceOnlyAndThreadsAgree) {
  std::mt19937_64 rng(11);
  const auto space = make_space(3, 3);
  const auto k = random_product_kernel(3, 3, rng);
  const auto d = random_training_data(space, 10, 0.1, rng);
  const TransformSpec zs{TransformKind::ZeroSum, std::nullopt, std::nullopt};
  const auto m = transform_rows(space, zs, all_indices(space, zs));
  const auto full = transform_posterior({k, d, m, {}});
  PosteriorOptions lean;
  lean.want_covariance = false;
  lean.threads = 3;
  const auto diag = transform_posterior({k, d, m, lean});
  EXPECT_FALSE(diag.covariance.has_value());
  EXPECT_EQ(diag.mean, full.mean);
  EXPECT_LE((diag.variance - full.variance).cwiseAbs().maxCoeff(), 1e-14);
  PosteriorOptions threaded;
  threaded.threads = 4;
  const auto par = transform_posterior({k, d, m, threaded});
  EXPECT_EQ(par.mean, full.mean);
  EXPECT_EQ(*par.covariance, *full.covariance);
}

TEST(GaugeWeightPosterior, ZeroSumPriorVariance) {
  const auto space = make_space(2, 1);
  const ProductKernel id({Eigen::MatrixXd::Identity(2, 2)});
  const auto post = gauge_weight_posterior(space, GaugeSpec::zero_sum(2, 1), id, empty_data(), {Subsequence::empty()});
  EXPECT_DOUBLE_EQ(post.mean(0), 0.0);
  EXPECT_DOUBLE_EQ(post.variance(0), 0.5);
  EXPECT_EQ(post.labels.front(), "-");
}

TEST(GaugeWeightPosterior, WildTypeInterceptIsWildTypeValue) {
  std::mt19937_64 rng(13);
  const auto space = make_space(3, 2);
  const auto wt = space.parse_sequence("bc");
  const auto k = random_product_kernel(3, 2, rng);
  TrainingData d = random_training_data(space, 0, 1e-8, rng);
  d.X = space.enumerate();
  d.y = Eigen::VectorXd::LinSpaced(9, -2.0, 3.0);
  const auto post = gauge_weight_posterior(space, GaugeSpec(1.0, ProductDistribution::point_mass(wt, 3)), k, d,
                                           {Subsequence::empty()});
  EXPECT_NEAR(post.mean(0), d.y(static_cast<Eigen::Index>(space.index_of(wt))), 1e-5);
}

TEST(GaugeWeightPosterior, MatchesDenseAndTransformRoute) {
  std::mt19937_64 rng(15);
  for (int alpha = 2; alpha <= 3; ++alpha) {
    for (int l = 2; l <= 3; ++l) {
      const auto space = make_space(alpha, l);
      for (double eta : {0.0, 0.4, 1.0}) {
        const auto k = random_product_kernel(alpha, l, rng);
        const GaugeSpec g(eta, random_distribution(alpha, l, rng));
        const auto d = random_training_data(space, space.sequence_count() / 2, 0.1, rng);
        const auto subs = space.enumerate_subseq();
        const auto fast = gauge_weight_posterior(space, g, k, d, subs);
        const auto dense = dense_gauge_weight_posterior(space, g, dense_kernel(space, as_function(k)), d, subs);
        EXPECT_LE((fast.mean - dense.mean).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE(max_abs_diff(*fast.covariance, *dense.covariance), 1e-8);
        const TransformSpec spec{TransformKind::GaugeWeights, g, std::nullopt};
        const auto via_rows = transform_posterior({k, d, transform_rows(space, spec, subs), {}});
        EXPECT_LE((fast.mean - via_rows.mean).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE(max_abs_diff(*fast.covariance, *via_rows.covariance), 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*fast.covariance);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
      }
    }
  }
}

TEST(GaugeWeightPosterior, EqualsProjectedBayesWeightPosterior) {
  std::mt19937_64 rng(17);
  const auto space = make_space(2, 2);
  const auto k = random_product_kernel(2, 2, rng);
  const GaugeSpec g(0.5, random_distribution(2, 2, rng));
  const auto d = random_training_data(space, 3, 0.3, rng);
  const Eigen::MatrixXd lambda = build_theta_regularizer(space, AnyKernel(k), g);
  const auto bayes = bayes_weight_posterior(space, lambda.inverse(), d);
  const Eigen::MatrixXd p = dense_projection(space, g);
  const auto subs = space.enumerate_subseq();
  const auto fast = gauge_weight_posterior(space, g, k, d, subs);
  EXPECT_LE((p * bayes.mean - fast.mean).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(max_abs_diff(p * *bayes.covariance * p.transpose(), *fast.covariance), 1e-8);
}

TEST(GaugeWeightPosterior, SamplesStayInTheGauge) {
  std::mt19937_64 rng(19);
  const auto space = make_space(2, 2);
  const auto k = random_product_kernel(2, 2, rng);
  const GaugeSpec g(0.7, random_distribution(2, 2, rng));
  const auto d = random_training_data(space, 3, 0.2, rng);
  const auto post = gauge_weight_posterior(space, g, k, d, space.enumerate_subseq());
  const Eigen::MatrixXd draws = sample_gaussian(post.mean, *post.covariance, 1000, rng);
  double worst = 0.0;
  for (Eigen::Index s = 0; s < draws.cols(); ++s) {
    worst = std::max(worst, marginalization_residual(space, draws.col(s), g));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(GaugeWeightPosterior, LongSequencesNeedNoDenseObjects) {
  std::mt19937_64 rng(21);
  const auto space = make_space(4, 40);
  const auto k = random_product_kernel(4, 40, rng);
  const auto d = random_training_data(space, 30, 0.5, rng);
  std::vector<Subsequence> subs{Subsequence::empty(), space.parse_subsequence("3:b"),
                                space.parse_subsequence("1:a;40:d")};
  const auto post = gauge_weight_posterior(space, GaugeSpec::zero_sum(4, 40), k, d, subs);
  EXPECT_EQ(post.mean.size(), 3);
  EXPECT_TRUE(post.mean.allFinite());
  EXPECT_TRUE((post.variance.array() >= -1e-12).all());
}

TEST(GaugeWeightPosterior, RejectsMismatchedInputs) {
  std::mt19937_64 rng(23);
  const auto space = make_space(2, 2);
  const auto k = random_product_kernel(3, 2, rng);
  EXPECT_ANY_THROW(gauge_weight_posterior(space, GaugeSpec::zero_sum(2, 2), k, empty_data(), {Subsequence::empty()}));
  TrainingData bad = empty_data(0.0);
  EXPECT_THROW(gauge_weight_posterior(space, GaugeSpec::zero_sum(2, 2), random_product_kernel(2, 2, rng), bad,
                                      {Subsequence::empty()}),
               DataError);
}
