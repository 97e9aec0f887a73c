#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "seqgp/errors.hpp"
#include "seqgp/oracle.hpp"
#include "support/monte_carlo.hpp"

using namespace seqgp;

namespace {

SequenceSpace make_space(int alpha, int length) {
  return SequenceSpace(std::string("abcdef").substr(0, static_cast<std::size_t>(alpha)), length);
}

TrainingData empty_data() {
  TrainingData d;
  d.y.resize(0);
  return d;
}

void expect_covariance_close(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& cov) {
  seqgp::testing::expect_moments_close(samples, Eigen::VectorXd::Zero(cov.rows()), cov);
}

}  // namespace

TEST(DenseTransformPosterior, EmptyDataAndIdentity) {
  std::mt19937_64 rng(1);
  const auto space = make_space(3, 2);
  const Eigen::MatrixXd k = dense_kernel(space, as_function(random_product_kernel(3, 2, rng)));
  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(4, 9);
  const auto prior = dense_transform_posterior(space, m, k, empty_data());
  EXPECT_EQ(prior.mean.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(max_abs_diff(*prior.covariance, m * k * m.transpose()), 1e-12);

  const auto d = random_training_data(space, 4, 0.3, rng);
  const auto post = dense_transform_posterior(space, Eigen::MatrixXd::Identity(9, 9), k, d);
  const auto gp = gp_posterior([&](const Sequence& x, const Sequence& y) {
    return k(static_cast<Eigen::Index>(space.index_of(x)), static_cast<Eigen::Index>(space.index_of(y)));
  }, d, space.enumerate());
  EXPECT_LE((post.mean - gp.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(max_abs_diff(*post.covariance, *gp.covariance), 1e-12);
}

TEST(DenseWorkspace, MatricesAreConsistent) {
  std::mt19937_64 rng(2);
  const auto space = make_space(2, 2);
  const auto k = random_product_kernel(2, 2, rng);
  const GaugeSpec g(0.5, random_distribution(2, 2, rng));
  const DenseWorkspace ws(space, as_function(k), g);
  EXPECT_EQ(ws.phi.rows(), 4);
  EXPECT_EQ(ws.phi.cols(), 9);
  EXPECT_LE(max_abs_diff(ws.regularizer, ws.phi.transpose() * ws.kernel.inverse() * ws.phi + ws.penalty), 1e-10);
  const DenseWorkspace trivial(space, as_function(k), GaugeSpec(0.0, ProductDistribution::uniform(2, 2)));
  EXPECT_EQ(trivial.penalty.size(), 0);
  EXPECT_EQ(trivial.regularizer.size(), 0);
  EXPECT_THROW(DenseWorkspace(make_space(2, 21), as_function(geometric_to_product({0.5}, make_space(2, 21))),
                              GaugeSpec::zero_sum(2, 21)),
               SizeGuardError);
}

TEST(Orthogonality, ThetaRegularizerOrthogonalizes) {
  std::mt19937_64 rng(3);
  const auto space = make_space(2, 2);
  for (double eta : {0.3, 1.0}) {
    const GaugeSpec g(eta, random_distribution(2, 2, rng));
    const auto k = random_product_kernel(2, 2, rng);
    EXPECT_LE(check_orthogonality(space, build_theta_regularizer(space, AnyKernel(k), g), g), 1e-8);
  }
}

TEST(Orthogonality, IdentityDoesNot) {
  const auto space = make_space(2, 1);
  EXPECT_GT(check_orthogonality(space, Eigen::MatrixXd::Identity(3, 3), GaugeSpec::zero_sum(2, 1)), 0.1);
}

TEST(Orthogonality, RegularizerFactorsAsGramPlusPenalty) {
  std::mt19937_64 rng(4);
  const auto space = make_space(3, 2);
  const auto k = random_product_kernel(3, 2, rng);
  const GaugeSpec g(0.6, random_distribution(3, 2, rng));
  const Eigen::MatrixXd kd = dense_kernel(space, as_function(k));
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(kd.inverse()).matrixL();
  const Eigen::MatrixXd a = l.transpose() * phi_dense(space);
  const Eigen::MatrixXd b = Eigen::MatrixXd(sparse_b_matrix(space, g));
  EXPECT_LE(max_abs_diff(build_theta_regularizer(space, AnyKernel(k), g), a.transpose() * a + b.transpose() * b),
            1e-9);
}

TEST(Samplers, FunctionPriorCovariance) {
  std::mt19937_64 rng(5);
  const auto space = make_space(2, 2);
  const Eigen::MatrixXd k = dense_kernel(space, as_function(random_product_kernel(2, 2, rng)));
  expect_covariance_close(sample_function_prior(k, 100000, rng), k);
  EXPECT_EQ(sample_function_prior(k, 0, rng).cols(), 0);
}

TEST(Samplers, WeightPriorCovariance) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 3);
  const Eigen::MatrixXd w = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(3, 3);
  expect_covariance_close(sample_weight_prior(w, 100000, rng), w);
}

TEST(Samplers, SingularCovarianceIsFine) {
  std::mt19937_64 rng(7);
  Eigen::MatrixXd c(2, 2);
  c << 1.0, 1.0, 1.0, 1.0;
  const Eigen::MatrixXd s = sample_gaussian(Eigen::Vector2d(1.0, 2.0), c, 100, rng);
  EXPECT_LE(((s.row(1) - s.row(0)).array() - 1.0).abs().maxCoeff(), 1e-12);
  Eigen::MatrixXd neg(1, 1);
  neg << -1.0;
  EXPECT_THROW(sample_gaussian(Eigen::VectorXd::Zero(1), neg, 1, rng), NumericalError);
}

TEST(Gnk, NeighborhoodsAndCovariance) {
  const auto space = make_space(2, 3);
  const std::vector<std::vector<int>> nbhd{{0, 1}, {1, 2}, {0, 2}};
  const auto subs = gnk_subsequences(space, nbhd);
  EXPECT_EQ(subs.size(), 12u);
  EXPECT_THROW(gnk_subsequences(space, {{1}, {1}, {2}}), DomainError);
  std::mt19937_64 rng(8);
  expect_covariance_close(gnk_sample(space, nbhd, 100000, rng), gnk_covariance(space, nbhd));
}

TEST(Gnk, SingletonNeighborhoodsAreAdditive) {
  const auto space = make_space(3, 3);
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd f = gnk_sample(space, {{0}, {1}, {2}}, 50, rng);
  const auto proj = spectral_projectors(space);
  for (int k = 2; k <= 3; ++k) EXPECT_LE((proj[static_cast<std::size_t>(k)] * f).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((proj[1] * f).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Gnk, CovarianceMatchesInducedDiagonalPrior) {
  const auto space = make_space(2, 2);
  const std::vector<std::vector<int>> nbhd{{0, 1}, {1}};
  const auto subs = gnk_subsequences(space, nbhd);
  // Equivalent regularizer: 1/variance on the neighborhood subsequences, and
  // an effectively infinite penalty elsewhere.
  const auto all = space.enumerate_subseq();
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(all.size()), INFINITY);
  for (const auto& s : subs) diag(static_cast<Eigen::Index>(space.index_of(s))) = static_cast<double>(s.order());
  EXPECT_LE(max_abs_diff(dense_induced_kernel(space, diag), gnk_covariance(space, nbhd)), 1e-12);
}

TEST(SpectralProjectors, ResolveTheIdentity) {
  for (int alpha = 2; alpha <= 3; ++alpha) {
    for (int l = 1; l <= 3; ++l) {
      const auto space = make_space(alpha, l);
      const auto p = spectral_projectors(space);
      ASSERT_EQ(p.size(), static_cast<std::size_t>(l) + 1);
      const auto n = p[0].rows();
      Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t a = 0; a < p.size(); ++a) {
        total += p[a];
        for (std::size_t b = 0; b < p.size(); ++b) {
          const Eigen::MatrixXd expected = a == b ? p[a] : Eigen::MatrixXd::Zero(n, n);
          EXPECT_LE(max_abs_diff(p[a] * p[b], expected), 1e-10);
        }
        EXPECT_NEAR(p[a].trace(), static_cast<double>(binomial(l, static_cast<int>(a)) *
                                                      checked_pow(alpha - 1, static_cast<int>(a))),
                    1e-10);
      }
      EXPECT_LE(max_abs_diff(total, Eigen::MatrixXd::Identity(n, n)), 1e-10);
    }
  }
}

TEST(SpectralProjectors, VcEigenvalues) {
  std::mt19937_64 rng(10);
  const auto space = make_space(3, 3);
  const auto vc = random_vc_kernel(space, rng);
  const Eigen::MatrixXd k = dense_kernel(space, as_function(vc));
  const auto p = spectral_projectors(space);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_LE(max_abs_diff(k * p[i], 27.0 * vc.lambdas()[i] * p[i]), 1e-10);
  }
}

TEST(Conformance, DefaultSeedPasses) {
  const auto report = run_conformance();
  EXPECT_EQ(report.seed, kDefaultSeed);
  std::set<std::string> names;
  for (const auto& r : report.results) {
    EXPECT_TRUE(r.passed) << r.name << " max_error=" << r.max_error;
    EXPECT_TRUE(names.insert(r.name).second) << r.name;
  }
  EXPECT_TRUE(report.all_passed());
  EXPECT_GE(report.results.size(), 25u);
}

TEST(Conformance, MinimumTrialsPerPairing) {
  const auto report = run_conformance(7);
  for (const auto& r : report.results) {
    // The structural projector check enumerates its six instances exhaustively.
    if (r.name == "spectral-projectors") continue;
    EXPECT_GE(r.trials, 20) << r.name;
  }
  EXPECT_TRUE(report.all_passed());
}

TEST(Conformance, Deterministic) {
  const auto a = run_conformance(99, 4);
  const auto b = run_conformance(99, 4);
  ASSERT_EQ(a.results.size(), b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_EQ(a.results[i].max_error, b.results[i].max_error) << a.results[i].name;
  }
}
