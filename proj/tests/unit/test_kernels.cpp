#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "seqgp/errors.hpp"
#include "seqgp/kernels.hpp"
#include "seqgp/oracle.hpp"
#include "seqgp/regress.hpp"

using namespace seqgp;

namespace {

SequenceSpace make_space(int alpha, int length) {
  return SequenceSpace(std::string("abcdef").substr(0, static_cast<std::size_t>(alpha)), length);
}

Eigen::MatrixXd dense_of(const SequenceSpace& space, const AnyKernel& k) {
  return dense_kernel(space, as_function(k));
}

/// Order-indexed diagonal regularizer over canonical subsequence order.
Eigen::VectorXd order_diag(const SequenceSpace& space, const std::vector<double>& a) {
  const auto subs = space.enumerate_subseq();
  Eigen::VectorXd d(static_cast<Eigen::Index>(subs.size()));
  for (std::size_t i = 0; i < subs.size(); ++i) d(static_cast<Eigen::Index>(i)) = a[subs[i].order()];
  return d;
}

Eigen::VectorXd lambda_pi_diag(const SequenceSpace& space, double lambda, const ProductDistribution& pi) {
  const auto subs = space.enumerate_subseq();
  Eigen::VectorXd d(static_cast<Eigen::Index>(subs.size()));
  for (std::size_t i = 0; i < subs.size(); ++i) {
    double v = 1.0;
    for (std::size_t q = 0; q < subs[i].order(); ++q) v *= lambda * pi(subs[i].positions[q], subs[i].chars[q]);
    d(static_cast<Eigen::Index>(i)) = v;
  }
  return d;
}

}  // namespace

TEST(VcKernel, EntryExamples) {
  VcKernel k1(make_space(2, 1), {1.0, 1.0});
  EXPECT_DOUBLE_EQ(vc_entry(k1, 0), 2.0);
  EXPECT_DOUBLE_EQ(vc_entry(k1, 1), 0.0);
  VcKernel k2(make_space(2, 2), {1.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(vc_entry(k2, 0), 4.0);
  EXPECT_DOUBLE_EQ(vc_entry(k2, 1), 0.0);
  EXPECT_DOUBLE_EQ(vc_entry(k2, 2), 0.0);
}

TEST(VcKernel, DegenerateProbeOnlyBehindFlag) {
  const auto space = make_space(3, 3);
  EXPECT_THROW(VcKernel(space, {1.0, 0.0, 0.0, 0.0}), DomainError);
  VcKernel probe(space, {1.0, 0.0, 0.0, 0.0}, VcKernel::AllowDegenerate{});
  for (int d = 0; d <= 3; ++d) EXPECT_DOUBLE_EQ(vc_entry(probe, d), 1.0);
  EXPECT_THROW(vc_inverse_entry(probe, 0), DomainError);
}

TEST(VcKernel, Validation) {
  const auto space = make_space(2, 2);
  EXPECT_THROW(VcKernel(space, {1.0, 1.0}), DimensionError);
  EXPECT_THROW(VcKernel(space, {1.0, -1.0, 1.0}), DomainError);
  EXPECT_THROW(VcKernel(space, {1.0, NAN, 1.0}), DomainError);
}

TEST(VcKernel, InverseOfTwoByTwo) {
  VcKernel k(make_space(2, 1), {1.0, 1.0});
  EXPECT_DOUBLE_EQ(vc_inverse_entry(k, 0), 0.5);
  EXPECT_DOUBLE_EQ(vc_inverse_entry(k, 1), 0.0);
}

TEST(VcKernel, DenseIdentity) {
  std::mt19937_64 rng(11);
  for (int alpha = 2; alpha <= 3; ++alpha) {
    for (int l = 1; l <= 3; ++l) {
      const auto space = make_space(alpha, l);
      for (int trial = 0; trial < 5; ++trial) {
        const VcKernel k = random_vc_kernel(space, rng);
        const auto seqs = space.enumerate();
        const auto n = static_cast<Eigen::Index>(seqs.size());
        Eigen::MatrixXd kd(n, n), ki(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < n; ++j) {
            const int d = hamming(seqs[static_cast<std::size_t>(i)], seqs[static_cast<std::size_t>(j)]);
            kd(i, j) = vc_entry(k, d);
            ki(i, j) = vc_inverse_entry(k, d);
          }
        }
        EXPECT_LE(max_abs_diff(kd * ki, Eigen::MatrixXd::Identity(n, n)), 1e-10);
      }
    }
  }
}

TEST(VcKernel, EqualLambdasGiveScaledIdentity) {
  const auto space = make_space(2, 3);
  VcKernel k(space, {2.0, 2.0, 2.0, 2.0});
  const Eigen::MatrixXd kd = dense_of(space, k);
  EXPECT_LE(max_abs_diff(kd, 16.0 * Eigen::MatrixXd::Identity(8, 8)), 1e-12);
  EXPECT_NEAR(vc_inverse_entry(k, 0), 1.0 / 16.0, 1e-15);
}

TEST(ProductKernel, EntryExamples) {
  Eigen::MatrixXd half(2, 2);
  half << 1.0, 0.5, 0.5, 1.0;
  ProductKernel k({half, half});
  const auto space = make_space(2, 2);
  EXPECT_DOUBLE_EQ(product_entry(k, space.parse_sequence("aa"), space.parse_sequence("ab")), 0.5);
  EXPECT_DOUBLE_EQ(product_entry(k, space.parse_sequence("aa"), space.parse_sequence("bb")), 0.25);
  ProductKernel id({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)});
  EXPECT_LE(max_abs_diff(dense_of(space, id), Eigen::MatrixXd::Identity(4, 4)), 0.0);
}

TEST(ProductKernel, RejectsInvalidBlocks) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.4, 1.0;
  EXPECT_THROW(ProductKernel({asym}), DomainError);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(ProductKernel({indefinite}), DomainError);
  EXPECT_THROW(ProductKernel({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)}),
               DimensionError);
  EXPECT_THROW(ProductKernel(std::vector<Eigen::MatrixXd>{}), DimensionError);
}

TEST(Geometric, DecaysWithDistance) {
  const auto space = make_space(3, 3);
  const ProductKernel k = geometric_to_product({0.5}, space);
  EXPECT_DOUBLE_EQ(product_entry(k, space.parse_sequence("aaa"), space.parse_sequence("bca")), 0.25);
  EXPECT_THROW(geometric_to_product({1.0}, space), DomainError);
  EXPECT_THROW(geometric_to_product({0.0}, space), DomainError);
}

TEST(Connectedness, EqualFactorsMatchGeometric) {
  const auto space = make_space(3, 3);
  const auto g = dense_of(space, geometric_to_product({0.3}, space));
  const auto c = dense_of(space, connectedness_to_product({{0.3, 0.3, 0.3}}, 3));
  EXPECT_LE(max_abs_diff(g, c), 1e-15);
}

TEST(Connectedness, Bounds) {
  EXPECT_THROW(connectedness_to_product({{-0.5}}, 3), DomainError);
  EXPECT_NO_THROW(connectedness_to_product({{-0.49}}, 3));
  EXPECT_THROW(connectedness_to_product({{1.0}}, 3), DomainError);
}

TEST(Jenga, PositiveSignMatchesConnectedness) {
  const auto space = make_space(2, 2);
  const double z1 = 0.4, z2 = 0.7;
  JengaSpec jen{{1, 1},
                {Eigen::VectorXd::Constant(2, std::sqrt(z1)), Eigen::VectorXd::Constant(2, std::sqrt(z2))}};
  const auto a = dense_of(space, jenga_to_product(jen));
  const auto b = dense_of(space, connectedness_to_product({{z1, z2}}, 2));
  EXPECT_LE(max_abs_diff(a, b), 1e-15);
}

TEST(Jenga, Validation) {
  JengaSpec bad_pos{{1}, {Eigen::Vector2d(0.5, 1.0)}};
  EXPECT_THROW(jenga_to_product(bad_pos), DomainError);
  JengaSpec bad_neg{{-1}, {Eigen::Vector2d(1.0, 1.0)}};  // 1/2 + 1/2 = 1 is allowed
  EXPECT_NO_THROW(validate(bad_neg));
  JengaSpec too_big{{-1}, {Eigen::Vector3d(1.0, 1.0, 1.0)}};
  EXPECT_THROW(jenga_to_product(too_big), DomainError);
  JengaSpec bad_sign{{2}, {Eigen::Vector2d(0.5, 0.5)}};
  EXPECT_THROW(jenga_to_product(bad_sign), DomainError);
}

TEST(JengaBlockInverse, KnownTwoByTwo) {
  const Eigen::Vector2d a(std::sqrt(0.5), std::sqrt(0.5));
  Eigen::MatrixXd expected(2, 2);
  expected << 4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0;
  EXPECT_LE(max_abs_diff(jenga_block_inverse(1, a), expected), 1e-14);
  EXPECT_LE(max_abs_diff(jenga_block_inverse(1, Eigen::VectorXd::Zero(4)), Eigen::MatrixXd::Identity(4, 4)),
            0.0);
}

TEST(JengaBlockInverse, MatchesDenseInverse) {
  std::mt19937_64 rng(5);
  for (int alpha = 2; alpha <= 6; ++alpha) {
    for (int trial = 0; trial < 10; ++trial) {
      const JengaSpec spec = random_jenga(alpha, 1, rng);
      const auto& a = spec.factors[0];
      const Eigen::MatrixXd block = jenga_block(spec.signs[0], a);
      const Eigen::MatrixXd inv = jenga_block_inverse(spec.signs[0], a);
      EXPECT_LE(max_abs_diff(inv, block.inverse()), 1e-12);
      EXPECT_LE(max_abs_diff(block * inv, Eigen::MatrixXd::Identity(alpha, alpha)), 1e-12);
    }
  }
}

TEST(JengaBlockInverse, SingularBlockIsNumericalError) {
  EXPECT_THROW(jenga_block_inverse(1, Eigen::Vector2d(1.0, 0.5)), NumericalError);
}

TEST(ProductForm, ClosureAgainstDefiningFormulas) {
  std::mt19937_64 rng(7);
  for (int alpha = 2; alpha <= 3; ++alpha) {
    const auto space = make_space(alpha, 3);
    const auto seqs = space.enumerate();
    const auto conn = random_connectedness(alpha, 3, rng);
    const auto jen = random_jenga(alpha, 3, rng);
    const auto kc = connectedness_to_product(conn, alpha);
    const auto kj = jenga_to_product(jen);
    const auto kg = geometric_to_product({0.35}, space);
    for (const auto& x : seqs) {
      for (const auto& y : seqs) {
        double c = 1.0, j = 1.0;
        for (int p = 0; p < 3; ++p) {
          if (x[p] == y[p]) continue;
          c *= conn.z[p];
          j *= jen.signs[p] * jen.factors[p](x[p]) * jen.factors[p](y[p]);
        }
        EXPECT_NEAR(product_entry(kc, x, y), c, 1e-14);
        EXPECT_NEAR(product_entry(kj, x, y), j, 1e-14);
        EXPECT_NEAR(product_entry(kg, x, y), std::pow(0.35, hamming(x, y)), 1e-14);
      }
    }
  }
}

TEST(InducedDiagLambdaPi, UniformTwoLetterExample) {
  const auto space = make_space(2, 1);
  const auto k = induced_kernel_diag_lambda_pi(2.0, ProductDistribution::uniform(2, 1));
  EXPECT_DOUBLE_EQ(product_entry(k, space.parse_sequence("a"), space.parse_sequence("a")), 2.0);
  EXPECT_DOUBLE_EQ(product_entry(k, space.parse_sequence("a"), space.parse_sequence("b")), 1.0);
}

TEST(InducedDiagLambdaPi, UniformPowerLaw) {
  const auto space = make_space(3, 3);
  const double lambda = 0.7;
  const auto k = induced_kernel_diag_lambda_pi(lambda, ProductDistribution::uniform(3, 3));
  for (const auto& x : space.enumerate()) {
    for (const auto& y : space.enumerate()) {
      EXPECT_NEAR(product_entry(k, x, y), std::pow(1.0 + 3.0 / lambda, 3 - hamming(x, y)), 1e-10);
    }
  }
}

TEST(InducedDiagLambdaPi, MatchesDenseRegularizerInverse) {
  const auto space = make_space(2, 2);
  Eigen::MatrixXd probs(2, 2);
  probs << 0.25, 0.75, 0.25, 0.75;
  const ProductDistribution pi(probs);
  const auto k = induced_kernel_diag_lambda_pi(1.0, pi);
  const Eigen::MatrixXd dense = dense_induced_kernel(space, lambda_pi_diag(space, 1.0, pi));
  EXPECT_LE(max_abs_diff(dense_of(space, k), dense), 1e-10);
}

TEST(InducedDiagLambdaPi, DomainErrors) {
  const auto pi = ProductDistribution::uniform(2, 2);
  EXPECT_THROW(induced_kernel_diag_lambda_pi(0.0, pi), DomainError);
  EXPECT_THROW(induced_kernel_diag_lambda_pi(INFINITY, pi), DomainError);
  Eigen::MatrixXd probs(2, 2);
  probs << 1.0, 0.0, 0.5, 0.5;
  EXPECT_THROW(induced_kernel_diag_lambda_pi(1.0, ProductDistribution(probs)), DomainError);
}

TEST(InducedOrderDiag, SmallestExample) {
  const auto space = make_space(2, 1);
  const auto k = induced_vc_from_order_diag({1.0, 1.0}, space);
  EXPECT_DOUBLE_EQ(k.lambdas()[0], 1.5);
  EXPECT_DOUBLE_EQ(k.lambdas()[1], 0.5);
  EXPECT_DOUBLE_EQ(vc_entry(k, 0), 2.0);
  EXPECT_DOUBLE_EQ(vc_entry(k, 1), 1.0);
}

TEST(InducedOrderDiag, ConstantOnlyLimit) {
  const auto space = make_space(3, 3);
  const auto k = induced_vc_from_order_diag({2.0, 1e12, 1e12, 1e12}, space);
  EXPECT_NEAR(k.lambdas()[0], 0.5, 1e-11);
  for (int i = 1; i <= 3; ++i) EXPECT_LT(k.lambdas()[static_cast<std::size_t>(i)], 1e-11);
}

TEST(InducedOrderDiag, EqualWeightsGiveDecreasingLambdas) {
  for (int alpha = 2; alpha <= 4; ++alpha) {
    for (int l = 1; l <= 6; ++l) {
      const auto k = induced_vc_from_order_diag(std::vector<double>(static_cast<std::size_t>(l) + 1, 1.3),
                                                make_space(alpha, l));
      for (int i = 0; i < l; ++i) {
        EXPECT_GT(k.lambdas()[static_cast<std::size_t>(i)], k.lambdas()[static_cast<std::size_t>(i) + 1]);
      }
    }
  }
}

TEST(InducedOrderDiag, MatchesDenseRegularizerInverse) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  for (int alpha = 2; alpha <= 3; ++alpha) {
    for (int l = 1; l <= 3; ++l) {
      const auto space = make_space(alpha, l);
      std::vector<double> a;
      for (int i = 0; i <= l; ++i) a.push_back(u(rng));
      const auto k = induced_vc_from_order_diag(a, space);
      EXPECT_LE(max_abs_diff(dense_of(space, k), dense_induced_kernel(space, order_diag(space, a))), 1e-10);
    }
  }
  EXPECT_THROW(induced_vc_from_order_diag({1.0, 0.0}, make_space(2, 1)), DomainError);
}

TEST(OrderDiagFromVc, RoundTrip) {
  const auto space = make_space(2, 1);
  const auto back = order_diag_from_vc(VcKernel(space, {1.5, 0.5}));
  ASSERT_TRUE(std::holds_alternative<std::vector<double>>(back));
  const auto& a = std::get<std::vector<double>>(back);
  EXPECT_NEAR(a[0], 1.0, 1e-14);
  EXPECT_NEAR(a[1], 1.0, 1e-14);

  const auto space3 = make_space(3, 3);
  const std::vector<double> orig{0.4, 2.0, 1.1, 0.7};
  const auto again = order_diag_from_vc(induced_vc_from_order_diag(orig, space3));
  ASSERT_TRUE(std::holds_alternative<std::vector<double>>(again));
  for (std::size_t i = 0; i < orig.size(); ++i) {
    EXPECT_NEAR(std::get<std::vector<double>>(again)[i], orig[i], 1e-10 * orig[i]);
  }
}

TEST(OrderDiagFromVc, NonDecreasingIsNotRepresentable) {
  const auto r = order_diag_from_vc(VcKernel(make_space(2, 2), {1.0, 1.0, 1.0}));
  ASSERT_TRUE(std::holds_alternative<NotRepresentable>(r));
  EXPECT_EQ(std::get<NotRepresentable>(r).index, 1);
}

TEST(OrderDiagFromVc, GapTooSmallIsNotRepresentable) {
  const double eps = 1e-6;
  const double last = 1.0;
  const int l = 4;
  std::vector<double> lambdas;
  for (int k = 0; k < l; ++k) lambdas.push_back(last + (l - k - 1) * eps);
  lambdas.push_back(0.1);
  const auto r = order_diag_from_vc(VcKernel(make_space(2, l), lambdas));
  EXPECT_TRUE(std::holds_alternative<NotRepresentable>(r));
}

TEST(Biallelic, SmallestExamples) {
  const auto space = make_space(2, 1);
  const auto a = space.parse_sequence("a");
  const auto b = space.parse_sequence("b");
  EXPECT_DOUBLE_EQ(wh_induced_entry({1.0}, a, a), 2.0);
  EXPECT_DOUBLE_EQ(wh_induced_entry({1.0}, b, b), 2.0);
  EXPECT_DOUBLE_EQ(wh_induced_entry({1.0}, a, b), 0.0);
  EXPECT_DOUBLE_EQ(wt_induced_entry({1.0}, a, a), 1.0);
  EXPECT_DOUBLE_EQ(wt_induced_entry({1.0}, a, b), 1.0);
  EXPECT_DOUBLE_EQ(wt_induced_entry({1.0}, b, b), 2.0);
}

TEST(Biallelic, MatchesDenseBases) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.2, 4.0);
  for (int l = 1; l <= 3; ++l) {
    const auto space = make_space(2, l);
    std::vector<double> rho;
    for (int p = 0; p < l; ++p) rho.push_back(u(rng));
    const Eigen::VectorXd inv_reg = biallelic_regularizer(rho).cwiseInverse();
    const Eigen::MatrixXd h = dense_wh_basis(space);
    const Eigen::MatrixXd t = dense_wt_basis(space);
    const Eigen::MatrixXd kh = h * inv_reg.asDiagonal() * h.transpose();
    const Eigen::MatrixXd kt = t * inv_reg.asDiagonal() * t.transpose();
    const auto seqs = space.enumerate();
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      for (std::size_t j = 0; j < seqs.size(); ++j) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        EXPECT_NEAR(wh_induced_entry(rho, seqs[i], seqs[j]), kh(ii, jj), 1e-10);
        EXPECT_NEAR(wt_induced_entry(rho, seqs[i], seqs[j]), kt(ii, jj), 1e-10);
      }
    }
    EXPECT_LE(max_abs_diff(dense_of(space, wh_to_product(rho)), kh), 1e-10);
    EXPECT_LE(max_abs_diff(dense_of(space, wt_to_product(rho)), kt), 1e-10);
  }
}

TEST(Biallelic, WalshHadamardIsIsotropicWithEqualRho) {
  const auto space = make_space(2, 3);
  const std::vector<double> rho(3, 0.8);
  const auto seqs = space.enumerate();
  for (const auto& x : seqs) {
    for (const auto& y : seqs) {
      const int d = hamming(x, y);
      EXPECT_NEAR(wh_induced_entry(rho, x, y), wh_induced_entry(rho, seqs[0], seqs[(1u << d) - 1]), 1e-14);
    }
  }
}

TEST(Biallelic, WildTypeIsHeteroskedastic) {
  const auto space = make_space(2, 2);
  const std::vector<double> rho{2.0, 3.0};
  const auto aa = space.parse_sequence("aa");
  const auto bb = space.parse_sequence("bb");
  EXPECT_GT(wt_induced_entry(rho, bb, bb), wt_induced_entry(rho, aa, aa));
}

TEST(Biallelic, RequiresTwoLetters) {
  const auto space = make_space(3, 1);
  EXPECT_THROW(wh_induced_entry({1.0}, space.parse_sequence("c"), space.parse_sequence("a")), DomainError);
  EXPECT_THROW(wh_induced_entry({0.0}, make_space(2, 1).parse_sequence("a"), make_space(2, 1).parse_sequence("a")),
               DomainError);
}

TEST(Kernels, EveryFamilyIsPositiveDefinite) {
  std::mt19937_64 rng(17);
  for (int alpha = 2; alpha <= 3; ++alpha) {
    for (int l = 1; l <= 3; ++l) {
      const auto space = make_space(alpha, l);
      std::vector<AnyKernel> ks{
          random_vc_kernel(space, rng),
          random_product_kernel(alpha, l, rng),
          geometric_to_product({0.6}, space),
          connectedness_to_product(random_connectedness(alpha, l, rng), alpha),
          jenga_to_product(random_jenga(alpha, l, rng)),
          induced_kernel_diag_lambda_pi(0.8, random_distribution(alpha, l, rng)),
          induced_vc_from_order_diag(std::vector<double>(static_cast<std::size_t>(l) + 1, 0.9), space),
      };
      if (alpha == 2) {
        ks.emplace_back(wh_to_product(std::vector<double>(static_cast<std::size_t>(l), 1.5)));
        ks.emplace_back(wt_to_product(std::vector<double>(static_cast<std::size_t>(l), 1.5)));
      }
      for (const auto& k : ks) {
        Eigen::LLT<Eigen::MatrixXd> llt(dense_of(space, k));
        EXPECT_EQ(llt.info(), Eigen::Success);
      }
    }
  }
}
