#pragma once

#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "seqgp/distribution.hpp"
#include "seqgp/seqspace.hpp"

namespace seqgp {

/// Isotropic variance-component kernel K(x,y) = sum_k lambda_k K_k(d(x,y)).
class VcKernel {
 public:
  /// Tag for the oracle's degenerate probes (zero lambda_k). Not for general use.
  struct AllowDegenerate {};

  VcKernel(const SequenceSpace& space, std::vector<double> lambdas);
  VcKernel(const SequenceSpace& space, std::vector<double> lambdas, AllowDegenerate);

  int alpha() const { return alpha_; }
  int length() const { return length_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  bool degenerate() const { return degenerate_; }

  double entry(int d) const;
  /// alpha^{-2l} sum_k lambda_k^{-1} K_k(d); the exact inverse of entry().
  double inverse_entry(int d) const;
  double operator()(const Sequence& x, const Sequence& y) const;

 private:
  void init(const SequenceSpace& space);

  int alpha_;
  int length_;
  std::vector<double> lambdas_;
  bool degenerate_ = false;
  std::vector<double> by_distance_;
  std::vector<double> inverse_by_distance_;
};

double vc_entry(const VcKernel& k, int d);
double vc_inverse_entry(const VcKernel& k, int d);

/// Separable kernel K(x,y) = prod_p a^p_{x_p,y_p} over symmetric PD blocks.
class ProductKernel {
 public:
  explicit ProductKernel(std::vector<Eigen::MatrixXd> blocks);
  /// Uses precomputed block inverses instead of factorizing each block.
  ProductKernel(std::vector<Eigen::MatrixXd> blocks, std::vector<Eigen::MatrixXd> inverses);

  int alpha() const { return static_cast<int>(blocks_.front().rows()); }
  int length() const { return static_cast<int>(blocks_.size()); }
  const Eigen::MatrixXd& block(int p) const { return blocks_[static_cast<std::size_t>(p)]; }
  const Eigen::MatrixXd& block_inverse(int p) const {
    return inverses_[static_cast<std::size_t>(p)];
  }
  const std::vector<Eigen::MatrixXd>& blocks() const { return blocks_; }

  double operator()(const Sequence& x, const Sequence& y) const;

 private:
  std::vector<Eigen::MatrixXd> blocks_;
  std::vector<Eigen::MatrixXd> inverses_;
};

double product_entry(const ProductKernel& k, const Sequence& x, const Sequence& y);

/// beta^{d(x,y)}, 0 < beta < 1.
struct GeometricSpec {
  double beta;
};

/// prod over differing positions of z^p, -1/(alpha-1) < z^p < 1.
struct ConnectednessSpec {
  std::vector<double> z;
};

/// prod over differing positions of s_p z^p_{x_p} z^p_{y_p}.
struct JengaSpec {
  std::vector<int> signs;
  std::vector<Eigen::VectorXd> factors;
};

void validate(const GeometricSpec& spec);
void validate(const ConnectednessSpec& spec, int alpha);
void validate(const JengaSpec& spec);

ProductKernel geometric_to_product(const GeometricSpec& spec, const SequenceSpace& space);
ProductKernel connectedness_to_product(const ConnectednessSpec& spec, int alpha);
ProductKernel jenga_to_product(const JengaSpec& spec);

/// Unit-diagonal block with off-diagonal sign * a_c * a_c'.
Eigen::MatrixXd jenga_block(int sign, const Eigen::VectorXd& a);
/// Closed-form inverse of jenga_block via Sherman-Morrison.
Eigen::MatrixXd jenga_block_inverse(int sign, const Eigen::VectorXd& a);

/// Function-space prior induced by the diagonal regularizer
/// lambda^{|S|} prod_{p in S} pi^p_{s_p}.
ProductKernel induced_kernel_diag_lambda_pi(double lambda, const ProductDistribution& pi);

/// VC kernel induced by the order-dependent diagonal regularizer a_{|S|}.
VcKernel induced_vc_from_order_diag(const std::vector<double>& a, const SequenceSpace& space);

struct NotRepresentable {
  int index;  // first order k whose solved 1/a_k is not strictly positive
  double value;
};

/// Inverse of induced_vc_from_order_diag, when one exists.
std::variant<std::vector<double>, NotRepresentable> order_diag_from_vc(const VcKernel& k);

/// Bi-allelic priors induced by the diagonal regularizer prod_{p in S} rho_p
/// in the Walsh-Hadamard and wild-type (allele 0 = wild type) bases.
double wh_induced_entry(const std::vector<double>& rho, const Sequence& x, const Sequence& y);
double wt_induced_entry(const std::vector<double>& rho, const Sequence& x, const Sequence& y);
ProductKernel wh_to_product(const std::vector<double>& rho);
ProductKernel wt_to_product(const std::vector<double>& rho);

using AnyKernel = std::variant<VcKernel, ProductKernel>;
using KernelFunction = std::function<double(const Sequence&, const Sequence&)>;

double kernel_entry(const AnyKernel& k, const Sequence& x, const Sequence& y);
KernelFunction as_function(const AnyKernel& k);

/// K_{xs, ys}.
Eigen::MatrixXd kernel_matrix(const KernelFunction& k, const std::vector<Sequence>& xs,
                              const std::vector<Sequence>& ys);

}  // namespace seqgp
