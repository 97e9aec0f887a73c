#include "seqgp/kernels.hpp"

#include <cmath>
#include <limits>

#include "seqgp/errors.hpp"
#include "seqgp/linalg.hpp"

namespace seqgp {

// ---------------------------------------------------------------------------
// Variance-component kernels
// ---------------------------------------------------------------------------

VcKernel::VcKernel(const SequenceSpace& space, std::vector<double> lambdas)
    : alpha_(space.alpha()), length_(space.length()), lambdas_(std::move(lambdas)) {
  for (double v : lambdas_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("VC kernel order variances must be finite and strictly positive");
    }
  }
  init(space);
}

VcKernel::VcKernel(const SequenceSpace& space, std::vector<double> lambdas, AllowDegenerate)
    : alpha_(space.alpha()), length_(space.length()), lambdas_(std::move(lambdas)) {
  for (double v : lambdas_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("VC kernel order variances must be finite and nonnegative");
    }
    if (v == 0.0) degenerate_ = true;
  }
  init(space);
}

void VcKernel::init(const SequenceSpace& space) {
  if (static_cast<int>(lambdas_.size()) != space.length() + 1) {
    throw DimensionError("VC kernel needs l+1 = " + std::to_string(space.length() + 1) +
                         " order variances, got " + std::to_string(lambdas_.size()));
  }
  const double scale = std::pow(static_cast<double>(alpha_), -2.0 * length_);
  by_distance_.assign(static_cast<std::size_t>(length_ + 1), 0.0);
  inverse_by_distance_.assign(static_cast<std::size_t>(length_ + 1), 0.0);
  for (int d = 0; d <= length_; ++d) {
    double value = 0.0;
    double inverse = 0.0;
    for (int k = 0; k <= length_; ++k) {
      const auto kraw = static_cast<double>(krawtchouk(k, d, length_, alpha_));
      const double lam = lambdas_[static_cast<std::size_t>(k)];
      value += lam * kraw;
      if (!degenerate_) inverse += kraw / lam;
    }
    by_distance_[static_cast<std::size_t>(d)] = value;
    inverse_by_distance_[static_cast<std::size_t>(d)] = scale * inverse;
  }
}

double VcKernel::entry(int d) const {
  if (d < 0 || d > length_) throw DomainError("VC kernel distance out of range");
  return by_distance_[static_cast<std::size_t>(d)];
}

double VcKernel::inverse_entry(int d) const {
  if (degenerate_) throw DomainError("degenerate VC kernel has no inverse");
  if (d < 0 || d > length_) throw DomainError("VC kernel distance out of range");
  return inverse_by_distance_[static_cast<std::size_t>(d)];
}

double VcKernel::operator()(const Sequence& x, const Sequence& y) const {
  return entry(hamming(x, y));
}

double vc_entry(const VcKernel& k, int d) { return k.entry(d); }
double vc_inverse_entry(const VcKernel& k, int d) { return k.inverse_entry(d); }

// ---------------------------------------------------------------------------
// Product kernels
// ---------------------------------------------------------------------------

namespace {

void check_blocks(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) throw DimensionError("product kernel needs at least one block");
  const auto alpha = blocks.front().rows();
  if (alpha < 2) throw DimensionError("product kernel blocks must be at least 2x2");
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const auto& b = blocks[p];
    if (b.rows() != alpha || b.cols() != alpha) {
      throw DimensionError("product kernel block " + std::to_string(p + 1) +
                           " has the wrong shape");
    }
    if (!b.allFinite()) throw DomainError("product kernel block has non-finite entries");
    const double tol = 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff());
    if (!is_symmetric(b, tol)) {
      throw DomainError("product kernel block " + std::to_string(p + 1) + " is not symmetric");
    }
  }
}

}  // namespace

ProductKernel::ProductKernel(std::vector<Eigen::MatrixXd> blocks) : blocks_(std::move(blocks)) {
  check_blocks(blocks_);
  inverses_.reserve(blocks_.size());
  for (std::size_t p = 0; p < blocks_.size(); ++p) {
    Eigen::LLT<Eigen::MatrixXd> llt(blocks_[p]);
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
      throw DomainError("product kernel block " + std::to_string(p + 1) +
                        " is not positive-definite");
    }
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(alpha(), alpha()));
    inverses_.push_back(0.5 * (inv + inv.transpose()));
  }
}

ProductKernel::ProductKernel(std::vector<Eigen::MatrixXd> blocks,
                             std::vector<Eigen::MatrixXd> inverses)
    : blocks_(std::move(blocks)), inverses_(std::move(inverses)) {
  check_blocks(blocks_);
  if (inverses_.size() != blocks_.size()) throw DimensionError("block inverse count mismatch");
  for (std::size_t p = 0; p < blocks_.size(); ++p) {
    Eigen::LLT<Eigen::MatrixXd> llt(blocks_[p]);
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
      throw DomainError("product kernel block " + std::to_string(p + 1) +
                        " is not positive-definite");
    }
  }
}

double ProductKernel::operator()(const Sequence& x, const Sequence& y) const {
  if (static_cast<int>(x.size()) != length() || static_cast<int>(y.size()) != length()) {
    throw DimensionError("product kernel: sequence length mismatch");
  }
  double v = 1.0;
  for (int p = 0; p < length(); ++p) {
    v *= blocks_[static_cast<std::size_t>(p)](x[static_cast<std::size_t>(p)],
                                              y[static_cast<std::size_t>(p)]);
  }
  return v;
}

double product_entry(const ProductKernel& k, const Sequence& x, const Sequence& y) {
  return k(x, y);
}

// ---------------------------------------------------------------------------
// Geometric, connectedness and Jenga families
// ---------------------------------------------------------------------------

void validate(const GeometricSpec& spec) {
  if (!(spec.beta > 0.0 && spec.beta < 1.0)) {
    throw DomainError("geometric kernel requires 0 < beta < 1");
  }
}

void validate(const ConnectednessSpec& spec, int alpha) {
  if (spec.z.empty()) throw DimensionError("connectedness kernel needs one factor per position");
  const double lower = -1.0 / (alpha - 1);
  for (std::size_t p = 0; p < spec.z.size(); ++p) {
    const double z = spec.z[p];
    if (!(z > lower && z < 1.0)) {
      throw DomainError("connectedness kernel requires -1/(alpha-1) < z^p < 1 (violated at position " +
                        std::to_string(p + 1) + ")");
    }
  }
}

void validate(const JengaSpec& spec) {
  if (spec.signs.empty() || spec.signs.size() != spec.factors.size()) {
    throw DimensionError("Jenga kernel needs one sign and one factor vector per position");
  }
  const auto alpha = spec.factors.front().size();
  for (std::size_t p = 0; p < spec.signs.size(); ++p) {
    const auto& z = spec.factors[p];
    const std::string where = " (position " + std::to_string(p + 1) + ")";
    if (z.size() != alpha || alpha < 2) {
      throw DimensionError("Jenga factor vectors must all have alpha >= 2 entries" + where);
    }
    if ((z.array() < 0.0).any() || !z.allFinite()) {
      throw DomainError("Jenga factors must be finite and nonnegative" + where);
    }
    if (spec.signs[p] == 1) {
      if (!((z.array() > 0.0).all() && (z.array() < 1.0).all())) {
        throw DomainError("Jenga kernel with s_p = 1 requires every z^p_c in (0,1)" + where);
      }
    } else if (spec.signs[p] == -1) {
      const double total = (z.array().square() / (1.0 + z.array().square())).sum();
      if (total > 1.0) {
        throw DomainError("Jenga kernel with s_p = -1 requires sum_c z^2/(1+z^2) <= 1" + where);
      }
    } else {
      throw DomainError("Jenga signs must be +1 or -1" + where);
    }
  }
}

ProductKernel geometric_to_product(const GeometricSpec& spec, const SequenceSpace& space) {
  validate(spec);
  Eigen::MatrixXd block = Eigen::MatrixXd::Constant(space.alpha(), space.alpha(), spec.beta);
  block.diagonal().setOnes();
  return ProductKernel(std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(space.length()), block));
}

ProductKernel connectedness_to_product(const ConnectednessSpec& spec, int alpha) {
  validate(spec, alpha);
  std::vector<Eigen::MatrixXd> blocks;
  for (double z : spec.z) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Constant(alpha, alpha, z);
    block.diagonal().setOnes();
    blocks.push_back(std::move(block));
  }
  return ProductKernel(std::move(blocks));
}

Eigen::MatrixXd jenga_block(int sign, const Eigen::VectorXd& a) {
  Eigen::MatrixXd block = static_cast<double>(sign) * a * a.transpose();
  block.diagonal().setOnes();
  return block;
}

Eigen::MatrixXd jenga_block_inverse(int sign, const Eigen::VectorXd& a) {
  if (sign != 1 && sign != -1) throw DomainError("Jenga sign must be +1 or -1");
  const double s = sign;
  const Eigen::ArrayXd diag = 1.0 - s * a.array().square();
  if ((diag.abs() < 1e-14).any()) throw NumericalError("singular Jenga block (1 - s a_c^2 = 0)");
  const double denom = 1.0 + s * (a.array().square() / diag).sum();
  if (std::abs(denom) < 1e-14) throw NumericalError("singular Jenga block (Sherman-Morrison denominator 0)");
  const double zeta = -1.0 / denom;
  const Eigen::VectorXd scaled = (a.array() / diag).matrix();
  Eigen::MatrixXd inv = s * zeta * scaled * scaled.transpose();
  inv.diagonal().array() += 1.0 / diag;
  return inv;
}

ProductKernel jenga_to_product(const JengaSpec& spec) {
  validate(spec);
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<Eigen::MatrixXd> inverses;
  for (std::size_t p = 0; p < spec.signs.size(); ++p) {
    blocks.push_back(jenga_block(spec.signs[p], spec.factors[p]));
    inverses.push_back(jenga_block_inverse(spec.signs[p], spec.factors[p]));
  }
  return ProductKernel(std::move(blocks), std::move(inverses));
}

// ---------------------------------------------------------------------------
// Priors induced by diagonal weight-space regularizers
// ---------------------------------------------------------------------------

ProductKernel induced_kernel_diag_lambda_pi(double lambda, const ProductDistribution& pi) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("induced prior requires 0 < lambda < infinity");
  }
  if (!pi.full_support()) throw DomainError("induced prior requires pi with full support");
  std::vector<Eigen::MatrixXd> blocks;
  for (int p = 0; p < pi.length(); ++p) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Ones(pi.alpha(), pi.alpha());
    for (int c = 0; c < pi.alpha(); ++c) block(c, c) += 1.0 / (pi(p, c) * lambda);
    blocks.push_back(std::move(block));
  }
  return ProductKernel(std::move(blocks));
}

VcKernel induced_vc_from_order_diag(const std::vector<double>& a, const SequenceSpace& space) {
  const int l = space.length();
  if (static_cast<int>(a.size()) != l + 1) {
    throw DimensionError("order-dependent regularizer needs l+1 values");
  }
  for (double v : a) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("order-dependent regularizer values must be finite and > 0");
    }
  }
  const double alpha = space.alpha();
  std::vector<double> lambdas(static_cast<std::size_t>(l + 1), 0.0);
  for (int k = 0; k <= l; ++k) {
    double total = 0.0;
    for (int j = k; j <= l; ++j) {
      total += static_cast<double>(binomial(l - k, j - k)) /
               (std::pow(alpha, j) * a[static_cast<std::size_t>(j)]);
    }
    lambdas[static_cast<std::size_t>(k)] = total;
  }
  return VcKernel(space, std::move(lambdas));
}

std::variant<std::vector<double>, NotRepresentable> order_diag_from_vc(const VcKernel& k) {
  const int l = k.length();
  const double alpha = k.alpha();
  const auto& lam = k.lambdas();
  double scale = 0.0;
  for (double v : lam) scale = std::max(scale, std::abs(v));
  // Back-substitute lambda_k = sum_{j>=k} C(l-k, j-k) alpha^{-j} b_j for b_j = 1/a_j.
  std::vector<double> b(static_cast<std::size_t>(l + 1), 0.0);
  for (int i = l; i >= 0; --i) {
    double rest = lam[static_cast<std::size_t>(i)];
    for (int j = i + 1; j <= l; ++j) {
      rest -= static_cast<double>(binomial(l - i, j - i)) * b[static_cast<std::size_t>(j)] /
              std::pow(alpha, j);
    }
    const double bi = std::pow(alpha, i) * rest;
    if (!(bi > 1e-12 * std::pow(alpha, i) * scale)) return NotRepresentable{i, bi};
    b[static_cast<std::size_t>(i)] = bi;
  }
  std::vector<double> a(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) a[i] = 1.0 / b[i];
  return a;
}

namespace {

void check_biallelic(const std::vector<double>& rho, const Sequence& x, const Sequence& y) {
  if (x.size() != rho.size() || y.size() != rho.size()) {
    throw DimensionError("bi-allelic prior: rho and sequences differ in length");
  }
  for (std::size_t p = 0; p < x.size(); ++p) {
    if (x[p] < 0 || x[p] > 1 || y[p] < 0 || y[p] > 1) {
      throw DomainError("bi-allelic prior requires alpha = 2");
    }
  }
  for (double r : rho) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("bi-allelic prior requires rho_p > 0");
  }
}

void check_rho(const std::vector<double>& rho, int alpha) {
  if (alpha != 2) throw DomainError("bi-allelic prior requires alpha = 2");
  if (rho.empty()) throw DimensionError("bi-allelic prior needs one rho per position");
  for (double r : rho) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("bi-allelic prior requires rho_p > 0");
  }
}

}  // namespace

double wh_induced_entry(const std::vector<double>& rho, const Sequence& x, const Sequence& y) {
  check_biallelic(rho, x, y);
  double v = 1.0;
  for (std::size_t p = 0; p < rho.size(); ++p) {
    const double inv = 1.0 / rho[p];
    v *= (1.0 + inv);
    if (x[p] != y[p]) v *= (1.0 - inv) / (1.0 + inv);
  }
  return v;
}

double wt_induced_entry(const std::vector<double>& rho, const Sequence& x, const Sequence& y) {
  check_biallelic(rho, x, y);
  double v = 1.0;
  for (std::size_t p = 0; p < rho.size(); ++p) {
    if (x[p] == 1 && y[p] == 1) v *= 1.0 + 1.0 / rho[p];
  }
  return v;
}

ProductKernel wh_to_product(const std::vector<double>& rho) {
  check_rho(rho, 2);
  std::vector<Eigen::MatrixXd> blocks;
  for (double r : rho) {
    Eigen::MatrixXd block(2, 2);
    block << 1.0 + 1.0 / r, 1.0 - 1.0 / r, 1.0 - 1.0 / r, 1.0 + 1.0 / r;
    blocks.push_back(std::move(block));
  }
  return ProductKernel(std::move(blocks));
}

ProductKernel wt_to_product(const std::vector<double>& rho) {
  check_rho(rho, 2);
  std::vector<Eigen::MatrixXd> blocks;
  for (double r : rho) {
    Eigen::MatrixXd block(2, 2);
    block << 1.0, 1.0, 1.0, 1.0 + 1.0 / r;
    blocks.push_back(std::move(block));
  }
  return ProductKernel(std::move(blocks));
}

// ---------------------------------------------------------------------------

double kernel_entry(const AnyKernel& k, const Sequence& x, const Sequence& y) {
  return std::visit([&](const auto& kern) { return kern(x, y); }, k);
}

KernelFunction as_function(const AnyKernel& k) {
  return [k](const Sequence& x, const Sequence& y) { return kernel_entry(k, x, y); };
}

Eigen::MatrixXd kernel_matrix(const KernelFunction& k, const std::vector<Sequence>& xs,
                              const std::vector<Sequence>& ys) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k(xs[i], ys[j]);
    }
  }
  return out;
}

}  // namespace seqgp
