#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "seqgp/distribution.hpp"
#include "seqgp/seqspace.hpp"

namespace seqgp {

/// eta = lambda / (1 + lambda), with lambda = infinity mapping to 1.
double eta_from_lambda(double lambda);

/// A lambda-pi gauge, stored through eta in [0, 1].
struct GaugeSpec {
  double eta;
  ProductDistribution pi;

  GaugeSpec(double eta, ProductDistribution pi);
  static GaugeSpec from_lambda(double lambda, ProductDistribution pi);
  /// The zero-sum gauge (eta = 1, uniform pi).
  static GaugeSpec zero_sum(int alpha, int length);
  /// (1 - eta) / eta; throws DomainError when eta = 0.
  double ratio() const;
};

/// P_{(S,s),(T,t)} of the projection onto the gauge.
double projection_entry(const GaugeSpec& g, const Subsequence& a, const Subsequence& b);

/// Z = B^T B for the marginalization-constraint matrix B. Requires eta > 0.
double penalty_entry(const GaugeSpec& g, const Subsequence& a, const Subsequence& b);

using SparseWeightRow = std::vector<std::pair<Subsequence, double>>;

/// Row (U, u, p) of B, p not in U: pi^p_c on each child (U + p, u + c) and
/// -(1 - eta)/eta on (U, u).
SparseWeightRow b_matrix_row(const GaugeSpec& g, const Subsequence& u, int p);

/// Largest violation of the marginalization constraints by w (canonical order).
double marginalization_residual(const SequenceSpace& space, const Eigen::VectorXd& w,
                                const GaugeSpec& g);

Eigen::MatrixXd dense_projection(const SequenceSpace& space, const GaugeSpec& g);
/// Z assembled entrywise over its sparsity pattern.
Eigen::SparseMatrix<double> sparse_penalty(const SequenceSpace& space, const GaugeSpec& g);
/// B with rows ordered by (U, u) in canonical order and then p ascending.
Eigen::SparseMatrix<double> sparse_b_matrix(const SequenceSpace& space, const GaugeSpec& g);

enum class TransformKind {
  GaugeWeights,
  Hierarchical,
  ZeroSum,
  WildType,
  BackgroundAveraged,
  Fourier,
  WalshHadamard,
};

const char* to_string(TransformKind kind);
/// Throws ConfigError for unknown names.
TransformKind transform_kind_from_string(std::string_view name);

/// Which representation to compute and the parameters it needs.
///   gauge-weights: gauge (eta and pi)
///   hierarchical: gauge->pi (eta ignored, taken as 1)
///   wild-type, background-averaged: reference
///   fourier, walsh-hadamard: reference optional, all-zero by default
struct TransformSpec {
  TransformKind kind = TransformKind::ZeroSum;
  std::optional<GaugeSpec> gauge;
  std::optional<Sequence> reference;
};

/// One row of a factorized linear map: M_{i,x} = prod_p factors(p, x_p).
struct TransformRow {
  std::string label;
  Subsequence index;
  Eigen::MatrixXd factors;  // length x alpha
};

struct FactorizedTransform {
  int alpha = 0;
  int length = 0;
  std::vector<TransformRow> rows;

  std::size_t size() const { return rows.size(); }
};

/// Checks kind/space compatibility (alphabet size, required parameters).
void validate(const SequenceSpace& space, const TransformSpec& spec);
bool is_valid_index(const SequenceSpace& space, const TransformSpec& spec, const Subsequence& sub);
/// Every valid coefficient index of the kind, in canonical subsequence order.
std::vector<Subsequence> all_indices(const SequenceSpace& space, const TransformSpec& spec);

std::string coefficient_label(const SequenceSpace& space, const TransformSpec& spec,
                              const Subsequence& sub);
/// Accepts the subsequence text form or "kind:(...)" for the matching kind.
Subsequence parse_coefficient(const SequenceSpace& space, const TransformSpec& spec,
                              std::string_view text);

/// Throws IndexError for indices the kind does not define.
TransformRow transform_row(const SequenceSpace& space, const TransformSpec& spec,
                           const Subsequence& sub);
FactorizedTransform transform_rows(const SequenceSpace& space, const TransformSpec& spec,
                                   const std::vector<Subsequence>& indices);

/// Dense j x alpha^l matrix of a factorized transform.
Eigen::MatrixXd dense_transform(const SequenceSpace& space, const FactorizedTransform& m);

}  // namespace seqgp
