#include "seqgp/gauges.hpp"

#include <cmath>
#include <limits>

#include "seqgp/errors.hpp"

namespace seqgp {

namespace {

/// Character at every position, -1 where the position is absent.
std::vector<int> spread(const Subsequence& sub, int length) {
  std::vector<int> out(static_cast<std::size_t>(length), -1);
  for (std::size_t i = 0; i < sub.positions.size(); ++i) {
    const int p = sub.positions[i];
    if (p < 0 || p >= length) throw IndexError("subsequence position out of range");
    out[static_cast<std::size_t>(p)] = sub.chars[i];
  }
  return out;
}

Subsequence gather(const std::vector<int>& chars) {
  Subsequence sub;
  for (std::size_t p = 0; p < chars.size(); ++p) {
    if (chars[p] >= 0) {
      sub.positions.push_back(static_cast<int>(p));
      sub.chars.push_back(chars[p]);
    }
  }
  return sub;
}

void check_gauge_space(const SequenceSpace& space, const GaugeSpec& g) {
  if (g.pi.alpha() != space.alpha() || g.pi.length() != space.length()) {
    throw DimensionError("gauge distribution shape does not match the sequence space");
  }
}

}  // namespace

double eta_from_lambda(double lambda) {
  if (std::isnan(lambda) || lambda < 0.0) throw DomainError("gauge lambda must be in [0, inf]");
  if (std::isinf(lambda)) return 1.0;
  return lambda / (1.0 + lambda);
}

GaugeSpec::GaugeSpec(double eta_value, ProductDistribution distribution)
    : eta(eta_value), pi(std::move(distribution)) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("gauge eta must be in [0, 1]");
}

GaugeSpec GaugeSpec::from_lambda(double lambda, ProductDistribution pi) {
  return GaugeSpec(eta_from_lambda(lambda), std::move(pi));
}

GaugeSpec GaugeSpec::zero_sum(int alpha, int length) {
  return GaugeSpec(1.0, ProductDistribution::uniform(alpha, length));
}

double GaugeSpec::ratio() const {
  if (eta == 0.0) throw DomainError("the trivial gauge (lambda = 0) has no finite penalty");
  return (1.0 - eta) / eta;
}

double projection_entry(const GaugeSpec& g, const Subsequence& a, const Subsequence& b) {
  const int l = g.pi.length();
  const auto s = spread(a, l);
  const auto t = spread(b, l);
  double v = 1.0;
  for (int p = 0; p < l; ++p) {
    const int sp = s[static_cast<std::size_t>(p)];
    const int tp = t[static_cast<std::size_t>(p)];
    if (sp >= 0 && tp >= 0) {
      v *= (sp == tp ? 1.0 : 0.0) - g.pi(p, tp) * g.eta;
    } else if (sp >= 0) {
      v *= 1.0 - g.eta;
    } else if (tp >= 0) {
      v *= g.pi(p, tp) * g.eta;
    } else {
      v *= g.eta;
    }
    if (v == 0.0) return 0.0;
  }
  return v;
}

double penalty_entry(const GaugeSpec& g, const Subsequence& a, const Subsequence& b) {
  const double r = g.ratio();
  const int l = g.pi.length();
  const auto s = spread(a, l);
  const auto t = spread(b, l);
  int only_a = -1, only_b = -1, differ = -1;
  int n_only_a = 0, n_only_b = 0, n_differ = 0;
  for (int p = 0; p < l; ++p) {
    const int sp = s[static_cast<std::size_t>(p)];
    const int tp = t[static_cast<std::size_t>(p)];
    if (sp >= 0 && tp < 0) {
      only_a = p;
      ++n_only_a;
    } else if (tp >= 0 && sp < 0) {
      only_b = p;
      ++n_only_b;
    } else if (sp >= 0 && sp != tp) {
      differ = p;
      ++n_differ;
    }
  }
  if (n_only_a == 0 && n_only_b == 0) {
    if (n_differ == 0) {
      double v = static_cast<double>(l - static_cast<int>(a.order())) * r * r;
      for (std::size_t i = 0; i < a.positions.size(); ++i) {
        const double q = g.pi(a.positions[i], a.chars[i]);
        v += q * q;
      }
      return v;
    }
    if (n_differ == 1) {
      const auto p = static_cast<std::size_t>(differ);
      return g.pi(differ, s[p]) * g.pi(differ, t[p]);
    }
    return 0.0;
  }
  if (n_differ > 0) return 0.0;
  if (n_only_a == 1 && n_only_b == 0) return -r * g.pi(only_a, s[static_cast<std::size_t>(only_a)]);
  if (n_only_b == 1 && n_only_a == 0) return -r * g.pi(only_b, t[static_cast<std::size_t>(only_b)]);
  return 0.0;
}

SparseWeightRow b_matrix_row(const GaugeSpec& g, const Subsequence& u, int p) {
  const double r = g.ratio();
  const int l = g.pi.length();
  auto chars = spread(u, l);
  if (p < 0 || p >= l) throw IndexError("B row position out of range");
  if (chars[static_cast<std::size_t>(p)] >= 0) throw IndexError("B row position must lie outside U");
  SparseWeightRow row;
  for (int c = 0; c < g.pi.alpha(); ++c) {
    chars[static_cast<std::size_t>(p)] = c;
    row.emplace_back(gather(chars), g.pi(p, c));
  }
  row.emplace_back(u, r == 0.0 ? 0.0 : -r);
  return row;
}

double marginalization_residual(const SequenceSpace& space, const Eigen::VectorXd& w,
                                const GaugeSpec& g) {
  check_gauge_space(space, g);
  space.require_dense_weights();
  if (static_cast<std::uint64_t>(w.size()) != space.subsequence_count()) {
    throw DimensionError("weight vector length must be (alpha+1)^l");
  }
  const double r = g.ratio();
  double worst = 0.0;
  const auto subs = space.enumerate_subseq();
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const Subsequence& u = subs[i];
    auto chars = spread(u, space.length());
    for (int p = 0; p < space.length(); ++p) {
      if (chars[static_cast<std::size_t>(p)] >= 0) continue;
      double total = -r * w(static_cast<Eigen::Index>(i));
      for (int c = 0; c < space.alpha(); ++c) {
        chars[static_cast<std::size_t>(p)] = c;
        total += g.pi(p, c) * w(static_cast<Eigen::Index>(space.index_of(gather(chars))));
      }
      chars[static_cast<std::size_t>(p)] = -1;
      worst = std::max(worst, std::abs(total));
    }
  }
  return worst;
}

Eigen::MatrixXd dense_projection(const SequenceSpace& space, const GaugeSpec& g) {
  check_gauge_space(space, g);
  space.require_dense_weights();
  const auto subs = space.enumerate_subseq();
  const auto n = static_cast<Eigen::Index>(subs.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = projection_entry(g, subs[static_cast<std::size_t>(i)],
                                   subs[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

Eigen::SparseMatrix<double> sparse_penalty(const SequenceSpace& space, const GaugeSpec& g) {
  check_gauge_space(space, g);
  space.require_dense_weights();
  g.ratio();
  const auto subs = space.enumerate_subseq();
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    auto chars = spread(subs[i], space.length());
    auto add = [&](const std::vector<int>& other) {
      const Subsequence o = gather(other);
      const double v = penalty_entry(g, o, subs[i]);
      if (v != 0.0) triplets.emplace_back(static_cast<Eigen::Index>(space.index_of(o)), col, v);
    };
    add(chars);
    for (int p = 0; p < space.length(); ++p) {
      const int own = chars[static_cast<std::size_t>(p)];
      // c = -1 drops p (the parent); other values give siblings or children.
      for (int c = -1; c < space.alpha(); ++c) {
        if (c == own) continue;
        chars[static_cast<std::size_t>(p)] = c;
        add(chars);
      }
      chars[static_cast<std::size_t>(p)] = own;
    }
  }
  const auto n = static_cast<Eigen::Index>(subs.size());
  Eigen::SparseMatrix<double> z(n, n);
  z.setFromTriplets(triplets.begin(), triplets.end());
  return z;
}

Eigen::SparseMatrix<double> sparse_b_matrix(const SequenceSpace& space, const GaugeSpec& g) {
  check_gauge_space(space, g);
  space.require_dense_weights();
  const auto subs = space.enumerate_subseq();
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::Index row = 0;
  for (const auto& u : subs) {
    for (int p = 0; p < space.length(); ++p) {
      if (u.char_at(p) >= 0) continue;
      for (const auto& [sub, v] : b_matrix_row(g, u, p)) {
        if (v != 0.0) triplets.emplace_back(row, static_cast<Eigen::Index>(space.index_of(sub)), v);
      }
      ++row;
    }
  }
  Eigen::SparseMatrix<double> b(row, static_cast<Eigen::Index>(subs.size()));
  b.setFromTriplets(triplets.begin(), triplets.end());
  return b;
}

// ---------------------------------------------------------------------------
// Factorized transforms
// ---------------------------------------------------------------------------

const char* to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::GaugeWeights: return "gauge-weights";
    case TransformKind::Hierarchical: return "hierarchical";
    case TransformKind::ZeroSum: return "zero-sum";
    case TransformKind::WildType: return "wild-type";
    case TransformKind::BackgroundAveraged: return "background-averaged";
    case TransformKind::Fourier: return "fourier";
    case TransformKind::WalshHadamard: return "walsh-hadamard";
  }
  return "unknown";
}

TransformKind transform_kind_from_string(std::string_view name) {
  for (auto kind : {TransformKind::GaugeWeights, TransformKind::Hierarchical, TransformKind::ZeroSum,
                    TransformKind::WildType, TransformKind::BackgroundAveraged,
                    TransformKind::Fourier, TransformKind::WalshHadamard}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown transform kind '" + std::string(name) + "'");
}

namespace {

bool uses_reference(TransformKind kind) {
  return kind == TransformKind::WildType || kind == TransformKind::BackgroundAveraged ||
         kind == TransformKind::Fourier || kind == TransformKind::WalshHadamard;
}

bool labels_as_gauge(TransformKind kind) {
  return kind == TransformKind::GaugeWeights || kind == TransformKind::Hierarchical ||
         kind == TransformKind::ZeroSum || kind == TransformKind::WildType;
}

Sequence reference_of(const SequenceSpace& space, const TransformSpec& spec) {
  if (spec.reference) return *spec.reference;
  return Sequence{std::vector<int>(static_cast<std::size_t>(space.length()), 0)};
}

}  // namespace

void validate(const SequenceSpace& space, const TransformSpec& spec) {
  switch (spec.kind) {
    case TransformKind::GaugeWeights:
    case TransformKind::Hierarchical:
      if (!spec.gauge) {
        throw ConfigError(std::string(to_string(spec.kind)) + " transform needs a gauge");
      }
      check_gauge_space(space, *spec.gauge);
      break;
    case TransformKind::WildType:
    case TransformKind::BackgroundAveraged:
      if (!spec.reference) {
        throw ConfigError(std::string(to_string(spec.kind)) + " transform needs a reference sequence");
      }
      break;
    case TransformKind::WalshHadamard:
      if (space.alpha() != 2) throw DomainError("walsh-hadamard transform requires alpha = 2");
      break;
    case TransformKind::ZeroSum:
    case TransformKind::Fourier:
      break;
  }
  if (spec.reference) space.validate(*spec.reference);
}

bool is_valid_index(const SequenceSpace& space, const TransformSpec& spec, const Subsequence& sub) {
  try {
    space.validate(sub);
  } catch (const Error&) {
    return false;
  }
  if (!uses_reference(spec.kind)) return true;
  const Sequence ref = reference_of(space, spec);
  for (std::size_t i = 0; i < sub.positions.size(); ++i) {
    if (sub.chars[i] == ref[static_cast<std::size_t>(sub.positions[i])]) return false;
  }
  return true;
}

std::vector<Subsequence> all_indices(const SequenceSpace& space, const TransformSpec& spec) {
  validate(space, spec);
  std::vector<Subsequence> out;
  for (auto& sub : space.enumerate_subseq()) {
    if (is_valid_index(space, spec, sub)) out.push_back(std::move(sub));
  }
  return out;
}

std::string coefficient_label(const SequenceSpace& space, const TransformSpec& spec,
                              const Subsequence& sub) {
  if (labels_as_gauge(spec.kind)) return space.format(sub);
  return std::string(to_string(spec.kind)) + ":(" + space.format(sub) + ")";
}

Subsequence parse_coefficient(const SequenceSpace& space, const TransformSpec& spec,
                              std::string_view text) {
  Subsequence sub;
  const std::string prefix = std::string(to_string(spec.kind)) + ":(";
  if (text.size() > prefix.size() && text.substr(0, prefix.size()) == prefix && text.back() == ')') {
    sub = space.parse_subsequence(text.substr(prefix.size(), text.size() - prefix.size() - 1));
  } else {
    sub = space.parse_subsequence(text);
  }
  if (!is_valid_index(space, spec, sub)) {
    throw IndexError("'" + std::string(text) + "' is not a valid " + to_string(spec.kind) +
                     " coefficient (it agrees with the reference at some position)");
  }
  return sub;
}

TransformRow transform_row(const SequenceSpace& space, const TransformSpec& spec,
                           const Subsequence& sub) {
  space.validate(sub);
  if (!is_valid_index(space, spec, sub)) {
    throw IndexError("'" + space.format(sub) + "' is not a valid " + to_string(spec.kind) +
                     " coefficient (it agrees with the reference at some position)");
  }
  const int l = space.length();
  const int a = space.alpha();
  const auto s = spread(sub, l);
  const Sequence ref = reference_of(space, spec);
  Eigen::MatrixXd f(l, a);
  for (int p = 0; p < l; ++p) {
    const int sp = s[static_cast<std::size_t>(p)];
    const int wt = ref[static_cast<std::size_t>(p)];
    for (int c = 0; c < a; ++c) {
      const double hit = (sp == c) ? 1.0 : 0.0;
      double v = 0.0;
      switch (spec.kind) {
        case TransformKind::GaugeWeights:
        case TransformKind::Hierarchical: {
          const double eta = spec.kind == TransformKind::Hierarchical ? 1.0 : spec.gauge->eta;
          const double q = spec.gauge->pi(p, c) * eta;
          v = sp >= 0 ? hit - q : q;
          break;
        }
        case TransformKind::ZeroSum:
          v = sp >= 0 ? hit - 1.0 / a : 1.0 / a;
          break;
        case TransformKind::WildType: {
          const double at_wt = (c == wt) ? 1.0 : 0.0;
          v = sp >= 0 ? hit - at_wt : at_wt;
          break;
        }
        case TransformKind::BackgroundAveraged: {
          const double at_wt = (c == wt) ? 1.0 : 0.0;
          v = sp >= 0 ? hit - at_wt : 1.0 / a;
          break;
        }
        case TransformKind::Fourier: {
          // The global alpha^{-l/2} is spread as alpha^{-1/2} per position.
          const double root = std::sqrt(static_cast<double>(a));
          if (sp >= 0) {
            v = (c == wt ? 1.0 : -1.0 / (root - 1.0)) + root * hit;
          } else {
            v = 1.0;
          }
          v /= root;
          break;
        }
        case TransformKind::WalshHadamard:
          v = (sp >= 0 ? (c == wt ? 1.0 : -1.0) : 1.0) / std::sqrt(2.0);
          break;
      }
      f(p, c) = v;
    }
  }
  return TransformRow{coefficient_label(space, spec, sub), sub, std::move(f)};
}

FactorizedTransform transform_rows(const SequenceSpace& space, const TransformSpec& spec,
                                   const std::vector<Subsequence>& indices) {
  validate(space, spec);
  FactorizedTransform m;
  m.alpha = space.alpha();
  m.length = space.length();
  m.rows.reserve(indices.size());
  for (const auto& sub : indices) m.rows.push_back(transform_row(space, spec, sub));
  return m;
}

Eigen::MatrixXd dense_transform(const SequenceSpace& space, const FactorizedTransform& m) {
  space.require_dense();
  const auto seqs = space.enumerate();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows.size()),
                      static_cast<Eigen::Index>(seqs.size()));
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    for (std::size_t x = 0; x < seqs.size(); ++x) {
      double v = 1.0;
      for (int p = 0; p < m.length; ++p) v *= m.rows[i].factors(p, seqs[x][static_cast<std::size_t>(p)]);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x)) = v;
    }
  }
  return out;
}

}  // namespace seqgp
