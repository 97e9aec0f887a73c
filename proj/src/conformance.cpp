#include <cmath>
#include <functional>
#include <limits>

#include "seqgp/errors.hpp"
#include "seqgp/linalg.hpp"
#include "seqgp/oracle.hpp"
#include "seqgp/posterior.hpp"

namespace seqgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Comparison {
 public:
  Comparison(std::string name, double tolerance) {
    result_.name = std::move(name);
    result_.tolerance = tolerance;
  }

  /// Runs one trial; an exception counts as an infinite error.
  void trial(const std::function<double()>& body) {
    double err;
    try {
      err = body();
    } catch (const std::exception&) {
      err = kInf;
    }
    if (std::isnan(err)) err = kInf;
    ++result_.trials;
    result_.max_error = std::max(result_.max_error, err);
  }

  ConformanceResult finish() {
    result_.passed = result_.trials > 0 && result_.max_error <= result_.tolerance;
    return result_;
  }

 private:
  ConformanceResult result_;
};

SequenceSpace space_for(int alpha, int length) {
  return SequenceSpace(std::string("abcd").substr(0, static_cast<std::size_t>(alpha)), length);
}

/// Cycles (alpha, l) through {2,3} x {2,3}.
SequenceSpace trial_space(int trial) {
  return space_for(2 + (trial % 2), 2 + ((trial / 2) % 2));
}

std::size_t trial_count(const SequenceSpace& space, int trial) {
  const auto n = static_cast<std::size_t>(space.sequence_count());
  const std::size_t options[] = {1, n / 2, n};
  return options[static_cast<std::size_t>(trial / 4) % 3];
}

Eigen::VectorXd gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-12);
  return max_abs_diff(a, b) / scale;
}

Eigen::VectorXd project_full(const SequenceSpace& space, const Eigen::MatrixXd& p,
                             const Eigen::VectorXd& f) {
  // P restricted to full-length columns applied to f.
  const auto seqs = space.enumerate();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p.rows());
  Subsequence full;
  for (int q = 0; q < space.length(); ++q) full.positions.push_back(q);
  for (std::size_t x = 0; x < seqs.size(); ++x) {
    full.chars = seqs[x].chars;
    w += p.col(static_cast<Eigen::Index>(space.index_of(full))) * f(static_cast<Eigen::Index>(x));
  }
  return w;
}

std::vector<TransformSpec> all_kind_specs(const SequenceSpace& space, std::mt19937_64& rng) {
  std::vector<TransformSpec> out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto pi = random_distribution(space.alpha(), space.length(), rng);
  out.push_back({TransformKind::GaugeWeights, GaugeSpec(unit(rng), pi), std::nullopt});
  out.push_back({TransformKind::Hierarchical, GaugeSpec(1.0, pi), std::nullopt});
  out.push_back({TransformKind::ZeroSum, std::nullopt, std::nullopt});
  out.push_back({TransformKind::WildType, std::nullopt, random_sequence(space, rng)});
  out.push_back({TransformKind::BackgroundAveraged, std::nullopt, random_sequence(space, rng)});
  out.push_back({TransformKind::Fourier, std::nullopt, random_sequence(space, rng)});
  if (space.alpha() == 2) out.push_back({TransformKind::WalshHadamard, std::nullopt, std::nullopt});
  return out;
}

}  // namespace

ConformanceReport run_conformance(std::uint64_t seed, int trials) {
  ConformanceReport report;
  report.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto add = [&](Comparison c) { report.results.push_back(c.finish()); };

  {
    // Exact: the error is the number of failing (l, alpha, d, j) cases.
    Comparison c("krawtchouk-identity", 0.0);
    for (int alpha = 2; alpha <= 4; ++alpha) {
      for (int l = 1; l <= 8; ++l) {
        c.trial([&] {
          double failures = 0;
          for (int d = 0; d <= l; ++d) {
            for (int j = 0; j <= l - d; ++j) {
              std::int64_t lhs = 0;
              for (int k = 0; k <= j; ++k) lhs += binomial(l - k, j - k) * krawtchouk(k, d, l, alpha);
              if (lhs != checked_pow(alpha, j) * binomial(l - d, j)) failures += 1;
            }
          }
          return failures;
        });
      }
    }
    add(c);
  }

  {
    Comparison c("vc-inverse-identity", 1e-10);
    for (int t = 0; t < trials; ++t) {
      c.trial([&] {
        const auto space = trial_space(t);
        const auto k = random_vc_kernel(space, rng);
        const auto seqs = space.enumerate();
        const auto n = static_cast<Eigen::Index>(seqs.size());
        Eigen::MatrixXd a(n, n), b(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < n; ++j) {
            const int d = hamming(seqs[static_cast<std::size_t>(i)], seqs[static_cast<std::size_t>(j)]);
            a(i, j) = k.entry(d);
            b(i, j) = k.inverse_entry(d);
          }
        }
        return max_abs_diff(a * b, Eigen::MatrixXd::Identity(n, n));
      });
    }
    add(c);
  }

  {
    Comparison c("jenga-block-inverse", 1e-12);
    for (int t = 0; t < trials; ++t) {
      c.trial([&] {
        const int alpha = 2 + t % 5;
        const auto spec = random_jenga(alpha, 1, rng);
        const Eigen::MatrixXd block = jenga_block(spec.signs[0], spec.factors[0]);
        return max_abs_diff(jenga_block_inverse(spec.signs[0], spec.factors[0]), block.inverse());
      });
    }
    add(c);
  }

  {
    Comparison c("product-form-closure", 1e-14);
    for (int t = 0; t < trials; ++t) {
      c.trial([&] {
        const auto space = trial_space(t);
        const auto seqs = space.enumerate();
        const GeometricSpec geo{0.1 + 0.8 * unit(rng)};
        const auto con = random_connectedness(space.alpha(), space.length(), rng);
        const auto jen = random_jenga(space.alpha(), space.length(), rng);
        const auto g = geometric_to_product(geo, space);
        const auto cp = connectedness_to_product(con, space.alpha());
        const auto jp = jenga_to_product(jen);
        double err = 0.0;
        for (const auto& x : seqs) {
          for (const auto& y : seqs) {
            double ce = 1.0, je = 1.0;
            for (int p = 0; p < space.length(); ++p) {
              const auto q = static_cast<std::size_t>(p);
              if (x[q] == y[q]) continue;
              ce *= con.z[q];
              je *= static_cast<double>(jen.signs[q]) * jen.factors[q](x[q]) * jen.factors[q](y[q]);
            }
            err = std::max(err, std::abs(g(x, y) - std::pow(geo.beta, hamming(x, y))));
            err = std::max(err, std::abs(cp(x, y) - ce));
            err = std::max(err, std::abs(jp(x, y) - je));
          }
        }
        return err;
      });
    }
    add(c);
  }

  {
    Comparison lp("induced-diag-lambda-pi", 1e-10);
    Comparison od("induced-order-diag", 1e-10);
    for (int t = 0; t < trials; ++t) {
      const auto space = trial_space(t);
      const auto subs = space.enumerate_subseq();
      lp.trial([&] {
        const double lambda = 0.2 + 3.0 * unit(rng);
        const auto pi = random_distribution(space.alpha(), space.length(), rng);
        Eigen::VectorXd diag(static_cast<Eigen::Index>(subs.size()));
        for (std::size_t i = 0; i < subs.size(); ++i) {
          double v = std::pow(lambda, static_cast<double>(subs[i].order()));
          for (std::size_t q = 0; q < subs[i].order(); ++q) v *= pi(subs[i].positions[q], subs[i].chars[q]);
          diag(static_cast<Eigen::Index>(i)) = v;
        }
        const auto k = induced_kernel_diag_lambda_pi(lambda, pi);
        return max_abs_diff(dense_kernel(space, k), dense_induced_kernel(space, diag));
      });
      od.trial([&] {
        std::vector<double> a(static_cast<std::size_t>(space.length() + 1));
        for (auto& v : a) v = 0.2 + 2.0 * unit(rng);
        Eigen::VectorXd diag(static_cast<Eigen::Index>(subs.size()));
        for (std::size_t i = 0; i < subs.size(); ++i) diag(static_cast<Eigen::Index>(i)) = a[subs[i].order()];
        const auto k = induced_vc_from_order_diag(a, space);
        return max_abs_diff(dense_kernel(space, k), dense_induced_kernel(space, diag));
      });
    }
    add(lp);
    add(od);
  }

  {
    Comparison wh("biallelic-walsh-hadamard-prior", 1e-10);
    Comparison wt("biallelic-wild-type-prior", 1e-10);
    for (int t = 0; t < trials; ++t) {
      const auto space = space_for(2, 1 + t % 3);
      std::vector<double> rho(static_cast<std::size_t>(space.length()));
      for (auto& r : rho) r = 0.2 + 3.0 * unit(rng);
      const Eigen::VectorXd inv = biallelic_regularizer(rho).cwiseInverse();
      const auto seqs = space.enumerate();
      auto compare = [&](const Eigen::MatrixXd& basis, auto entry) {
        const Eigen::MatrixXd dense = basis * inv.asDiagonal() * basis.transpose();
        double err = 0.0;
        for (std::size_t i = 0; i < seqs.size(); ++i) {
          for (std::size_t j = 0; j < seqs.size(); ++j) {
            err = std::max(err, std::abs(dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                         entry(rho, seqs[i], seqs[j])));
          }
        }
        return err;
      };
      wh.trial([&] { return compare(dense_wh_basis(space), wh_induced_entry); });
      wt.trial([&] { return compare(dense_wt_basis(space), wt_induced_entry); });
    }
    add(wh);
    add(wt);
  }

  {
    Comparison vc("phit-kinv-phi-vc", 1e-8);
    Comparison pr("phit-kinv-phi-product", 1e-8);
    Comparison jc("corollary-jenga", 1e-10);
    Comparison cc("corollary-connectedness", 1e-10);
    Comparison gc("corollary-geometric", 1e-10);
    for (int t = 0; t < trials; ++t) {
      const auto space = trial_space(t);
      const auto subs = space.enumerate_subseq();
      auto against = [&](const Eigen::MatrixXd& dense, auto closed) {
        double err = 0.0;
        for (std::size_t i = 0; i < subs.size(); ++i) {
          for (std::size_t j = 0; j < subs.size(); ++j) {
            err = std::max(err, std::abs(dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                         closed(subs[i], subs[j])));
          }
        }
        return err;
      };
      vc.trial([&] {
        const auto k = random_vc_kernel(space, rng);
        return against(dense_phit_kinv_phi(space, dense_kernel(space, k)),
                       [&](const auto& a, const auto& b) { return phit_kinv_phi_vc(k, a, b); });
      });
      pr.trial([&] {
        const auto k = random_product_kernel(space.alpha(), space.length(), rng);
        return against(dense_phit_kinv_phi(space, dense_kernel(space, k)),
                       [&](const auto& a, const auto& b) { return phit_kinv_phi_product(k, a, b); });
      });
      jc.trial([&] {
        const auto spec = random_jenga(space.alpha(), space.length(), rng);
        std::vector<Eigen::MatrixXd> blocks;
        for (std::size_t p = 0; p < spec.signs.size(); ++p) blocks.push_back(jenga_block(spec.signs[p], spec.factors[p]));
        const ProductKernel k(std::move(blocks));
        double err = 0.0;
        for (const auto& a : subs) {
          for (const auto& b : subs) {
            err = std::max(err, std::abs(phit_kinv_phi_jenga(spec, a, b) - phit_kinv_phi_product(k, a, b)));
          }
        }
        return err;
      });
      cc.trial([&] {
        const auto spec = random_connectedness(space.alpha(), space.length(), rng);
        const auto k = connectedness_to_product(spec, space.alpha());
        double err = 0.0;
        for (const auto& a : subs) {
          for (const auto& b : subs) {
            err = std::max(err, std::abs(phit_kinv_phi_connectedness(spec, space.alpha(), a, b) -
                                         phit_kinv_phi_product(k, a, b)));
          }
        }
        return err;
      });
      gc.trial([&] {
        const GeometricSpec spec{0.05 + 0.9 * unit(rng)};
        const auto k = geometric_to_product(spec, space);
        double err = 0.0;
        for (const auto& a : subs) {
          for (const auto& b : subs) {
            err = std::max(err, std::abs(phit_kinv_phi_geometric(spec, space, a, b) -
                                         phit_kinv_phi_product(k, a, b)));
          }
        }
        return err;
      });
    }
    add(vc);
    add(pr);
    add(jc);
    add(cc);
    add(gc);
  }

  {
    Comparison idem("projection-idempotence", 1e-10);
    Comparison range("projection-reproduces-function", 1e-10);
    Comparison marg("projection-satisfies-marginalization", 1e-10);
    Comparison btb("penalty-equals-btb", 1e-12);
    Comparison nulls("penalty-null-space-is-gauge", 1e-10);
    const double etas[] = {0.0, 0.3, 1.0};
    for (int t = 0; t < trials; ++t) {
      const auto space = trial_space(t);
      const double eta = etas[t % 3];
      const GaugeSpec g(eta, random_distribution(space.alpha(), space.length(), rng));
      const Eigen::MatrixXd p0 = dense_projection(space, g);
      idem.trial([&] { return max_abs_diff(p0 * p0, p0); });
      range.trial([&] {
        const Eigen::VectorXd f = gaussian_vector(static_cast<Eigen::Index>(space.sequence_count()), rng);
        return max_abs_diff(phi_dense(space) * project_full(space, p0, f), f);
      });
      // The trivial gauge has no finite penalty; the penalty checks use eta = 0.6 instead.
      const GaugeSpec gp = eta == 0.0 ? GaugeSpec(0.6, g.pi) : g;
      const Eigen::MatrixXd p = eta == 0.0 ? dense_projection(space, gp) : p0;
      marg.trial([&] {
        const Eigen::VectorXd v = gaussian_vector(p.cols(), rng);
        return marginalization_residual(space, p * v, gp);
      });
      btb.trial([&] {
        const Eigen::SparseMatrix<double> b = sparse_b_matrix(space, gp);
        const Eigen::MatrixXd bb = Eigen::MatrixXd(b).transpose() * Eigen::MatrixXd(b);
        return max_abs_diff(Eigen::MatrixXd(sparse_penalty(space, gp)), bb);
      });
      nulls.trial([&] {
        // Z annihilates the gauge, and is positive on a complement of it.
        const Eigen::MatrixXd z(sparse_penalty(space, gp));
        const Eigen::MatrixXd basis = column_space(p);
        const double on_gauge = (z * basis).cwiseAbs().maxCoeff();
        const Eigen::MatrixXd comp = column_space(Eigen::MatrixXd::Identity(p.rows(), p.cols()) - p);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(comp.transpose() * z * comp);
        const double rank_ok = eig.eigenvalues().minCoeff() > 1e-8 ? 0.0 : kInf;
        return std::max(on_gauge, rank_ok);
      });
    }
    add(idem);
    add(range);
    add(marg);
    add(btb);
    add(nulls);
  }

  {
    Comparison consistency("transform-matches-projection", 1e-12);
    Comparison formulas("transform-factors-match-formulas", 1e-12);
    Comparison reductions("transform-reductions", 1e-12);
    Comparison fourier("fourier-orthonormality", 1e-12);
    for (int t = 0; t < trials; ++t) {
      const auto space = trial_space(t);
      consistency.trial([&] {
        const GaugeSpec g(unit(rng), random_distribution(space.alpha(), space.length(), rng));
        const TransformSpec spec{TransformKind::GaugeWeights, g, std::nullopt};
        const auto subs = space.enumerate_subseq();
        const Eigen::MatrixXd m = dense_transform(space, transform_rows(space, spec, subs));
        const Eigen::MatrixXd p = dense_projection(space, g);
        Eigen::MatrixXd restricted(m.rows(), m.cols());
        for (Eigen::Index x = 0; x < m.cols(); ++x) {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(m.cols());
          e(x) = 1.0;
          restricted.col(x) = project_full(space, p, e);
        }
        return max_abs_diff(m, restricted);
      });
      formulas.trial([&] {
        double err = 0.0;
        for (const auto& spec : all_kind_specs(space, rng)) {
          const auto idx = all_indices(space, spec);
          err = std::max(err, max_abs_diff(dense_transform(space, transform_rows(space, spec, idx)),
                                            dense_table_transform(space, spec, idx)));
        }
        return err;
      });
      reductions.trial([&] {
        const auto pi = random_distribution(space.alpha(), space.length(), rng);
        const auto subs = space.enumerate_subseq();
        auto dense = [&](const TransformSpec& spec, const std::vector<Subsequence>& idx) {
          return dense_transform(space, transform_rows(space, spec, idx));
        };
        double err = max_abs_diff(dense({TransformKind::GaugeWeights, GaugeSpec(1.0, pi), {}}, subs),
                                  dense({TransformKind::Hierarchical, GaugeSpec(0.5, pi), {}}, subs));
        const auto uniform = ProductDistribution::uniform(space.alpha(), space.length());
        err = std::max(err, max_abs_diff(dense({TransformKind::Hierarchical, GaugeSpec(1.0, uniform), {}}, subs),
                                         dense({TransformKind::ZeroSum, {}, {}}, subs)));
        const Sequence wt = random_sequence(space, rng);
        const TransformSpec wild{TransformKind::WildType, {}, wt};
        const auto wt_idx = all_indices(space, wild);
        const auto point = ProductDistribution::point_mass(wt, space.alpha());
        err = std::max(err, max_abs_diff(dense({TransformKind::Hierarchical, GaugeSpec(1.0, point), {}}, wt_idx),
                                         dense(wild, wt_idx)));
        if (space.alpha() == 2) {
          const TransformSpec ba{TransformKind::BackgroundAveraged, {}, Sequence{std::vector<int>(static_cast<std::size_t>(space.length()), 0)}};
          const auto idx = all_indices(space, ba);
          const Eigen::MatrixXd b = dense(ba, idx);
          const Eigen::MatrixXd h = dense({TransformKind::WalshHadamard, {}, {}}, idx);
          for (std::size_t i = 0; i < idx.size(); ++i) {
            const double k = static_cast<double>(idx[i].order());
            const double l = space.length();
            const double scale = std::pow(-1.0, k) * std::pow(2.0, k - l) * std::pow(2.0, l / 2.0);
            err = std::max(err, (b.row(static_cast<Eigen::Index>(i)) - scale * h.row(static_cast<Eigen::Index>(i)))
                                    .cwiseAbs().maxCoeff());
          }
        }
        return err;
      });
      fourier.trial([&] {
        const TransformSpec spec{TransformKind::Fourier, {}, random_sequence(space, rng)};
        const Eigen::MatrixXd m = dense_transform(space, transform_rows(space, spec, all_indices(space, spec)));
        if (m.rows() != m.cols()) return kInf;
        return max_abs_diff(m * m.transpose(), Eigen::MatrixXd::Identity(m.rows(), m.rows()));
      });
    }
    add(consistency);
    add(formulas);
    add(reductions);
    add(fourier);
  }

  {
    Comparison equiv("four-way-equivalence", 1e-7);
    Comparison member("ridge-weights-in-gauge", 1e-8);
    Comparison ortho("regularizer-orthogonality", 1e-8);
    Comparison closed("regularizer-closed-form", 1e-8);
    const double etas[] = {0.3, 1.0};
    const double noises[] = {0.01, 1.0};
    for (int t = 0; t < trials; ++t) {
      const auto space = trial_space(t);
      const AnyKernel k = (t % 2 == 0) ? AnyKernel(random_product_kernel(space.alpha(), space.length(), rng))
                                       : AnyKernel(random_vc_kernel(space, rng));
      const GaugeSpec g(etas[(t / 2) % 2], random_distribution(space.alpha(), space.length(), rng));
      const auto data = random_training_data(space, trial_count(space, t), noises[(t / 3) % 2], rng);
      const Eigen::MatrixXd kd = dense_kernel(space, as_function(k));
      const Eigen::MatrixXd lambda = build_theta_regularizer(space, kd, g);
      Eigen::VectorXd w;
      equiv.trial([&] {
        const auto seqs = space.enumerate();
        const Eigen::MatrixXd phi = phi_dense(space);
        const Eigen::VectorXd gp = gp_posterior(as_function(k), data, seqs, false).mean;
        w = ridge_weights(space, lambda, data, data.noise_variance);
        const Eigen::VectorXd f_ridge = phi * w;
        const Eigen::VectorXd f_func = ridge_function(space, SpdFactor(kd).inverse(), data, data.noise_variance);
        const Eigen::VectorXd f_bayes = phi * bayes_weight_posterior(space, SpdFactor(lambda).inverse(), data).mean;
        return std::max({rel_diff(f_ridge, gp), rel_diff(f_func, gp), rel_diff(f_bayes, gp),
                         rel_diff(f_ridge, f_func), rel_diff(f_ridge, f_bayes), rel_diff(f_func, f_bayes)});
      });
      member.trial([&] { return marginalization_residual(space, w, g); });
      ortho.trial([&] { return check_orthogonality(space, lambda, g); });
      closed.trial([&] { return max_abs_diff(build_theta_regularizer(space, k, g), lambda); });
    }
    add(equiv);
    add(member);
    add(ortho);
    add(closed);
  }

  {
    Comparison mk("mk-row", 1e-12);
    Comparison mkmt("mkmt-entry", 1e-12);
    Comparison tp("transform-posterior-vs-dense", 1e-8);
    Comparison gw("gauge-weight-posterior-vs-dense", 1e-8);
    Comparison gt("gauge-weight-vs-transform-posterior", 1e-10);
    Comparison bayes("bayes-weight-projection-equality", 1e-8);
    for (int t = 0; t < trials; ++t) {
      const auto space = trial_space(t);
      const auto kernel = random_product_kernel(space.alpha(), space.length(), rng);
      const Eigen::MatrixXd kd = dense_kernel(space, as_function(AnyKernel(kernel)));
      const auto data = random_training_data(space, trial_count(space, t), t % 2 ? 0.01 : 1.0, rng);
      const auto specs = all_kind_specs(space, rng);
      mk.trial([&] {
        double err = 0.0;
        const auto seqs = space.enumerate();
        for (const auto& spec : specs) {
          const auto m = transform_rows(space, spec, all_indices(space, spec));
          const Eigen::MatrixXd dense = dense_table_transform(space, spec, all_indices(space, spec)) * kd;
          for (std::size_t i = 0; i < m.size(); ++i) {
            for (std::size_t y = 0; y < seqs.size(); ++y) {
              err = std::max(err, std::abs(mk_row(m.rows[i], kernel, seqs[y]) -
                                           dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y))));
            }
          }
        }
        return err;
      });
      mkmt.trial([&] {
        double err = 0.0;
        for (const auto& spec : specs) {
          const auto idx = all_indices(space, spec);
          const auto m = transform_rows(space, spec, idx);
          const Eigen::MatrixXd md = dense_table_transform(space, spec, idx);
          const Eigen::MatrixXd dense = md * kd * md.transpose();
          for (std::size_t i = 0; i < m.size(); ++i) {
            for (std::size_t j = 0; j < m.size(); ++j) {
              err = std::max(err, std::abs(mkmt_entry(m.rows[i], m.rows[j], kernel) -
                                           dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
            }
          }
        }
        return err;
      });
      tp.trial([&] {
        double err = 0.0;
        for (const auto& spec : specs) {
          const auto idx = all_indices(space, spec);
          const auto fast = transform_posterior({kernel, data, transform_rows(space, spec, idx), {}});
          const auto slow = dense_transform_posterior(space, dense_table_transform(space, spec, idx), kd, data);
          err = std::max({err, max_abs_diff(fast.mean, slow.mean), max_abs_diff(*fast.covariance, *slow.covariance)});
        }
        return err;
      });
      const GaugeSpec g(unit(rng), random_distribution(space.alpha(), space.length(), rng));
      const auto subs = space.enumerate_subseq();
      const auto fast = gauge_weight_posterior(space, g, kernel, data, subs);
      gw.trial([&] {
        const auto slow = dense_gauge_weight_posterior(space, g, kd, data, subs);
        return std::max(max_abs_diff(fast.mean, slow.mean), max_abs_diff(*fast.covariance, *slow.covariance));
      });
      gt.trial([&] {
        const TransformSpec spec{TransformKind::GaugeWeights, g, std::nullopt};
        const auto other = transform_posterior({kernel, data, transform_rows(space, spec, subs), {}});
        return std::max(max_abs_diff(fast.mean, other.mean), max_abs_diff(*fast.covariance, *other.covariance));
      });
      bayes.trial([&] {
        // Any weight prior W with Phi W Phi^T = K gives the same gauge-fixed posterior.
        const GaugeSpec other(0.3 + 0.7 * unit(rng), random_distribution(space.alpha(), space.length(), rng));
        const Eigen::MatrixXd lambda = build_theta_regularizer(space, kd, other);
        const auto post = bayes_weight_posterior(space, SpdFactor(lambda).inverse(), data);
        const Eigen::MatrixXd p = dense_projection(space, g);
        const Eigen::VectorXd mean = p * post.mean;
        const Eigen::MatrixXd cov = p * *post.covariance * p.transpose();
        return std::max(max_abs_diff(mean, fast.mean), max_abs_diff(cov, *fast.covariance));
      });
    }
    add(mk);
    add(mkmt);
    add(tp);
    add(gw);
    add(gt);
    add(bayes);
  }

  {
    Comparison spectral("spectral-projectors", 1e-10);
    for (int alpha = 2; alpha <= 3; ++alpha) {
      for (int l = 1; l <= 3; ++l) {
        spectral.trial([&] {
          const auto pk = spectral_projectors(space_for(alpha, l));
          const auto n = pk.front().rows();
          Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
          double err = 0.0;
          for (std::size_t a = 0; a < pk.size(); ++a) {
            total += pk[a];
            for (std::size_t b = 0; b < pk.size(); ++b) {
              const Eigen::MatrixXd expect = a == b ? pk[a] : Eigen::MatrixXd::Zero(n, n);
              err = std::max(err, max_abs_diff(pk[a] * pk[b], expect));
            }
          }
          return std::max(err, max_abs_diff(total, Eigen::MatrixXd::Identity(n, n)));
        });
      }
    }
    add(spectral);

    Comparison vc_spectral("vc-spectral-decomposition", 1e-10);
    for (int t = 0; t < trials; ++t) {
      const auto space = trial_space(t);
      const auto vc = random_vc_kernel(space, rng);
      vc_spectral.trial([&] {
        const auto pk = spectral_projectors(space);
        const Eigen::MatrixXd k = dense_kernel(space, as_function(vc));
        const double scale = static_cast<double>(space.sequence_count());
        Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(k.rows(), k.cols());
        for (std::size_t i = 0; i < pk.size(); ++i) rebuilt += scale * vc.lambdas()[i] * pk[i];
        return max_abs_diff(rebuilt, k) / std::max(1.0, k.cwiseAbs().maxCoeff());
      });
    }
    add(vc_spectral);
  }

  return report;
}

}  // namespace seqgp
