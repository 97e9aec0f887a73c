#include "seqgp/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqgp/errors.hpp"
#include "seqgp/oracle.hpp"
#include "seqgp/posterior.hpp"

namespace seqgp::cli {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Data:
    case ErrorKind::Index:
      return kDataError;
    case ErrorKind::Numerical:
      return kNumericalError;
    case ErrorKind::Config:
    case ErrorKind::SizeGuard:
    case ErrorKind::Dimension:
    case ErrorKind::Domain:
    case ErrorKind::Overflow:
      return kConfigError;
  }
  return kConfigError;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, what));
  return out;
}

Eigen::MatrixXd matrix(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw ConfigError(what + " must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(numbers(v.front(), what).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = numbers(v.at(static_cast<std::size_t>(i)), what);
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(what + " rows differ in length");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

void expect_length(std::size_t got, std::size_t want, const std::string& what) {
  if (got != want) {
    throw ConfigError(what + " needs " + std::to_string(want) + " entries, got " + std::to_string(got));
  }
}

ProductDistribution parse_pi(const json& v, const SequenceSpace& space, const std::string& where) {
  if (v.is_string()) {
    const auto text = v.get<std::string>();
    if (text == "uniform") return ProductDistribution::uniform(space.alpha(), space.length());
    const std::string prefix = "wild-type:";
    if (text.rfind(prefix, 0) == 0) {
      return ProductDistribution::point_mass(space.parse_sequence(text.substr(prefix.size())), space.alpha());
    }
    throw ConfigError(where + ".pi must be \"uniform\", \"wild-type:<sequence>\" or probability rows");
  }
  Eigen::MatrixXd probs = matrix(v, where + ".pi");
  if (probs.rows() != space.length() || probs.cols() != space.alpha()) {
    throw ConfigError(where + ".pi must have one row of alpha probabilities per position");
  }
  return ProductDistribution(std::move(probs));
}

double parse_lambda(const json& v, const std::string& what) {
  if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  return number(v, what);
}

AnyKernel parse_kernel(const json& k, const SequenceSpace& space, std::string& family) {
  if (!k.is_object()) throw ConfigError("kernel must be an object");
  const json& fam = require(k, "family", "kernel");
  if (!fam.is_string()) throw ConfigError("kernel.family must be a string");
  family = fam.get<std::string>();
  const auto l = static_cast<std::size_t>(space.length());
  if (family == "vc") {
    reject_unknown(k, {"family", "lambdas"}, "kernel");
    auto lambdas = numbers(require(k, "lambdas", "kernel"), "kernel.lambdas");
    expect_length(lambdas.size(), l + 1, "kernel.lambdas");
    return VcKernel(space, std::move(lambdas));
  }
  if (family == "order-diag") {
    reject_unknown(k, {"family", "a"}, "kernel");
    auto a = numbers(require(k, "a", "kernel"), "kernel.a");
    expect_length(a.size(), l + 1, "kernel.a");
    return induced_vc_from_order_diag(a, space);
  }
  if (family == "product") {
    reject_unknown(k, {"family", "blocks"}, "kernel");
    const json& blocks = require(k, "blocks", "kernel");
    if (!blocks.is_array()) throw ConfigError("kernel.blocks must be an array of matrices");
    expect_length(blocks.size(), l, "kernel.blocks");
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& b : blocks) {
      Eigen::MatrixXd m = matrix(b, "kernel.blocks");
      if (m.rows() != space.alpha() || m.cols() != space.alpha()) {
        throw ConfigError("kernel.blocks entries must be alpha x alpha");
      }
      mats.push_back(std::move(m));
    }
    return ProductKernel(std::move(mats));
  }
  if (family == "geometric") {
    reject_unknown(k, {"family", "beta"}, "kernel");
    return geometric_to_product({number(require(k, "beta", "kernel"), "kernel.beta")}, space);
  }
  if (family == "connectedness") {
    reject_unknown(k, {"family", "z"}, "kernel");
    auto z = numbers(require(k, "z", "kernel"), "kernel.z");
    expect_length(z.size(), l, "kernel.z");
    return connectedness_to_product({std::move(z)}, space.alpha());
  }
  if (family == "jenga") {
    reject_unknown(k, {"family", "signs", "z"}, "kernel");
    JengaSpec spec;
    for (double s : numbers(require(k, "signs", "kernel"), "kernel.signs")) {
      spec.signs.push_back(static_cast<int>(s));
      if (s != 1.0 && s != -1.0) throw ConfigError("kernel.signs entries must be 1 or -1");
    }
    const Eigen::MatrixXd z = matrix(require(k, "z", "kernel"), "kernel.z");
    if (z.rows() != space.length() || z.cols() != space.alpha()) {
      throw ConfigError("kernel.z must have one row of alpha factors per position");
    }
    expect_length(spec.signs.size(), l, "kernel.signs");
    for (Eigen::Index p = 0; p < z.rows(); ++p) spec.factors.push_back(z.row(p).transpose());
    return jenga_to_product(spec);
  }
  if (family == "diag-lambda-pi") {
    reject_unknown(k, {"family", "lambda", "pi"}, "kernel");
    const double lambda = parse_lambda(require(k, "lambda", "kernel"), "kernel.lambda");
    return induced_kernel_diag_lambda_pi(lambda, parse_pi(require(k, "pi", "kernel"), space, "kernel"));
  }
  if (family == "wh" || family == "wt") {
    reject_unknown(k, {"family", "rho"}, "kernel");
    if (space.alpha() != 2) throw ConfigError("kernel family '" + family + "' requires alpha = 2");
    auto rho = numbers(require(k, "rho", "kernel"), "kernel.rho");
    expect_length(rho.size(), l, "kernel.rho");
    return family == "wh" ? wh_to_product(rho) : wt_to_product(rho);
  }
  throw ConfigError("unknown kernel family '" + family + "'");
}

RunConfig parse_config_json(const json& root) {
  reject_unknown(root, {"alphabet", "length", "kernel", "gauge", "noise_variance", "transform",
                        "jitter", "output", "dense_cap"},
                 "config");
  const json& alphabet = require(root, "alphabet", "config");
  if (!alphabet.is_string()) throw ConfigError("alphabet must be a string");
  const json& length = require(root, "length", "config");
  if (!length.is_number_integer()) throw ConfigError("length must be an integer");
  std::uint64_t cap = SequenceSpace::kDefaultDenseCap;
  if (root.contains("dense_cap")) {
    if (!root["dense_cap"].is_number_unsigned() || root["dense_cap"].get<std::uint64_t>() == 0) {
      throw ConfigError("dense_cap must be a positive integer");
    }
    cap = root["dense_cap"].get<std::uint64_t>();
  }
  SequenceSpace space(alphabet.get<std::string>(), length.get<int>(), cap);

  std::string family;
  AnyKernel kernel = parse_kernel(require(root, "kernel", "config"), space, family);

  std::optional<GaugeSpec> gauge;
  if (root.contains("gauge")) {
    const json& g = root["gauge"];
    reject_unknown(g, {"lambda", "pi"}, "gauge");
    const double lambda = g.contains("lambda") ? parse_lambda(g["lambda"], "gauge.lambda")
                                               : std::numeric_limits<double>::infinity();
    const auto pi = g.contains("pi") ? parse_pi(g["pi"], space, "gauge")
                                     : ProductDistribution::uniform(space.alpha(), space.length());
    gauge = GaugeSpec::from_lambda(lambda, pi);
  }

  std::optional<double> noise;
  if (root.contains("noise_variance")) {
    noise = number(root["noise_variance"], "noise_variance");
    if (!(*noise > 0.0) || !std::isfinite(*noise)) throw ConfigError("noise_variance must be > 0");
  }

  TransformSpec transform;
  if (root.contains("transform")) {
    const json& t = root["transform"];
    reject_unknown(t, {"kind", "reference"}, "transform");
    if (t.contains("kind")) {
      if (!t["kind"].is_string()) throw ConfigError("transform.kind must be a string");
      transform.kind = transform_kind_from_string(t["kind"].get<std::string>());
    }
    if (t.contains("reference")) {
      if (!t["reference"].is_string()) throw ConfigError("transform.reference must be a sequence string");
      transform.reference = space.parse_sequence(t["reference"].get<std::string>());
    }
  }
  if (transform.kind == TransformKind::GaugeWeights || transform.kind == TransformKind::Hierarchical) {
    if (!gauge) throw ConfigError(std::string(to_string(transform.kind)) + " transform needs a gauge block");
    transform.gauge = gauge;
  }
  validate(space, transform);

  JitterPolicy jitter;
  if (root.contains("jitter")) {
    jitter.ladder = numbers(root["jitter"], "jitter");
    if (jitter.ladder.empty()) throw ConfigError("jitter must list at least one value");
    for (double j : jitter.ladder) {
      if (!(j >= 0.0) || !std::isfinite(j)) throw ConfigError("jitter values must be finite and >= 0");
    }
  }

  OutputOptions output;
  if (root.contains("output")) {
    const json& o = root["output"];
    reject_unknown(o, {"covariance", "precision"}, "output");
    if (o.contains("covariance")) {
      if (!o["covariance"].is_boolean()) throw ConfigError("output.covariance must be true or false");
      output.covariance = o["covariance"].get<bool>();
    }
    if (o.contains("precision")) {
      if (!o["precision"].is_number_integer()) throw ConfigError("output.precision must be an integer");
      output.precision = o["precision"].get<int>();
      if (output.precision < 1 || output.precision > 17) {
        throw ConfigError("output.precision must be between 1 and 17");
      }
    }
  }

  return RunConfig{std::move(space), family, std::move(kernel), std::move(gauge),
                   noise,            std::move(transform), std::move(jitter), output};
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_config_json(root);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

TrainingData parse_training_csv(std::istream& in, const SequenceSpace& space,
                                double noise_variance) {
  TrainingData data;
  data.noise_variance = noise_variance;
  std::string line;
  if (!std::getline(in, line) || trim(line) != "sequence,value") {
    throw DataError("training CSV must start with the header 'sequence,value'");
  }
  std::vector<double> values;
  int row = 0;
  while (std::getline(in, line)) {
    const std::string text = trim(line);
    if (text.empty()) continue;
    ++row;
    const std::string where = "training data row " + std::to_string(row) + ": ";
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
      throw DataError(where + "expected 'sequence,value', got '" + text + "'");
    }
    const std::string seq = trim(std::string_view(text).substr(0, comma));
    const std::string val = trim(std::string_view(text).substr(comma + 1));
    if (static_cast<int>(seq.size()) != space.length()) {
      throw DataError(where + "sequence '" + seq + "' has length " + std::to_string(seq.size()) +
                      ", expected " + std::to_string(space.length()));
    }
    for (char c : seq) {
      if (space.symbol_index(c) < 0) {
        throw DataError(where + "unknown character '" + std::string(1, c) + "' in '" + seq + "'");
      }
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (val.empty() || used != val.size()) throw DataError(where + "value '" + val + "' is not a number");
    if (!std::isfinite(v)) throw DataError(where + "value '" + val + "' is not finite");
    data.X.push_back(space.parse_sequence(seq));
    values.push_back(v);
  }
  data.y = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return data;
}

TrainingData load_training_csv(const std::string& path, const SequenceSpace& space,
                               double noise_variance) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open training data file '" + path + "'");
  return parse_training_csv(in, space, noise_variance);
}

std::vector<Subsequence> parse_query(const std::vector<std::string>& entries,
                                     const SequenceSpace& space, const TransformSpec& spec) {
  std::vector<Subsequence> out;
  std::set<std::uint64_t> seen;
  for (const auto& entry : entries) {
    Subsequence sub = parse_coefficient(space, spec, trim(entry));
    if (seen.insert(space.index_of(sub)).second) out.push_back(std::move(sub));
  }
  return out;
}

std::vector<std::string> read_entries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    out.push_back(std::move(text));
  }
  return out;
}

std::vector<std::string> split_list(std::string_view list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string item = trim(list.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v, int precision) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double sd_of(double variance) { return std::sqrt(std::max(variance, 0.0)); }

}  // namespace

std::string format_table(const GaussianPosterior& post, const OutputOptions& options, bool json_mode) {
  const int prec = options.precision;
  const bool cov = options.covariance && post.covariance.has_value();
  std::ostringstream out;
  const auto n = post.mean.size();
  if (json_mode) {
    out << "{\"jitter\":" << fmt(post.jitter, prec) << ",\"coefficients\":[";
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i) out << ",";
      out << "{\"label\":" << json(post.labels[static_cast<std::size_t>(i)]).dump()
          << ",\"mean\":" << fmt(post.mean(i), prec) << ",\"sd\":" << fmt(sd_of(post.variance(i)), prec);
      if (cov) {
        out << ",\"covariance\":[";
        for (Eigen::Index j = 0; j < n; ++j) out << (j ? "," : "") << fmt((*post.covariance)(i, j), prec);
        out << "]";
      }
      out << "}";
    }
    out << "]}\n";
    return out.str();
  }
  out << "label,mean,sd";
  if (cov) {
    for (const auto& label : post.labels) out << ",cov[" << label << "]";
  }
  out << "\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    out << post.labels[static_cast<std::size_t>(i)] << "," << fmt(post.mean(i), prec) << ","
        << fmt(sd_of(post.variance(i)), prec);
    if (cov) {
      for (Eigen::Index j = 0; j < n; ++j) out << "," << fmt((*post.covariance)(i, j), prec);
    }
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

namespace {

struct Args {
  std::string config;
  std::string data;
  std::string query;
  std::string coeffs;
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  int samples = 1;
  bool json_mode = false;
};

std::vector<std::string> entries_from(const Args& args) {
  if (!args.query.empty() && !args.coeffs.empty()) {
    throw ConfigError("use either --query or --coeffs, not both");
  }
  if (!args.query.empty()) return read_entries(args.query);
  if (!args.coeffs.empty()) return split_list(args.coeffs);
  return {};
}

double noise_of(const RunConfig& cfg) {
  if (!cfg.noise_variance) throw ConfigError("config needs noise_variance for this subcommand");
  return *cfg.noise_variance;
}

TrainingData data_from(const Args& args, const RunConfig& cfg) {
  const double noise = noise_of(cfg);
  if (args.data.empty()) {
    TrainingData empty;
    empty.noise_variance = noise;
    empty.y.resize(0);
    return empty;
  }
  return load_training_csv(args.data, cfg.space, noise);
}

std::optional<ProductKernel> product_form(const AnyKernel& k) {
  if (const auto* p = std::get_if<ProductKernel>(&k)) return *p;
  return std::nullopt;
}

GaussianPosterior posterior_for(const RunConfig& cfg, const TrainingData& data,
                                const std::vector<Subsequence>& idx, int threads) {
  const auto& space = cfg.space;
  const auto& spec = cfg.transform;
  PosteriorOptions options;
  options.want_covariance = cfg.output.covariance;
  options.threads = threads;
  options.jitter = cfg.jitter;
  const auto product = product_form(cfg.kernel);
  if (!product) {
    // The kernel trick needs a product kernel; VC kernels go through the dense route.
    space.require_dense();
    const auto m = transform_rows(space, spec, idx);
    const Eigen::MatrixXd k = dense_kernel(space, as_function(cfg.kernel));
    auto post = dense_transform_posterior(space, dense_transform(space, m), k, data);
    for (const auto& row : m.rows) post.labels.push_back(row.label);
    return post;
  }
  std::optional<GaugeSpec> gauge;
  switch (spec.kind) {
    case TransformKind::GaugeWeights: gauge = spec.gauge; break;
    case TransformKind::Hierarchical: gauge = GaugeSpec(1.0, spec.gauge->pi); break;
    case TransformKind::ZeroSum: gauge = GaugeSpec::zero_sum(space.alpha(), space.length()); break;
    case TransformKind::WildType:
      gauge = GaugeSpec(1.0, ProductDistribution::point_mass(*spec.reference, space.alpha()));
      break;
    default: break;
  }
  if (gauge) {
    for (const auto& sub : idx) {
      if (!is_valid_index(space, spec, sub)) throw IndexError("invalid coefficient '" + space.format(sub) + "'");
    }
    return gauge_weight_posterior(space, *gauge, *product, data, idx, options);
  }
  return transform_posterior({*product, data, transform_rows(space, spec, idx), options});
}

std::string cmd_posterior(const Args& args, const RunConfig& cfg) {
  const auto data = data_from(args, cfg);
  const auto entries = entries_from(args);
  const auto idx = entries.empty() ? all_indices(cfg.space, cfg.transform)
                                   : parse_query(entries, cfg.space, cfg.transform);
  if (idx.empty()) throw DataError("no coefficients requested");
  return format_table(posterior_for(cfg, data, idx, args.threads), cfg.output, args.json_mode);
}

std::vector<Sequence> sequences_from(const Args& args, const RunConfig& cfg) {
  std::vector<Sequence> out;
  for (const auto& e : entries_from(args)) {
    try {
      out.push_back(cfg.space.parse_sequence(e));
    } catch (const Error& err) {
      throw DataError("query sequence '" + e + "': " + err.what());
    }
  }
  if (out.empty()) throw DataError("no query sequences given (use --query or --coeffs)");
  return out;
}

std::string cmd_predict(const Args& args, const RunConfig& cfg) {
  const auto data = data_from(args, cfg);
  const auto query = sequences_from(args, cfg);
  auto post = gp_posterior(as_function(cfg.kernel), data, query, cfg.output.covariance, cfg.jitter);
  for (const auto& x : query) post.labels.push_back(cfg.space.format(x));
  return format_table(post, cfg.output, args.json_mode);
}

std::string cmd_kernel_eval(const Args& args, const RunConfig& cfg) {
  const auto seqs = sequences_from(args, cfg);
  const int prec = cfg.output.precision;
  std::ostringstream out;
  if (args.json_mode) {
    out << "{\"entries\":[";
  } else {
    out << "x,y,k\n";
  }
  bool first = true;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t j = i; j < seqs.size(); ++j) {
      const double v = kernel_entry(cfg.kernel, seqs[i], seqs[j]);
      const auto x = cfg.space.format(seqs[i]);
      const auto y = cfg.space.format(seqs[j]);
      if (args.json_mode) {
        out << (first ? "" : ",") << "{\"x\":" << json(x).dump() << ",\"y\":" << json(y).dump()
            << ",\"k\":" << fmt(v, prec) << "}";
      } else {
        out << x << "," << y << "," << fmt(v, prec) << "\n";
      }
      first = false;
    }
  }
  if (args.json_mode) out << "]}\n";
  return out.str();
}

std::string cmd_build_regularizer(const Args& args, const RunConfig& cfg) {
  if (!cfg.gauge) throw ConfigError("build-regularizer needs a gauge block");
  const Eigen::MatrixXd lambda = build_theta_regularizer(cfg.space, cfg.kernel, *cfg.gauge);
  const auto subs = cfg.space.enumerate_subseq();
  const int prec = cfg.output.precision;
  std::ostringstream out;
  if (args.json_mode) {
    out << "{\"labels\":[";
    for (std::size_t i = 0; i < subs.size(); ++i) out << (i ? "," : "") << json(cfg.space.format(subs[i])).dump();
    out << "],\"matrix\":[";
    for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
      out << (i ? "," : "") << "[";
      for (Eigen::Index j = 0; j < lambda.cols(); ++j) out << (j ? "," : "") << fmt(lambda(i, j), prec);
      out << "]";
    }
    out << "]}\n";
    return out.str();
  }
  out << "label";
  for (const auto& s : subs) out << "," << cfg.space.format(s);
  out << "\n";
  for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
    out << cfg.space.format(subs[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < lambda.cols(); ++j) out << "," << fmt(lambda(i, j), prec);
    out << "\n";
  }
  return out.str();
}

std::string cmd_simulate(const Args& args, const RunConfig& cfg) {
  if (args.samples < 0) throw ConfigError("--samples must be >= 0");
  const Eigen::MatrixXd k = dense_kernel(cfg.space, as_function(cfg.kernel));
  std::mt19937_64 rng(args.seed);
  const Eigen::MatrixXd draws = sample_function_prior(k, args.samples, rng);
  const auto seqs = cfg.space.enumerate();
  const int prec = cfg.output.precision;
  std::ostringstream out;
  if (args.json_mode) {
    out << "{\"seed\":" << args.seed << ",\"sequences\":[";
    for (std::size_t i = 0; i < seqs.size(); ++i) out << (i ? "," : "") << json(cfg.space.format(seqs[i])).dump();
    out << "],\"samples\":[";
    for (Eigen::Index s = 0; s < draws.cols(); ++s) {
      out << (s ? "," : "") << "[";
      for (Eigen::Index i = 0; i < draws.rows(); ++i) out << (i ? "," : "") << fmt(draws(i, s), prec);
      out << "]";
    }
    out << "]}\n";
    return out.str();
  }
  out << "sequence";
  for (Eigen::Index s = 0; s < draws.cols(); ++s) out << ",sample_" << (s + 1);
  out << "\n";
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    out << cfg.space.format(seqs[i]);
    for (Eigen::Index s = 0; s < draws.cols(); ++s) out << "," << fmt(draws(static_cast<Eigen::Index>(i), s), prec);
    out << "\n";
  }
  return out.str();
}

std::string cmd_verify(const Args& args, bool& passed) {
  const auto report = run_conformance(args.seed);
  passed = report.all_passed();
  std::ostringstream out;
  if (args.json_mode) {
    out << "{\"seed\":" << report.seed << ",\"passed\":" << (passed ? "true" : "false") << ",\"results\":[";
    for (std::size_t i = 0; i < report.results.size(); ++i) {
      const auto& r = report.results[i];
      out << (i ? "," : "") << "{\"name\":" << json(r.name).dump() << ",\"trials\":" << r.trials
          << ",\"max_error\":" << (std::isfinite(r.max_error) ? fmt(r.max_error, 3) : "null")
          << ",\"tolerance\":" << fmt(r.tolerance, 3) << ",\"passed\":" << (r.passed ? "true" : "false") << "}";
    }
    out << "]}\n";
    return out.str();
  }
  out << "# seed " << report.seed << "\n";
  out << "comparison,trials,max_error,tolerance,result\n";
  for (const auto& r : report.results) {
    out << r.name << "," << r.trials << "," << fmt(r.max_error, 3) << "," << fmt(r.tolerance, 3) << ","
        << (r.passed ? "PASS" : "FAIL") << "\n";
  }
  return out.str();
}

void emit(const Args& args, std::ostream& out, const std::string& text) {
  if (args.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(args.out, std::ios::binary);
  if (!file) throw ConfigError("cannot open output file '" + args.out + "'");
  file << text;
}

void report_error(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << "error: code=" << code << " kind=" << kind << " message=" << message << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian-process inference over sequence spaces", "seqgp"};
  app.fallthrough();
  app.require_subcommand(1);
  Args args;
  app.add_option("--config", args.config, "run configuration (JSON)");
  app.add_option("--data", args.data, "training CSV with header sequence,value");
  app.add_option("--query", args.query, "file with one coefficient or sequence per line");
  app.add_option("--coeffs", args.coeffs, "comma-separated coefficients or sequences");
  app.add_option("--out", args.out, "write output here instead of stdout");
  app.add_option("--seed", args.seed, "random seed for simulate and verify");
  app.add_option("--threads", args.threads, "worker threads for posterior")->check(CLI::PositiveNumber);
  app.add_option("--samples", args.samples, "number of prior draws for simulate");
  app.add_flag("--json", args.json_mode, "emit JSON instead of CSV");

  auto* posterior = app.add_subcommand("posterior", "posterior over transform coefficients");
  auto* predict = app.add_subcommand("predict", "GP posterior at query sequences");
  auto* kernel_eval = app.add_subcommand("kernel-eval", "kernel entries for pairs of query sequences");
  auto* build_reg = app.add_subcommand("build-regularizer", "dense gauge-aware regularizer");
  auto* simulate = app.add_subcommand("simulate", "draws from the function-space prior");
  auto* verify = app.add_subcommand("verify", "closed forms against dense oracles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, kConfigError, "usage", e.what());
    return kConfigError;
  }

  try {
    if (verify->parsed()) {
      bool passed = false;
      emit(args, out, cmd_verify(args, passed));
      return passed ? kSuccess : kVerificationFailed;
    }
    if (args.config.empty()) throw ConfigError("--config is required");
    const RunConfig cfg = load_config(args.config);
    std::string text;
    if (posterior->parsed()) text = cmd_posterior(args, cfg);
    if (predict->parsed()) text = cmd_predict(args, cfg);
    if (kernel_eval->parsed()) text = cmd_kernel_eval(args, cfg);
    if (build_reg->parsed()) text = cmd_build_regularizer(args, cfg);
    if (simulate->parsed()) text = cmd_simulate(args, cfg);
    emit(args, out, text);
    return kSuccess;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    report_error(err, code, to_string(e.kind()), e.what());
    return code;
  } catch (const std::exception& e) {
    report_error(err, kConfigError, "internal", e.what());
    return kConfigError;
  }
}

}  // namespace seqgp::cli
