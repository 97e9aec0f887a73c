#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqgp/errors.hpp"
#include "seqgp/gauges.hpp"
#include "seqgp/kernels.hpp"
#include "seqgp/linalg.hpp"
#include "seqgp/regress.hpp"
#include "seqgp/seqspace.hpp"

namespace seqgp::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericalError = 4,
  kVerificationFailed = 5,
};

int exit_code_for(ErrorKind kind);

struct OutputOptions {
  bool covariance = false;
  int precision = 10;
};

/// A parsed run configuration (a JSON document; unknown keys are rejected).
struct RunConfig {
  SequenceSpace space;
  std::string kernel_family;
  AnyKernel kernel;
  std::optional<GaugeSpec> gauge;
  std::optional<double> noise_variance;
  TransformSpec transform;
  JitterPolicy jitter;
  OutputOptions output;
};

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);

/// Header "sequence,value"; one row per observation. Errors name the data
/// row (1-based, header excluded) and the offending content.
TrainingData parse_training_csv(std::istream& in, const SequenceSpace& space,
                                double noise_variance);
TrainingData load_training_csv(const std::string& path, const SequenceSpace& space,
                               double noise_variance);

/// Coefficient indices, one per entry, canonicalized and deduplicated in
/// first-occurrence order.
std::vector<Subsequence> parse_query(const std::vector<std::string>& entries,
                                     const SequenceSpace& space, const TransformSpec& spec);
/// Entries from a file: one per line, blank lines and '#' comments skipped.
std::vector<std::string> read_entries(const std::string& path);
/// Entries from a comma-separated list.
std::vector<std::string> split_list(std::string_view list);

/// Coefficient table: label,mean,sd[,cov columns], or a JSON object.
std::string format_table(const GaussianPosterior& post, const OutputOptions& options, bool json);

/// Runs the command line. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seqgp::cli
