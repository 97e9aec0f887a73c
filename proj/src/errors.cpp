#include "seqgp/errors.hpp"

namespace seqgp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::SizeGuard: return "size-guard";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Index: return "index";
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
  }
  return "unknown";
}

}  // namespace seqgp
