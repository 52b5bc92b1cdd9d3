#include "qlp/errors.hpp"

namespace qlp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ExtremalViolation: return "extremal-violation";
    case ErrorKind::BadTable: return "bad-table";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Tolerance: return "tolerance";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::StarShape: return "star-shape";
    case ErrorKind::Hypothesis: return "hypothesis";
    case ErrorKind::StepRejected: return "step-rejected";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace qlp
