#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qlp {

enum class ErrorKind {
  InvalidArgument,
  ExtremalViolation,  // |e| > m for Reissner-Nordstrom
  BadTable,           // non-monotone or negative tabulated data
  Domain,             // evaluation at or inside the horizon / outside a table
  Tolerance,          // an integrator or fit did not reach its tolerance
  Degenerate,         // non-immersed surface, vanishing mean curvature, ...
  StarShape,          // flow update would leave the star-shaped class
  Hypothesis,         // a hypothesis of the inequality does not hold
  StepRejected,       // a time step failed its postconditions
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qlp
