#pragma once

#include <stdexcept>
#include <string>

namespace intflux {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments or data that violate an operation's preconditions.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a point where the field is not defined (e.g. a charge).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the sampled region of a grid field.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// A singular point sits on or too close to the surface being integrated.
class IllConditionedQuadrature : public Error {
 public:
  IllConditionedQuadrature(const std::string& what, int face) : Error(what), face_(face) {}
  /// Face index in 0..5 ordered (-x, +x, -y, +y, -z, +z).
  int face() const { return face_; }

 private:
  int face_;
};

class NoValidTranslation : public Error {
 public:
  NoValidTranslation(const std::string& what, double best_deficit)
      : Error(what), best_deficit_(best_deficit) {}
  double best_deficit() const { return best_deficit_; }

 private:
  double best_deficit_;
};

/// Boundary data with nonzero total handed to an operation that needs an exact form.
class NotExact : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class CertificateInvalid : public Error {
 public:
  using Error::Error;
};

/// L^p norm estimate that does not settle under singular-ball shrinking.
class LpEstimateDivergence : public Error {
 public:
  using Error::Error;
};

}  // namespace intflux
