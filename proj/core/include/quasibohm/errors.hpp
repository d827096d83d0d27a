#pragma once

#include <stdexcept>
#include <string>

namespace quasibohm {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_parameter"; }
};

/// A position outside the basis domain was requested.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double x) : Error(what), x_(x) {}
  const char* kind() const noexcept override { return "domain"; }
  double x() const noexcept { return x_; }

 private:
  double x_;
};

/// Requested size or index lies outside what an evaluator supports stably.
class CapabilityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "capability"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

/// The Bohm velocity is singular where the density vanishes.
class NodeProximity : public Error {
 public:
  NodeProximity(double x, double t, double density);
  const char* kind() const noexcept override { return "node_proximity"; }
  double x() const noexcept { return x_; }
  double t() const noexcept { return t_; }
  double density() const noexcept { return density_; }

 private:
  double x_;
  double t_;
  double density_;
};

/// Step halving around a node reached the minimum step.
class TrajectorySingularity : public Error {
 public:
  TrajectorySingularity(const std::string& what, double t, double x)
      : Error(what), t_(t), x_(x) {}
  const char* kind() const noexcept override { return "trajectory_singularity"; }
  double t() const noexcept { return t_; }
  double x() const noexcept { return x_; }

 private:
  double t_;
  double x_;
};

}  // namespace quasibohm
