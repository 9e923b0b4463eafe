#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "fedbht/types.hpp"

namespace fedbht {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public Error {
 public:
  enum class Kind { Parse, Topology, Geometry };

  MeshError(Kind kind, std::string what, std::optional<Index> element = std::nullopt)
      : Error(std::move(what)), kind_(kind), element_(element) {}

  Kind kind() const noexcept { return kind_; }
  std::optional<Index> element() const noexcept { return element_; }

 private:
  Kind kind_;
  std::optional<Index> element_;
};

/// Conductivity tensor failed the positive-definiteness check.
class NotSpdError : public Error {
 public:
  using Error::Error;
};

/// det(F) at or below the deformation floor, or F singular.
class SingularDeformationError : public Error {
 public:
  explicit SingularDeformationError(std::string what, std::optional<Index> element = std::nullopt)
      : Error(std::move(what)), element_(element) {}
  std::optional<Index> element() const noexcept { return element_; }

 private:
  std::optional<Index> element_;
};

class BoundaryConflictError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::string what, Index step) : Error(std::move(what)), step_(step) {}
  Index step() const noexcept { return step_; }

 private:
  Index step_;
};

class StabilityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Reference field has max == min, so normalized errors are undefined.
class RangeZeroError : public Error {
 public:
  using Error::Error;
};

class LinearSolveError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedbht
