#pragma once

#include <stdexcept>
#include <string>

namespace harvest {

// A camera corner ray does not reach the ground plane.
class RayHorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateAreaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPolygonError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteObjective : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Carries the offending field path, e.g. "camera.hfov".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& constraint)
      : std::runtime_error(field + ": " + constraint), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace harvest
