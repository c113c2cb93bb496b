#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace icsad {

// Broad failure classes; the CLI maps each to an exit code.
enum class ErrorKind {
  Usage,     // bad configuration or flags
  Data,      // unreadable or malformed input, non-physical plant
  Detector,  // a detector could not produce a result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class NonPhysical : public Error {
 public:
  explicit NonPhysical(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class IoFailure : public Error {
 public:
  explicit IoFailure(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class SchemaMismatch : public Error {
 public:
  explicit SchemaMismatch(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class UnknownChannel : public Error {
 public:
  explicit UnknownChannel(const std::string& name)
      : Error(ErrorKind::Data, "unknown channel '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DegenerateWindow : public Error {
 public:
  explicit DegenerateWindow(std::size_t index);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class NoPeriodicity : public Error {
 public:
  explicit NoPeriodicity(const std::string& what) : Error(ErrorKind::Detector, what) {}
};

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(const std::string& what) : Error(ErrorKind::Detector, what) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what) : Error(ErrorKind::Detector, what) {}
};

class InsufficientCalibration : public Error {
 public:
  explicit InsufficientCalibration(const std::string& what)
      : Error(ErrorKind::Detector, what) {}
};

}  // namespace icsad
