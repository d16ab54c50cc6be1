#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hardc {

// Broad category used by the command-line front end to pick an exit code.
enum class ErrorKind { usage, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define HARDC_DEFINE_ERROR(Name, Kind)                                            \
  class Name : public Error {                                                     \
   public:                                                                        \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, #Name ": " + what) {} \
  }

HARDC_DEFINE_ERROR(InsufficientClass, data);
HARDC_DEFINE_ERROR(ConstantSignal, numeric);
HARDC_DEFINE_ERROR(InvalidBand, data);
HARDC_DEFINE_ERROR(UnstableDesign, numeric);
HARDC_DEFINE_ERROR(SignalTooShort, data);
HARDC_DEFINE_ERROR(ShapeMismatch, data);
HARDC_DEFINE_ERROR(NumericError, numeric);
HARDC_DEFINE_ERROR(GraphStale, data);
HARDC_DEFINE_ERROR(SpecError, usage);
HARDC_DEFINE_ERROR(EmptyDataset, data);
HARDC_DEFINE_ERROR(MissingClass, data);
HARDC_DEFINE_ERROR(LengthMismatch, data);
HARDC_DEFINE_ERROR(IndexOutOfRange, data);
HARDC_DEFINE_ERROR(EmptyMatrix, data);
HARDC_DEFINE_ERROR(FormatError, data);

#undef HARDC_DEFINE_ERROR

// A malformed line in one of the text formats. Line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string reason);
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Wraps an error raised inside one stage of the preprocessing pipeline.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace hardc
