#include "hardc/error.hpp"

#include <utility>

namespace hardc {

ParseError::ParseError(std::size_t line, std::string reason)
    : Error(ErrorKind::data, "ParseError: line " + std::to_string(line) + ": " + reason),
      line_(line),
      reason_(std::move(reason)) {}

ConfigError::ConfigError(std::size_t line, const std::string& reason)
    : Error(ErrorKind::usage,
            line == 0 ? "ConfigError: " + reason
                      : "ConfigError: line " + std::to_string(line) + ": " + reason),
      line_(line) {}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}

}  // namespace hardc
