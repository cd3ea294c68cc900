#ifndef AUDITLOG_ERRORS_HPP_
#define AUDITLOG_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace auditlog {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Sort discipline violations (agent/data/money terms used in the wrong slot).
struct SortError : Error {
  explicit SortError(const std::string& msg) : Error(msg) {}
};

// Action-kind registration problems (duplicate name, bad template, ...).
struct RegistryError : Error {
  explicit RegistryError(const std::string& msg) : Error(msg) {}
};

enum class LogErrorCode {
  ObserverViolation,
  UncertifiedCondition,
  ExpiredAtLogging,
  BadObligationRef,
};

struct LogError : Error {
  LogErrorCode code;
  LogError(LogErrorCode c, const std::string& msg) : Error(msg), code(c) {}
};

// Scenario execution failure; carries the index of the failing step.
struct ScenarioError : Error {
  std::size_t step_index;
  ScenarioError(std::size_t step, const std::string& msg)
      : Error("step " + std::to_string(step) + ": " + msg), step_index(step) {}
};

struct SourcePos {
  std::uint32_t line = 0;
  std::uint32_t col = 0;
  bool known() const { return line != 0; }
};

struct ParseError : Error {
  std::string file;
  SourcePos pos;
  ParseError(std::string f, SourcePos p, const std::string& msg)
      : Error(f + ":" + std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg),
        file(std::move(f)),
        pos(p) {}
};

}  // namespace auditlog

#endif  // AUDITLOG_ERRORS_HPP_
