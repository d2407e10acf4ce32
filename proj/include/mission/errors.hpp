#pragma once

#include <stdexcept>
#include <string>

namespace mission {

// Error taxonomy shared across the toolkit. The CLI maps categories to
// process exit codes: 0 ok, 1 validation, 2 planning infeasibility, 3 I/O.
enum class ErrorCode {
  Validation,
  Planning,
  Io,
  Contract,  // API misuse / precondition violations
};

class MissionError : public std::runtime_error {
public:
  MissionError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

  int exit_code() const {
    switch (code_) {
      case ErrorCode::Validation: return 1;
      case ErrorCode::Planning: return 2;
      case ErrorCode::Io: return 3;
      case ErrorCode::Contract: return 1;
    }
    return 1;
  }

private:
  ErrorCode code_;
};

inline MissionError validation_error(const std::string& msg) {
  return MissionError(ErrorCode::Validation, msg);
}
inline MissionError planning_error(const std::string& msg) {
  return MissionError(ErrorCode::Planning, msg);
}
inline MissionError io_error(const std::string& msg) {
  return MissionError(ErrorCode::Io, msg);
}
inline MissionError contract_error(const std::string& msg) {
  return MissionError(ErrorCode::Contract, msg);
}

}  // namespace mission
