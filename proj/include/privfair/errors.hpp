#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace privfair {

// Exit codes used by the CLI; library errors map onto these.
enum class ExitCode : int {
  ok = 0,
  internal = 1,
  parse = 2,
  network = 3,
  protocol_abort = 4,
  preprocessing_exhausted = 5,
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const { return ExitCode::internal; }
};

// Malformed input files, bad values, inconsistent dimensions in loaded data.
struct ParseError : Error {
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::parse; }
};

// Encode called on a value outside the representable range.
struct RangeError : Error {
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::parse; }
};

// Dimension mismatch between model, dataset and protocol arguments.
struct ShapeError : Error {
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::parse; }
};

// A peer could not be reached or a connection was lost outside a round.
struct NetworkError : Error {
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::network; }
};

// A round-level contract violation: timeout, wrong round number, wrong
// session, unexpected sender.
struct ProtocolAbort : Error {
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::protocol_abort; }
};

// The dealer-supplied pool of correlated randomness ran out mid-protocol.
struct PreprocessingExhausted : Error {
  using Error::Error;
  ExitCode exit_code() const override {
    return ExitCode::preprocessing_exhausted;
  }
};

// Replicated-share pair consistency violated during reconstruction.
struct IntegrityError : Error {
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::protocol_abort; }
};

}  // namespace privfair
