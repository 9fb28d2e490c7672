#pragma once

#include <stdexcept>
#include <string>

namespace stemcalyx {

enum class ErrorKind {
  Parameter,
  Format,
  Io,
  EmptyRegion,
  Degenerate,
  Numerical,
  Training,
  Generation,
};

const char* to_string(ErrorKind kind);

// Every failure the library reports carries a kind so the C API and the CLI
// can map it to a status code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

  // Same kind, message prefixed with "<stage>: ".
  Error with_stage(const std::string& stage) const;

 private:
  ErrorKind kind_;
};

}  // namespace stemcalyx
