#include "stemcalyx/error.hpp"

namespace stemcalyx {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::EmptyRegion: return "empty-region error";
    case ErrorKind::Degenerate: return "degenerate-region error";
    case ErrorKind::Numerical: return "numerical error";
    case ErrorKind::Training: return "training error";
    case ErrorKind::Generation: return "generation error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

Error Error::with_stage(const std::string& stage) const {
  return Error(kind_, stage + ": " + what());
}

}  // namespace stemcalyx
