#include "flightpred/error.hpp"

namespace flightpred {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return "invalid argument";
    case ErrorKind::data:
      return "data error";
    case ErrorKind::numeric:
      return "numeric error";
    case ErrorKind::io:
      return "io error";
  }
  return "error";
}

}  // namespace flightpred
