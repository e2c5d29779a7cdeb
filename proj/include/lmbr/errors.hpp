#pragma once

#include <stdexcept>
#include <string>

namespace lmbr {

/// Malformed or inconsistent input data (bad lattice lines, cycles, empty lists).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure talking to an external scorer process or socket.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lmbr
