#pragma once

#include <stdexcept>
#include <string>

namespace dqd {

/// Raised for malformed or inconsistent input data (files, records, vectors).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dqd
