#pragma once

#include <stdexcept>
#include <string>

namespace pwe {

/// Every recoverable failure in the library surfaces as this exception.
/// Loaders attach the offending path and line number to the message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pwe
