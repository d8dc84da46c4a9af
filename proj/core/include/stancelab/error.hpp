#pragma once

#include <stdexcept>
#include <string>

namespace stancelab {

// All library failures surface as this type; the message carries the
// offending file/line/name where one exists.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace stancelab
