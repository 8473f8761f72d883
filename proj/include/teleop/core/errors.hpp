#pragma once

#include <stdexcept>
#include <string>

namespace teleop {

/// A world, map, or scenario document failed validation.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace teleop
