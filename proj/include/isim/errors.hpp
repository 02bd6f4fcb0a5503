#pragma once

#include <stdexcept>
#include <string>

namespace isim {

// Error categories used across the library. The CLI maps them to exit codes
// (config 3, io 4, numeric 5); everything else is a plain logic error.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct state_error : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace isim
