#pragma once
#include <stdexcept>
#include <string>

namespace carleman {

// Invalid input or configuration.  The CLI maps this to exit status 2.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Pole of a special function or other point outside the domain.
class domain_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// A computation that was set up correctly but could not deliver the
// requested accuracy.  The CLI maps this to exit status 3.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lippmann-Schwinger system too ill-conditioned: the energy is close to an
// embedded eigenvalue or threshold.
class near_exceptional_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

}  // namespace carleman
