#pragma once

#include <stdexcept>
#include <string>

namespace depbayes {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// cod(f) != dom(g) in a composition.
struct DomainMismatch : Error {
  using Error::Error;
};

// Mixing finite and gaussian values in one operation.
struct InstanceMismatch : Error {
  using Error::Error;
};

// Shapes or objects of two morphisms do not line up.
struct SignatureMismatch : Error {
  using Error::Error;
};

// Marginalisation requested on an object with no recorded factorisation.
struct NotAProduct : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

// A finite state with no entry above the support threshold.
struct EmptySupport : Error {
  using Error::Error;
};

// Observation with predictive probability below threshold.
struct UnsupportedObservation : Error {
  using Error::Error;
};

struct UnknownLaw : Error {
  using Error::Error;
};

// Malformed input data (matrices, model files).
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace depbayes
