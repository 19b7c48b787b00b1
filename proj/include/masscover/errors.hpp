#ifndef MASSCOVER_ERRORS_HPP
#define MASSCOVER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace masscover {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user input: bad file, bad dimensions, out-of-range parameter.
/// The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// A checked inequality or invariant failed. The CLI maps this to exit 1.
class AssertionError : public Error {
 public:
  explicit AssertionError(const std::string& what) : Error(what) {}
};

/// Numerical procedure did not converge or could not bracket its target.
class SolveError : public Error {
 public:
  explicit SolveError(const std::string& what) : Error(what) {}
};

}  // namespace masscover

#endif
