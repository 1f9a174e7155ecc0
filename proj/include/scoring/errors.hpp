#pragma once

#include <stdexcept>
#include <string>

namespace scoring {

// Base class for every error the library raises on purpose. Callers that want
// a single catch site can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class NotPositiveDefinite : public Error {
public:
  NotPositiveDefinite(const std::string& msg, std::size_t pivot)
      : Error(msg), pivot_index(pivot) {}
  std::size_t pivot_index;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// y outside the support of a discrete distribution, or a density requested
// where none exists.
class SupportError : public Error {
public:
  using Error::Error;
};

class UnsupportedDistribution : public Error {
public:
  using Error::Error;
};

// Zero kernel spread (point mass / constant ensemble) where a log or sqrt
// transform needs e_pp > 0.
class DegenerateDistribution : public Error {
public:
  using Error::Error;
};

class NonFiniteExpectation : public Error {
public:
  using Error::Error;
};

// Quadratic-form weights do not sum to zero.
class WeightSumError : public Error {
public:
  using Error::Error;
};

// Transform score applied to a score value with the wrong sign.
class SignError : public Error {
public:
  using Error::Error;
};

// Monte-Carlo noise too large relative to the signal being estimated.
class NoiseDominated : public Error {
public:
  using Error::Error;
};

class NonConvergence : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t line) : Error(msg), line_number(line) {}
  std::size_t line_number;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// Rethrows e with context prepended, preserving the concrete type so callers
// can still dispatch on it (the CLI maps types to exit codes).
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& ctx) {
  const std::string msg = ctx + ": " + e.what();
  if (auto* p = dynamic_cast<const NotPositiveDefinite*>(&e))
    throw NotPositiveDefinite(msg, p->pivot_index);
  if (dynamic_cast<const DimensionMismatch*>(&e)) throw DimensionMismatch(msg);
  if (dynamic_cast<const SupportError*>(&e)) throw SupportError(msg);
  if (dynamic_cast<const UnsupportedDistribution*>(&e)) throw UnsupportedDistribution(msg);
  if (dynamic_cast<const DegenerateDistribution*>(&e)) throw DegenerateDistribution(msg);
  if (dynamic_cast<const NonFiniteExpectation*>(&e)) throw NonFiniteExpectation(msg);
  if (dynamic_cast<const WeightSumError*>(&e)) throw WeightSumError(msg);
  if (dynamic_cast<const SignError*>(&e)) throw SignError(msg);
  if (dynamic_cast<const NoiseDominated*>(&e)) throw NoiseDominated(msg);
  if (dynamic_cast<const NonConvergence*>(&e)) throw NonConvergence(msg);
  if (auto* p = dynamic_cast<const ParseError*>(&e)) throw ParseError(msg, p->line_number);
  if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
  throw Error(msg);
}

}  // namespace scoring
