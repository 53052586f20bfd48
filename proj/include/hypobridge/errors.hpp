#pragma once

#include <stdexcept>
#include <string>

namespace hypobridge {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NonSquareError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class AsymmetricError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

/// The pair (A, B) fails the controllability rank test. Carries the rank
/// that was actually achieved so callers can report the deficit.
class NotControllableError : public Error {
 public:
  NotControllableError(const std::string& what, int achieved_rank)
      : Error(what), achieved_rank_(achieved_rank) {}
  int achieved_rank() const { return achieved_rank_; }

 private:
  int achieved_rank_;
};

class SingularGramianError : public Error {
 public:
  using Error::Error;
};

class BadTimeOrderError : public Error {
 public:
  using Error::Error;
};

class BadGridError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, double cond)
      : Error(what), cond_(cond) {}
  double condition() const { return cond_; }

 private:
  double cond_;
};

class UnknownPresetError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace hypobridge
