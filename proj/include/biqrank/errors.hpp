#pragma once

#include <stdexcept>
#include <string>

namespace biqrank {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A matrix argument is malformed (wrong size, not symmetric, NaN entries).
class InvalidMatrix : public Error {
 public:
  using Error::Error;
};

// A rank bound is outside the meaningful range for the matrix at hand.
class InvalidRank : public Error {
 public:
  using Error::Error;
};

// A 1-based vertex or tensor index is out of range, or an edge repeats.
class InvalidIndex : public Error {
 public:
  using Error::Error;
};

// Two arguments that must share dimensions do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A matrix required to be positive semidefinite is not (beyond tolerance).
class NotPsd : public Error {
 public:
  using Error::Error;
};

// An operation that needs an SOS certificate was given a form without one.
class NotCertified : public Error {
 public:
  using Error::Error;
};

// The bipartite graph contains a quadrilateral.
class NotC4Free : public Error {
 public:
  using Error::Error;
};

// The form is not a 0/1-coefficient square form of a bipartite graph.
class NotSimpleForm : public Error {
 public:
  using Error::Error;
};

// A sum-of-squares decomposition fails validation.
class InvalidDecomposition : public Error {
 public:
  using Error::Error;
};

// A requested problem size exceeds the configured search limit.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

// A file could not be read, written, or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace biqrank
