// Copyright 2026 The plexpand Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PLEXPAND_ERRORS_HPP
#define PLEXPAND_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace plexpand {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural problems with a tape: broken topological order, arity
// mismatches, invalid exponents, linearizing an un-lowered tape.
class TapeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class UnknownIdentifierError : public ParseError {
 public:
  using ParseError::ParseError;
};

class ArityError : public ParseError {
 public:
  using ParseError::ParseError;
};

class DuplicateElementalError : public Error {
 public:
  using Error::Error;
};

// An elemental was evaluated outside its domain or produced a non-finite
// value.  node() identifies the offending tape node, or -1 when the error
// does not originate from a tape sweep.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg, int node = -1)
      : Error(node >= 0 ? msg + " (node " + std::to_string(node) + ")" : msg),
        node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

// The value exists but the slope does not (e.g. sqrt at 0).
class DerivativeDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A Lipschitz certificate could not be established (unbounded supremum,
// unsupported elemental).
class CertError : public Error {
 public:
  using Error::Error;
};

class NoRootError : public Error {
 public:
  using Error::Error;
};

class EnumerationCapError : public Error {
 public:
  EnumerationCapError(int s, int cap)
      : Error("signature enumeration over " + std::to_string(s) +
              " switching variables exceeds cap " + std::to_string(cap)),
        s_(s) {}
  int switching_count() const { return s_; }

 private:
  int s_;
};

// A root sits on a piece boundary, so the target is not a regular value.
class RegularityError : public Error {
 public:
  using Error::Error;
};

class SingularPieceError : public Error {
 public:
  explicit SingularPieceError(const std::vector<int>& sigma)
      : Error(describe(sigma)), sigma_(sigma) {}
  const std::vector<int>& sigma() const { return sigma_; }

 private:
  static std::string describe(const std::vector<int>& sigma) {
    std::string s = "singular piece matrix for signature [";
    for (size_t i = 0; i < sigma.size(); ++i) {
      if (i) s += ' ';
      s += sigma[i] > 0 ? '+' : '-';
    }
    return s + "]";
  }
  std::vector<int> sigma_;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace plexpand

#endif  // PLEXPAND_ERRORS_HPP
