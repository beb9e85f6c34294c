// Copyright 2026 The Authors.
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sift {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: malformed files, mismatched shapes, invalid parameters.
/// The CLI maps these to exit status 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a trustworthy value.
/// The CLI maps these to exit status 3.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : InputError("dimension mismatch: expected " + std::to_string(expected) +
                   ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class ZeroNormRow : public InputError {
 public:
  explicit ZeroNormRow(std::size_t row)
      : InputError("row " + std::to_string(row) + " has zero norm"), row_(row) {}

  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class NotAProbabilityVector : public InputError {
 public:
  using InputError::InputError;
};

class NotEnoughCandidates : public InputError {
 public:
  NotEnoughCandidates(std::size_t requested, std::size_t available)
      : InputError("requested " + std::to_string(requested) +
                   " distinct rows but only " + std::to_string(available) +
                   " are available") {}
};

class InvalidParameter : public InputError {
 public:
  using InputError::InputError;
};

class InstanceTooLarge : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateVariance : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// File format errors.

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class BadMagic : public FormatError {
 public:
  explicit BadMagic(const std::string& path)
      : FormatError(path + ": bad magic, expected \"SIFTEMB1\"") {}
};

class TruncatedPayload : public FormatError {
 public:
  TruncatedPayload(const std::string& path, std::size_t expected,
                   std::size_t actual)
      : FormatError(path + ": payload size mismatch, expected " +
                    std::to_string(expected) + " bytes, found " +
                    std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class NonFiniteValue : public FormatError {
 public:
  NonFiniteValue(std::size_t row, std::size_t col)
      : FormatError("non-finite value at row " + std::to_string(row) +
                    ", column " + std::to_string(col)),
        row_(row),
        col_(col) {}

  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class RaggedRow : public FormatError {
 public:
  RaggedRow(const std::string& path, std::size_t row)
      : FormatError(path + ": row " + std::to_string(row) +
                    " has the wrong number of values"),
        row_(row) {}

  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace sift
