// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adseval {

// Malformed or inconsistent input data. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A text line that could not be tokenized or converted.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally wrong input: wrong field count, missing key, bad byte length.
class FormatError : public InputError {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : InputError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Parsed values violate a type invariant (e.g. non-orthonormal R0_rect).
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

// Non-finite value handed to a writer.
class SerializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry / decoding evaluated outside its domain (z <= 0, degenerate lines, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateLineError : public DomainError {
 public:
  DegenerateLineError(int line_index, double pixel_height)
      : DomainError("vertical keypoint line " + std::to_string(line_index) +
                    " is degenerate (pixel height " + std::to_string(pixel_height) + ")"),
        line_index_(line_index) {}
  int line_index() const noexcept { return line_index_; }

 private:
  int line_index_;
};

class MissingPriorError : public std::out_of_range {
 public:
  explicit MissingPriorError(const std::string& cls)
      : std::out_of_range("no mean dimensions configured for class '" + cls + "'") {}
};

// Recall is undefined when there are no ground truths to recall.
class UndefinedRecallError : public std::invalid_argument {
 public:
  UndefinedRecallError() : std::invalid_argument("recall is undefined: zero evaluated ground truths") {}
};

// Frames do not line up (prediction without ground truth, missing point cloud, ...).
// The CLI maps these to exit code 3.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adseval
