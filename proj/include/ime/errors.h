// Copyright 2026 The pinyin-ime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IME_ERRORS_H_
#define IME_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ime {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) +
              ": " + what),
        line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// A pinyin token that is not in the lexicon, or not valid for its mode.
class UnknownPinyinError : public Error {
 public:
  UnknownPinyinError(const std::string& token, long position,
                     const std::string& what)
      : Error(what), token_(token), position_(position) {}
  const std::string& token() const { return token_; }
  // Index of the token within the request, -1 if unknown.
  long position() const { return position_; }

 private:
  std::string token_;
  long position_;
};

// Encoded sequence longer than the model's position table.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Inconsistent arguments (length mismatches, mixed modes, bad config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace ime

#endif  // IME_ERRORS_H_
