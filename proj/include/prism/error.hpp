/*
 * Copyright (c) 2026, The Prism Curriculum Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prism {

enum class ErrorKind {
  ZeroVector,
  NonFinite,
  DimMismatch,
  ParseError,
  DuplicateId,
  TooFewPoints,
  IoError,
  FormatError,
  BadParam,
  LengthMismatch,
  IndexOutOfRange,
  EmptyRollouts,
  MissingVector,
  GroupTooSmall,
  SupportViolation,
  NotNormalized,
  AllZero,
  NumericFailure,
};

inline std::string_view to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::BadParam: return "BadParam";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptyRollouts: return "EmptyRollouts";
    case ErrorKind::MissingVector: return "MissingVector";
    case ErrorKind::GroupTooSmall: return "GroupTooSmall";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

/// Every failure raised by the engine. what() is "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace prism
