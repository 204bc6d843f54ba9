// Copyright 2026 The synthmeter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace synthmeter {

enum class Errc {
  // corpus
  MissingFile,
  MalformedRow,
  DuplicateId,
  UnsupportedFormat,
  CorruptFile,
  LatentLargerThanImage,
  InvalidQ,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  CodeOutOfRange,
  // neighborhood
  ShapeMismatch,
  TooFewReals,
  ProfileMismatch,
  // metrics
  EmptySyntheticSet,
  EmptyGroup,
  // stats
  EmptySample,
  LengthMismatch,
  ZeroVariance,
  DegenerateRange,
  // utility
  DuplicateKey,
  AccuracyOutOfRange,
  UnpairedUnits,
  MissingRun,
  ZeroBaselineMean,
  SingleClassTrain,
  DimensionMismatch,
  // cli
  InvalidArgument,
  WriteFailure,
  InvariantViolation,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::LatentLargerThanImage: return "LatentLargerThanImage";
    case Errc::InvalidQ: return "InvalidQ";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::CodeOutOfRange: return "CodeOutOfRange";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::TooFewReals: return "TooFewReals";
    case Errc::ProfileMismatch: return "ProfileMismatch";
    case Errc::EmptySyntheticSet: return "EmptySyntheticSet";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::EmptySample: return "EmptySample";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::DegenerateRange: return "DegenerateRange";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::AccuracyOutOfRange: return "AccuracyOutOfRange";
    case Errc::UnpairedUnits: return "UnpairedUnits";
    case Errc::MissingRun: return "MissingRun";
    case Errc::ZeroBaselineMean: return "ZeroBaselineMean";
    case Errc::SingleClassTrain: return "SingleClassTrain";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::WriteFailure: return "WriteFailure";
    case Errc::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library. `code()` identifies the contract that
/// was violated; the message carries file, line or group context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error with `context` prepended to the detail.
  Error with_context(std::string_view context) const {
    return Error(code_, std::string(context) + ": " + detail_);
  }

 private:
  Errc code_;
  std::string detail_;
};

/// Raised by internal consistency checks; maps to exit status 3.
inline void ensure(bool condition, std::string_view what) {
  if (!condition) throw Error(Errc::InvariantViolation, std::string(what));
}

}  // namespace synthmeter
