// Copyright 2026 The randblock Authors.
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

#include <stdexcept>
#include <string>

namespace randblock {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error { using Error::Error; };
class InvalidScheme : public Error { using Error::Error; };
class UncoveredBlock : public InvalidScheme { using InvalidScheme::InvalidScheme; };
class EmptyResolvent : public Error { using Error::Error; };
class InnerSolveDiverged : public Error { using Error::Error; };
class SolverFailure : public Error { using Error::Error; };
class InvalidFixedPoints : public Error { using Error::Error; };
class InadmissibleGauge : public Error { using Error::Error; };
class OutOfDomain : public Error { using Error::Error; };
class NoEligibleSamples : public Error { using Error::Error; };
class DegenerateSequence : public Error { using Error::Error; };
class UnsupportedSet : public Error { using Error::Error; };
class NotPSD : public Error { using Error::Error; };
class InvalidArgument : public Error { using Error::Error; };

}  // namespace randblock
