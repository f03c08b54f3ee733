// SPDX-License-Identifier: Apache-2.0
//
// qdsim: cross-layer multiuser video streaming simulator
// Copyright (C) 2026 The qdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "qdsim/error.hpp"

namespace qdsim {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NonHermitian: return "NonHermitian";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::NegativeVariance: return "NegativeVariance";
    case Errc::NoSignChange: return "NoSignChange";
    case Errc::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case Errc::DistanceBelowMinimum: return "DistanceBelowMinimum";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::MseOutOfRange: return "MseOutOfRange";
    case Errc::WeightOutOfRange: return "WeightOutOfRange";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::NonMonotonePoints: return "NonMonotonePoints";
    case Errc::BisectionFailure: return "BisectionFailure";
    case Errc::Io: return "Io";
    case Errc::Malformed: return "Malformed";
    case Errc::TraceExhausted: return "TraceExhausted";
    case Errc::BadThresholds: return "BadThresholds";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::MissingArtifacts: return "MissingArtifacts";
    case Errc::EmptyOrAllZero: return "EmptyOrAllZero";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace qdsim
