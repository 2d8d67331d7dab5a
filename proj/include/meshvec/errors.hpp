/*
 * Copyright 2026 The meshvec Authors. All rights reserved.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace meshvec {

enum class ErrorCode {
    InvalidInput,
    NonManifoldEdge,
    NonManifoldVertex,
    DegenerateFace,
    InconsistentOrientation,
    IsolatedVertex,
    ZeroNormal,
    EmptyDomain,
    DegenerateHull,
    DimensionMismatch,
    SingularMass,
    ConvergenceFailure,
    TruncationTooLarge,
    NoBoundary,
    NoSpectralGap,
    ZeroEigenvalueIncluded,
    EmptyBases,
    IncompleteBasis,
    SingularSystem,
    PoleFrameUndefined,
    UnmappedLocation,
    EmptyMask,
    ConfigError,
    IoError,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonManifoldEdge: return "NonManifoldEdge";
    case ErrorCode::NonManifoldVertex: return "NonManifoldVertex";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::InconsistentOrientation: return "InconsistentOrientation";
    case ErrorCode::IsolatedVertex: return "IsolatedVertex";
    case ErrorCode::ZeroNormal: return "ZeroNormal";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::DegenerateHull: return "DegenerateHull";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMass: return "SingularMass";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::TruncationTooLarge: return "TruncationTooLarge";
    case ErrorCode::NoBoundary: return "NoBoundary";
    case ErrorCode::NoSpectralGap: return "NoSpectralGap";
    case ErrorCode::ZeroEigenvalueIncluded: return "ZeroEigenvalueIncluded";
    case ErrorCode::EmptyBases: return "EmptyBases";
    case ErrorCode::IncompleteBasis: return "IncompleteBasis";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::PoleFrameUndefined: return "PoleFrameUndefined";
    case ErrorCode::UnmappedLocation: return "UnmappedLocation";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , m_code(code)
    {}

    ErrorCode code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}

} // namespace meshvec
