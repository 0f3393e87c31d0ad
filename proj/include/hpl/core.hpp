// SPDX-License-Identifier: Apache-2.0
//
// hpl - hybrid precoding library for multiuser MIMO downlink simulation
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

#ifndef HPL_CORE_HPP
#define HPL_CORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hpl {

inline constexpr std::string_view kVersion = "1.0.0";

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

// Malformed arguments: bad dimensions, non-finite values, out-of-range indices.
class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Input is well-formed but numerically degenerate (zero precoder, singular Gram).
class DegenerateInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Iterative routine could not produce a finite result.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Experiment configuration is inconsistent; raised before any computation.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Diagnostic verbosity, read once from HPL_LOG (quiet, info, debug).
enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level_from_env() {
    const char* env = std::getenv("HPL_LOG");
    if (env == nullptr)
        return LogLevel::quiet;
    const std::string_view v(env);
    if (v == "debug")
        return LogLevel::debug;
    if (v == "info")
        return LogLevel::info;
    return LogLevel::quiet;
}

inline LogLevel log_level() {
    static const LogLevel level = log_level_from_env();
    return level;
}

inline void log(LogLevel level, std::string_view msg) {
    if (level != LogLevel::quiet && static_cast<int>(level) <= static_cast<int>(log_level()))
        std::cerr << "[hpl] " << msg << '\n';
}

// Phase of z with arg(0) := 0.
inline cplx unit_phase(cplx z) {
    const double sq = std::norm(z);
    if (sq > std::numeric_limits<double>::min() && sq < std::numeric_limits<double>::infinity())
        return z / std::sqrt(sq);
    // hypot keeps tiny and huge inputs exact
    const double mag = std::abs(z);
    if (mag == 0.0)
        return {1.0, 0.0};
    return z / mag;
}

// Element-wise e^{j arg(M)}.
inline CMatrix phase_of(const CMatrix& m) {
    return m.unaryExpr([](cplx z) { return unit_phase(z); });
}

} // namespace hpl

#endif // HPL_CORE_HPP
