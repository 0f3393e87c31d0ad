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

#ifndef HPL_CHANNEL_HPP
#define HPL_CHANNEL_HPP

#include "hpl/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hpl {

/// Uniform linear array at the base station.
struct ArrayGeometry {
    Index num_antennas = 1;
    double spacing_ratio = 0.5; // d / lambda

    void validate() const {
        if (num_antennas < 1)
            throw InvalidInput("ArrayGeometry: num_antennas must be >= 1");
        if (!(spacing_ratio > 0.0) || !std::isfinite(spacing_ratio))
            throw InvalidInput("ArrayGeometry: spacing_ratio must be positive and finite");
    }
};

/// Multipath parameters of one user: complex gains and angles of departure (radians).
struct PathSet {
    std::vector<cplx> gains;
    std::vector<double> angles;

    std::size_t size() const { return gains.size(); }

    void validate() const {
        if (gains.empty() || gains.size() != angles.size())
            throw InvalidInput("PathSet: gains and angles must have equal, nonzero length");
        for (double a : angles)
            if (!(a >= -kPi && a <= kPi))
                throw InvalidInput("PathSet: angle outside [-pi, pi]");
    }
};

/// One channel draw: per-user paths plus the assembled N x K matrix.
struct ChannelRealization {
    std::vector<PathSet> per_user_paths;
    CMatrix matrix;

    Index num_antennas() const { return matrix.rows(); }
    Index num_users() const { return matrix.cols(); }
};

/// Sample (or analytic) channel covariance, N x N Hermitian PSD.
struct CovarianceEstimate {
    CMatrix matrix;
    Index sample_count = 0;
};

// Random streams ------------------------------------------------------------

using RandomStream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream for trial `trial` of an experiment rooted at `root_seed`.
/// Streams depend only on (root_seed, trial), so trials can run in any order.
inline RandomStream trial_stream(std::uint64_t root_seed, std::uint64_t trial) {
    const std::uint64_t a = splitmix64(root_seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(trial + 0xD1B54A32D192ED03ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
    return RandomStream(seq);
}

/// Circularly-symmetric complex Gaussian with unit variance.
inline cplx draw_cn01(RandomStream& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

// Operations ----------------------------------------------------------------

/// a(theta)[n] = exp(j 2 pi (d/lambda) n sin(theta)), n = 0..N-1.
inline CVector array_response(double angle, const ArrayGeometry& geometry) {
    if (!std::isfinite(angle))
        throw InvalidInput("array_response: angle is not finite");
    geometry.validate();
    const double step = 2.0 * kPi * geometry.spacing_ratio * std::sin(angle);
    CVector a(geometry.num_antennas);
    for (Index n = 0; n < geometry.num_antennas; ++n)
        a(n) = std::polar(1.0, step * static_cast<double>(n));
    return a;
}

/// h = (1/sqrt(L)) sum_l alpha_l a(theta_l)
inline CVector assemble_user_channel(const PathSet& paths, const ArrayGeometry& geometry) {
    paths.validate();
    CVector h = CVector::Zero(geometry.num_antennas);
    for (std::size_t l = 0; l < paths.size(); ++l)
        h += paths.gains[l] * array_response(paths.angles[l], geometry);
    return h / std::sqrt(static_cast<double>(paths.size()));
}

/// Builds the realization from explicit path parameters.
inline ChannelRealization assemble_channel(std::vector<PathSet> per_user_paths,
                                           const ArrayGeometry& geometry) {
    geometry.validate();
    if (per_user_paths.empty())
        throw InvalidInput("assemble_channel: at least one user required");
    ChannelRealization out;
    out.matrix.resize(geometry.num_antennas, static_cast<Index>(per_user_paths.size()));
    for (std::size_t k = 0; k < per_user_paths.size(); ++k)
        out.matrix.col(static_cast<Index>(k)) = assemble_user_channel(per_user_paths[k], geometry);
    out.per_user_paths = std::move(per_user_paths);
    return out;
}

/// Draws angles uniform on [-pi, pi] for K users with L paths each.
inline std::vector<std::vector<double>> draw_angles(Index num_users, Index num_paths,
                                                    RandomStream& rng) {
    std::uniform_real_distribution<double> uniform(-kPi, kPi);
    std::vector<std::vector<double>> angles(static_cast<std::size_t>(num_users));
    for (auto& user : angles) {
        user.resize(static_cast<std::size_t>(num_paths));
        for (double& a : user)
            a = uniform(rng);
    }
    return angles;
}

/// Draws fresh CN(0,1) gains on fixed angles.
inline ChannelRealization channel_with_angles(const std::vector<std::vector<double>>& angles,
                                              const ArrayGeometry& geometry, RandomStream& rng) {
    std::vector<PathSet> paths(angles.size());
    for (std::size_t k = 0; k < angles.size(); ++k) {
        paths[k].angles = angles[k];
        paths[k].gains.resize(angles[k].size());
        for (cplx& g : paths[k].gains)
            g = draw_cn01(rng);
    }
    return assemble_channel(std::move(paths), geometry);
}

/// Geometric multipath channel with i.i.d. CN(0,1) gains and uniform AoDs.
inline ChannelRealization generate_channel(const ArrayGeometry& geometry, Index num_users,
                                           Index num_paths, RandomStream& rng) {
    geometry.validate();
    if (num_users < 1 || num_paths < 1)
        throw InvalidInput("generate_channel: num_users and num_paths must be >= 1");
    const auto angles = draw_angles(num_users, num_paths, rng);
    return channel_with_angles(angles, geometry, rng);
}

/// (1/T_s) sum_i H[i] H[i]^H
inline CovarianceEstimate sample_covariance(std::span<const ChannelRealization> channels) {
    if (channels.empty())
        throw InvalidInput("sample_covariance: empty channel list");
    const Index n = channels.front().num_antennas();
    CovarianceEstimate out;
    out.matrix = CMatrix::Zero(n, n);
    for (const auto& ch : channels) {
        if (ch.num_antennas() != n)
            throw InvalidInput("sample_covariance: channels disagree on antenna count");
        out.matrix.selfadjointView<Eigen::Lower>().rankUpdate(ch.matrix);
    }
    out.matrix = out.matrix.selfadjointView<Eigen::Lower>();
    out.sample_count = static_cast<Index>(channels.size());
    out.matrix /= static_cast<double>(out.sample_count);
    return out;
}

/// Covariance implied by known path angles: sum_k (1/L) sum_l a(theta_kl) a(theta_kl)^H.
inline CovarianceEstimate analytic_covariance(const std::vector<std::vector<double>>& angles,
                                              const ArrayGeometry& geometry) {
    geometry.validate();
    CovarianceEstimate out;
    out.matrix = CMatrix::Zero(geometry.num_antennas, geometry.num_antennas);
    for (const auto& user : angles) {
        const double inv_l = 1.0 / static_cast<double>(user.size());
        for (double theta : user) {
            const CVector a = array_response(theta, geometry);
            out.matrix.noalias() += inv_l * a * a.adjoint();
        }
    }
    out.sample_count = 1;
    return out;
}

} // namespace hpl

#endif // HPL_CHANNEL_HPP
