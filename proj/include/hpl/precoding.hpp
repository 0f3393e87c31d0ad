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

#ifndef HPL_PRECODING_HPP
#define HPL_PRECODING_HPP

#include "hpl/channel.hpp"
#include "hpl/core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace hpl {

enum class Architecture { fully_connected, fixed_subarray, dynamic_subarray, fully_digital };

inline std::string_view to_string(Architecture a) {
    switch (a) {
    case Architecture::fully_connected: return "fully-connected";
    case Architecture::fixed_subarray: return "fixed-subarray";
    case Architecture::dynamic_subarray: return "dynamic-subarray";
    case Architecture::fully_digital: return "fully-digital";
    }
    return "unknown";
}

inline bool is_subarray(Architecture a) {
    return a == Architecture::fixed_subarray || a == Architecture::dynamic_subarray;
}

/// Antenna subsets per RF chain; entry r lists the (0-based) antennas wired to chain r.
using Partition = std::vector<std::vector<Index>>;

/// Analog precoder F_RF (N x N_RF).
struct RfPrecoder {
    CMatrix matrix;
    std::optional<Partition> partition;
    Architecture architecture = Architecture::fully_connected;

    Index num_antennas() const { return matrix.rows(); }
    Index num_rf_chains() const { return matrix.cols(); }

    /// Pass-through F_RF = I_N used to express fully-digital precoders.
    static RfPrecoder identity(Index num_antennas) {
        return {CMatrix::Identity(num_antennas, num_antennas), std::nullopt,
                Architecture::fully_digital};
    }
};

/// Baseband precoder F_D (N_RF x K).
struct DigitalPrecoder {
    CMatrix matrix;
};

/// F = F_RF F_D with the product cached.
class HybridPrecoder {
  public:
    HybridPrecoder(RfPrecoder rf, DigitalPrecoder digital)
        : rf_(std::move(rf)), digital_(std::move(digital)) {
        if (rf_.matrix.cols() != digital_.matrix.rows())
            throw InvalidInput("HybridPrecoder: F_RF columns must match F_D rows");
        composite_ = rf_.matrix * digital_.matrix;
    }

    const RfPrecoder& rf() const { return rf_; }
    const DigitalPrecoder& digital() const { return digital_; }
    const CMatrix& composite() const { return composite_; }

    /// tr(F F^H)
    double transmit_power() const { return composite_.squaredNorm(); }

  private:
    RfPrecoder rf_;
    DigitalPrecoder digital_;
    CMatrix composite_;
};

/// Transmit power P and noise power sigma^2.
struct SnrPoint {
    double transmit_power = 1.0;
    double noise_power = 1.0;

    static SnrPoint from_db(double snr_db) { return {1.0, std::pow(10.0, -snr_db / 10.0)}; }

    double snr() const { return transmit_power / noise_power; }
    double noise_to_power() const { return noise_power / transmit_power; }

    void validate() const {
        if (!(transmit_power > 0.0) || !(noise_power > 0.0))
            throw InvalidInput("SnrPoint: transmit and noise power must be positive");
    }
};

enum class PowerCheck { enforce, skip };

inline constexpr double kPowerTolerance = 1e-9;

namespace detail {

inline void check_se_inputs(const ChannelRealization& channel, const HybridPrecoder& precoder,
                            const SnrPoint& snr, PowerCheck check) {
    snr.validate();
    if (channel.matrix.rows() != precoder.composite().rows() ||
        channel.matrix.cols() != precoder.composite().cols())
        throw InvalidInput("SE: precoder dimensions do not match channel");
    if (check == PowerCheck::enforce) {
        const double p = precoder.transmit_power();
        if (std::abs(p - 1.0) > kPowerTolerance) {
            std::ostringstream msg;
            msg << "SE: precoder is not power-normalized (trace = " << p << ")";
            throw std::logic_error(msg.str());
        }
    }
}

// log2(1 + SINR_k) without argument checks.
inline double user_se_unchecked(const CMatrix& h, const CMatrix& f, Index k,
                                double noise_to_power) {
    const CMatrix cross = h.col(k).adjoint() * f;
    const double signal = std::norm(cross(0, k));
    const double total = cross.squaredNorm();
    const double sinr = signal / (total - signal + noise_to_power);
    return std::max(0.0, std::log2(1.0 + sinr));
}

} // namespace detail

/// Spectral efficiency of user k in bits/s/Hz.
inline double user_se(const ChannelRealization& channel, const HybridPrecoder& precoder,
                      const SnrPoint& snr, Index user, PowerCheck check = PowerCheck::enforce) {
    detail::check_se_inputs(channel, precoder, snr, check);
    if (user < 0 || user >= channel.num_users())
        throw InvalidInput("user_se: user index out of range");
    return detail::user_se_unchecked(channel.matrix, precoder.composite(), user,
                                     snr.noise_to_power());
}

inline std::vector<double> per_user_se(const ChannelRealization& channel,
                                       const HybridPrecoder& precoder, const SnrPoint& snr,
                                       PowerCheck check = PowerCheck::enforce) {
    detail::check_se_inputs(channel, precoder, snr, check);
    std::vector<double> out(static_cast<std::size_t>(channel.num_users()));
    for (Index k = 0; k < channel.num_users(); ++k)
        out[static_cast<std::size_t>(k)] = detail::user_se_unchecked(
            channel.matrix, precoder.composite(), k, snr.noise_to_power());
    return out;
}

inline double sum_se(const ChannelRealization& channel, const HybridPrecoder& precoder,
                     const SnrPoint& snr, PowerCheck check = PowerCheck::enforce) {
    double total = 0.0;
    for (double r : per_user_se(channel, precoder, snr, check))
        total += r;
    return total;
}

/// F_D / sqrt(tr(F_RF F_D F_D^H F_RF^H))
inline DigitalPrecoder normalize_power(const RfPrecoder& rf, const DigitalPrecoder& digital) {
    if (rf.matrix.cols() != digital.matrix.rows())
        throw InvalidInput("normalize_power: F_RF columns must match F_D rows");
    const double power = (rf.matrix * digital.matrix).squaredNorm();
    if (!(power > 0.0) || !std::isfinite(power))
        throw DegenerateInput("normalize_power: composite precoder is zero or non-finite");
    return {digital.matrix / std::sqrt(power)};
}

inline HybridPrecoder make_normalized(RfPrecoder rf, const DigitalPrecoder& digital) {
    DigitalPrecoder scaled = normalize_power(rf, digital);
    return {std::move(rf), std::move(scaled)};
}

/// Structural diagnostics for an analog precoder.
struct RfReport {
    Architecture architecture = Architecture::fully_connected;
    double max_modulus_deviation = 0.0; // max | |F(n,r)| - 1 | over the support
    double max_off_support = 0.0;       // max |F(n,r)| outside the support (subarray only)
    bool partition_present = false;
    bool partition_disjoint = true;
    bool partition_covers = true;
    bool partition_equal_size = true;
    std::optional<double> semi_unitary_deviation; // ||F^H F - N I||_F (fully-connected only)
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

inline std::ostream& operator<<(std::ostream& os, const RfReport& r) {
    os << "architecture: " << to_string(r.architecture) << '\n'
       << "max unit-modulus deviation: " << r.max_modulus_deviation << '\n';
    if (is_subarray(r.architecture))
        os << "max off-support magnitude: " << r.max_off_support << '\n'
           << "partition disjoint/covers/equal-size: " << r.partition_disjoint << '/'
           << r.partition_covers << '/' << r.partition_equal_size << '\n';
    if (r.semi_unitary_deviation)
        os << "semi-unitary deviation ||F^H F - N I||_F: " << *r.semi_unitary_deviation << '\n';
    for (const auto& v : r.violations)
        os << "violation: " << v << '\n';
    return os;
}

inline constexpr double kUnitModulusTolerance = 1e-12;

inline RfReport validate_rf(const RfPrecoder& rf) {
    RfReport rep;
    rep.architecture = rf.architecture;
    if (rf.architecture == Architecture::fully_digital)
        return rep;

    const Index n = rf.num_antennas();
    const Index nrf = rf.num_rf_chains();

    if (!is_subarray(rf.architecture)) {
        for (Index j = 0; j < nrf; ++j)
            for (Index i = 0; i < n; ++i)
                rep.max_modulus_deviation =
                    std::max(rep.max_modulus_deviation, std::abs(std::abs(rf.matrix(i, j)) - 1.0));
        const CMatrix gram = rf.matrix.adjoint() * rf.matrix;
        rep.semi_unitary_deviation =
            (gram - static_cast<double>(n) * CMatrix::Identity(nrf, nrf)).norm();
        if (rep.max_modulus_deviation > kUnitModulusTolerance)
            rep.violations.emplace_back("entry off the unit circle");
        return rep;
    }

    rep.partition_present = rf.partition.has_value();
    if (!rep.partition_present) {
        rep.violations.emplace_back("subarray precoder without partition");
        return rep;
    }
    const Partition& part = *rf.partition;
    if (static_cast<Index>(part.size()) != nrf) {
        rep.violations.emplace_back("partition size differs from RF chain count");
        return rep;
    }

    std::vector<int> owner(static_cast<std::size_t>(n), -1);
    const std::size_t expected = nrf > 0 ? static_cast<std::size_t>(n / nrf) : 0;
    for (std::size_t r = 0; r < part.size(); ++r) {
        if (part[r].size() != expected || n % nrf != 0)
            rep.partition_equal_size = false;
        for (Index a : part[r]) {
            if (a < 0 || a >= n) {
                rep.partition_covers = false;
                continue;
            }
            auto& o = owner[static_cast<std::size_t>(a)];
            if (o != -1)
                rep.partition_disjoint = false;
            o = static_cast<int>(r);
        }
    }
    if (std::any_of(owner.begin(), owner.end(), [](int o) { return o == -1; }))
        rep.partition_covers = false;

    for (Index j = 0; j < nrf; ++j) {
        for (Index i = 0; i < n; ++i) {
            const double mag = std::abs(rf.matrix(i, j));
            if (owner[static_cast<std::size_t>(i)] == static_cast<int>(j))
                rep.max_modulus_deviation = std::max(rep.max_modulus_deviation, std::abs(mag - 1.0));
            else
                rep.max_off_support = std::max(rep.max_off_support, mag);
        }
    }

    if (!rep.partition_disjoint)
        rep.violations.emplace_back("partition sets overlap");
    if (!rep.partition_covers)
        rep.violations.emplace_back("partition does not cover every antenna");
    if (!rep.partition_equal_size)
        rep.violations.emplace_back("partition sets are not of size N/N_RF");
    if (rep.max_modulus_deviation > kUnitModulusTolerance)
        rep.violations.emplace_back("supported entry off the unit circle");
    if (rep.max_off_support != 0.0)
        rep.violations.emplace_back("nonzero entry outside the subarray support");
    return rep;
}

} // namespace hpl

#endif // HPL_PRECODING_HPP
