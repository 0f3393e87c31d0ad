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

#ifndef HPL_DIGITAL_DESIGN_HPP
#define HPL_DIGITAL_DESIGN_HPP

#include "hpl/channel.hpp"
#include "hpl/core.hpp"
#include "hpl/precoding.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <vector>

namespace hpl {

/// Channel seen by the baseband stage, H_eff = F_RF^H H (N_RF x K).
///
/// `gram` holds G = H_eff^H H_eff, whose column k is g_k; user k receives
/// stream j through g_k^H w_j when F_D = H_eff W. `power_form` is
/// Q = H_eff^H (F_RF^H F_RF) H_eff, so tr(W^H Q W) is the radiated power of
/// F_RF H_eff W. With F_RF = I (fully-digital) both reduce to H^H H.
struct EffectiveChannel {
    CMatrix matrix;
    CMatrix gram;
    CMatrix power_form;

    Index num_rf_chains() const { return matrix.rows(); }
    Index num_users() const { return matrix.cols(); }
};

inline EffectiveChannel effective_channel(const RfPrecoder& rf, const ChannelRealization& channel) {
    if (rf.num_antennas() != channel.num_antennas())
        throw InvalidInput("effective_channel: F_RF rows must equal the antenna count");
    EffectiveChannel eff;
    if (rf.architecture == Architecture::fully_digital) {
        eff.matrix = channel.matrix;
        eff.gram = channel.matrix.adjoint() * channel.matrix;
        eff.power_form = eff.gram;
        return eff;
    }
    eff.matrix = rf.matrix.adjoint() * channel.matrix;
    eff.gram = eff.matrix.adjoint() * eff.matrix;
    const CMatrix rf_gram = rf.matrix.adjoint() * rf.matrix;
    eff.power_form = eff.matrix.adjoint() * rf_gram * eff.matrix;
    return eff;
}

inline constexpr double kMaxGramCondition = 1e12;

namespace detail {

inline void check_gram_conditioning(const CMatrix& gram, const char* who) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || !(hi / lo < kMaxGramCondition)) {
        std::ostringstream msg;
        msg << who << ": effective Gram is singular or ill-conditioned (eigenvalues " << lo
            << " .. " << hi << ")";
        throw DegenerateInput(msg.str());
    }
}

// tr(W^H Q W)
inline double quadratic_power(const CMatrix& q, const CMatrix& w) {
    return (w.adjoint() * q * w).trace().real();
}

// W = G^{-1} D with D making every composite column carry equal power.
inline CMatrix zf_combiner(const EffectiveChannel& eff) {
    check_gram_conditioning(eff.gram, "zf_precoder");
    CMatrix w = eff.gram.ldlt().solve(CMatrix::Identity(eff.num_users(), eff.num_users()));
    for (Index k = 0; k < w.cols(); ++k) {
        const double p = (w.col(k).adjoint() * eff.power_form * w.col(k)).real()(0, 0);
        if (!(p > 0.0) || !std::isfinite(p))
            throw DegenerateInput("zf_precoder: user column carries no power");
        w.col(k) /= std::sqrt(p);
    }
    if (!w.allFinite())
        throw DegenerateInput("zf_precoder: non-finite combiner");
    return w;
}

} // namespace detail

/// Zero-forcing F_D = H_eff (H_eff^H H_eff)^{-1} D with equal per-user power.
/// The joint power normalization is left to the caller.
inline DigitalPrecoder zf_precoder(const EffectiveChannel& eff) {
    return {eff.matrix * detail::zf_combiner(eff)};
}

/// K x K starting point whose induced F_D is the ZF precoder, scaled to unit power.
inline CMatrix zf_initial_combiner(const EffectiveChannel& eff) {
    CMatrix w = detail::zf_combiner(eff);
    const double p = detail::quadratic_power(eff.power_form, w);
    if (!(p > 0.0) || !std::isfinite(p))
        throw DegenerateInput("zf_precoder: composite precoder carries no power");
    w /= std::sqrt(p);
    if (!w.allFinite())
        throw DegenerateInput("zf_precoder: non-finite combiner");
    return w;
}

inline constexpr int kDefaultMaxIterations = 30;
inline constexpr double kDefaultTolerance = 0.01;

/// Iterate record of the reduced WMMSE solver.
struct WmmseState {
    CVector receive_scalars;       // u
    RVector weights;               // lambda
    CMatrix combiner;              // W
    int iteration = 0;             // completed update rounds
    bool converged = false;        // relative change fell to epsilon
    std::vector<double> objective_trace; // sum-SE before round 1, then after each round
    std::vector<double> relative_change; // ||W(t) - W(t-1)||_F / ||W(t-1)||_F per round
};

struct WmmseResult {
    DigitalPrecoder digital; // H_eff W, not power-normalized
    WmmseState state;
};

/// Sum-SE of the power-normalized precoder induced by W.
inline double combiner_sum_se(const EffectiveChannel& eff, const CMatrix& w, const SnrPoint& snr) {
    const CMatrix cross = eff.gram * w; // (k, j) = g_k^H w_j
    const double noise = snr.noise_to_power() * detail::quadratic_power(eff.power_form, w);
    double total = 0.0;
    for (Index k = 0; k < cross.rows(); ++k) {
        const double signal = std::norm(cross(k, k));
        const double all = cross.row(k).squaredNorm();
        total += std::log2(1.0 + signal / (all - signal + noise));
    }
    return total;
}

namespace detail {

// Solves M X = B for Hermitian PSD M, with one diagonal-loading retry.
inline CMatrix solve_hermitian(const CMatrix& m, const CMatrix& b) {
    auto attempt = [&](const CMatrix& mat, CMatrix& out) {
        Eigen::LDLT<CMatrix> ldlt(mat);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            return false;
        out = ldlt.solve(b);
        return out.allFinite() && (mat * out - b).norm() <= 1e-6 * std::max(1.0, b.norm());
    };
    CMatrix x;
    if (attempt(m, x))
        return x;
    const double load = 1e-12 * m.trace().real() / static_cast<double>(m.rows());
    CMatrix loaded = m;
    loaded.diagonal().array() += load;
    if (attempt(loaded, x)) {
        log(LogLevel::debug, "r_wmmse: solved with diagonal loading");
        return x;
    }
    throw NumericalError("r_wmmse: update matrix is singular even after diagonal loading");
}

} // namespace detail

/// Reduced-dimension WMMSE on the K x K combiner W with F_D = H_eff W.
///
/// Each round updates the receive scalars u, the MSE weights lambda and then
/// W in closed form. The loop stops once the relative Frobenius change of W
/// drops to `epsilon` or after `max_iterations` rounds. Because the noise term
/// uses the exact radiated power tr(W^H Q W), the sum-SE of the normalized
/// precoder never decreases from one round to the next.
inline WmmseResult r_wmmse(const EffectiveChannel& eff, const SnrPoint& snr,
                           const CMatrix& initial, int max_iterations = kDefaultMaxIterations,
                           double epsilon = kDefaultTolerance) {
    snr.validate();
    const Index k_users = eff.num_users();
    if (initial.rows() != k_users || initial.cols() != k_users)
        throw InvalidInput("r_wmmse: initial combiner must be K x K");
    if (max_iterations < 1 || !(epsilon > 0.0))
        throw InvalidInput("r_wmmse: need max_iterations >= 1 and epsilon > 0");
    if (!(initial.norm() > 0.0) || !initial.allFinite())
        throw InvalidInput("r_wmmse: initial combiner must be nonzero and finite");

    const double nsr = snr.noise_to_power();
    const CMatrix& g = eff.gram;

    WmmseState st;
    st.combiner = initial;
    st.receive_scalars = CVector::Zero(k_users);
    st.weights = RVector::Ones(k_users);
    st.objective_trace.push_back(combiner_sum_se(eff, st.combiner, snr));

    for (int t = 1; t <= max_iterations; ++t) {
        const CMatrix& w = st.combiner;
        const CMatrix cross = g * w;
        const double noise = nsr * detail::quadratic_power(eff.power_form, w);

        for (Index k = 0; k < k_users; ++k) {
            const double denom = cross.row(k).squaredNorm() + noise;
            st.receive_scalars(k) = cross(k, k) / denom;
            const double mse = 1.0 - (std::conj(st.receive_scalars(k)) * cross(k, k)).real();
            if (!(mse > 0.0))
                throw NumericalError("r_wmmse: MSE left (0, 1); weights undefined");
            st.weights(k) = 1.0 / mse;
        }

        const RVector u2l = st.receive_scalars.cwiseAbs2().cwiseProduct(st.weights);
        const CMatrix update = nsr * u2l.sum() * eff.power_form +
                               g * u2l.cast<cplx>().asDiagonal() * g.adjoint();
        const CVector rhs_scale = st.receive_scalars.cwiseProduct(st.weights.cast<cplx>());
        const CMatrix rhs = g * rhs_scale.asDiagonal();
        CMatrix next = detail::solve_hermitian(update, rhs);

        const double change = (next - w).norm() / w.norm();
        st.combiner = std::move(next);
        st.iteration = t;
        st.relative_change.push_back(change);
        st.objective_trace.push_back(combiner_sum_se(eff, st.combiner, snr));
        if (change <= epsilon) {
            st.converged = true;
            break;
        }
    }

    WmmseResult out{{eff.matrix * st.combiner}, std::move(st)};
    return out;
}

/// Power-normalized hybrid precoder plus the solver record.
struct PrecoderDesign {
    HybridPrecoder precoder;
    WmmseState state;
};

/// Digital stage for a fixed analog precoder: effective channel, ZF start,
/// reduced WMMSE, joint power normalization.
inline PrecoderDesign design_digital_stage(const RfPrecoder& rf, const ChannelRealization& channel,
                                           const SnrPoint& snr,
                                           int max_iterations = kDefaultMaxIterations,
                                           double epsilon = kDefaultTolerance) {
    const EffectiveChannel eff = effective_channel(rf, channel);
    WmmseResult res = r_wmmse(eff, snr, zf_initial_combiner(eff), max_iterations, epsilon);
    return {make_normalized(rf, res.digital), std::move(res.state)};
}

/// Fully-digital WMMSE (F_RF = I_N); the SE upper-bound reference.
inline PrecoderDesign fully_digital_wmmse(const ChannelRealization& channel, const SnrPoint& snr,
                                          int max_iterations = kDefaultMaxIterations,
                                          double epsilon = kDefaultTolerance) {
    return design_digital_stage(RfPrecoder::identity(channel.num_antennas()), channel, snr,
                                max_iterations, epsilon);
}

/// Fully-digital ZF with equal per-user power.
inline HybridPrecoder fully_digital_zf(const ChannelRealization& channel) {
    RfPrecoder rf = RfPrecoder::identity(channel.num_antennas());
    const DigitalPrecoder zf = zf_precoder(effective_channel(rf, channel));
    return make_normalized(std::move(rf), zf);
}

} // namespace hpl

#endif // HPL_DIGITAL_DESIGN_HPP
