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

#ifndef HPL_RF_DESIGN_HPP
#define HPL_RF_DESIGN_HPP

#include "hpl/channel.hpp"
#include "hpl/core.hpp"
#include "hpl/precoding.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace hpl {

enum class BasisSource { instantaneous_svd, covariance_eig };

/// Orthonormal N x m basis with its singular values (or eigenvalues), descending.
struct SubspaceBasis {
    CMatrix matrix;
    BasisSource source = BasisSource::instantaneous_svd;
    RVector values;

    Index num_antennas() const { return matrix.rows(); }
    Index num_columns() const { return matrix.cols(); }
};

inline constexpr double kRankThreshold = 1e-12;

namespace detail {

// Appends orthonormal columns to `basis` (whose first `filled` columns are
// orthonormal) by Gram-Schmidt on e_0, e_1, ... until all columns are set.
inline void complete_orthonormal(CMatrix& basis, Index filled) {
    const Index n = basis.rows();
    Index next = 0;
    for (Index col = filled; col < basis.cols(); ++col) {
        for (;; ++next) {
            if (next >= n)
                throw NumericalError("complete_orthonormal: ran out of coordinate vectors");
            CVector v = CVector::Unit(n, next);
            // two passes keep the result orthogonal to working precision
            for (int pass = 0; pass < 2; ++pass)
                for (Index j = 0; j < col; ++j)
                    v -= basis.col(j) * basis.col(j).dot(v);
            const double norm = v.norm();
            if (norm > 1e-8) {
                basis.col(col) = v / norm;
                ++next;
                break;
            }
        }
    }
}

} // namespace detail

/// Leading m left singular vectors of H, from the eigendecomposition of H^H H.
///
/// Costs O(N K^2). Singular values below kRankThreshold * sigma_max count as
/// zero; their columns, and any columns beyond K, are filled with a fixed
/// orthonormal completion built from coordinate vectors.
inline SubspaceBasis left_singular_basis(const ChannelRealization& channel, Index num_columns) {
    const CMatrix& h = channel.matrix;
    const Index n = h.rows();
    const Index k = h.cols();
    if (num_columns < 1 || num_columns > n)
        throw InvalidInput("left_singular_basis: num_columns must lie in [1, N]");

    const CMatrix gram = h.adjoint() * h;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram);
    if (eig.info() != Eigen::Success)
        throw NumericalError("left_singular_basis: Gram eigendecomposition failed");

    // Eigen sorts ascending
    const RVector& lambda = eig.eigenvalues();
    const double sigma_max = std::sqrt(std::max(lambda(k - 1), 0.0));

    SubspaceBasis out;
    out.source = BasisSource::instantaneous_svd;
    out.matrix = CMatrix::Zero(n, num_columns);
    out.values = RVector::Zero(num_columns);

    Index filled = 0;
    for (Index i = 0; i < std::min(k, num_columns); ++i) {
        const Index src = k - 1 - i;
        const double sigma = std::sqrt(std::max(lambda(src), 0.0));
        if (sigma_max == 0.0 || sigma <= kRankThreshold * sigma_max)
            break;
        out.matrix.col(filled) = h * eig.eigenvectors().col(src) / sigma;
        out.values(filled) = sigma;
        ++filled;
    }
    detail::complete_orthonormal(out.matrix, filled);
    return out;
}

inline void check_hermitian(const CMatrix& m, const char* who) {
    if (m.rows() != m.cols())
        throw InvalidInput(std::string(who) + ": matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double skew = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (!(skew <= 1e-10 * scale))
        throw InvalidInput(std::string(who) + ": matrix is not Hermitian");
}

/// Leading m eigenvectors of a covariance matrix, eigenvalues descending.
/// Within a degenerate eigenspace the solver's ordering is kept.
inline SubspaceBasis covariance_basis(const CovarianceEstimate& cov, Index num_columns) {
    check_hermitian(cov.matrix, "covariance_basis");
    const Index n = cov.matrix.rows();
    if (num_columns < 1 || num_columns > n)
        throw InvalidInput("covariance_basis: num_columns must lie in [1, N]");

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov.matrix);
    if (eig.info() != Eigen::Success)
        throw NumericalError("covariance_basis: eigendecomposition failed");

    SubspaceBasis out;
    out.source = BasisSource::covariance_eig;
    out.matrix.resize(n, num_columns);
    out.values.resize(num_columns);
    for (Index i = 0; i < num_columns; ++i) {
        out.matrix.col(i) = eig.eigenvectors().col(n - 1 - i);
        out.values(i) = std::max(eig.eigenvalues()(n - 1 - i), 0.0);
    }
    return out;
}

/// Number of eigenvalues above kRankThreshold * largest.
inline Index numerical_rank(const CovarianceEstimate& cov) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov.matrix, Eigen::EigenvaluesOnly);
    const RVector& ev = eig.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0))
        return 0;
    return static_cast<Index>((ev.array() > kRankThreshold * top).count());
}

// Fully-connected designs ----------------------------------------------------

/// F_RF = e^{j arg(U)}: the closest unit-modulus matrix to U entry by entry.
inline RfPrecoder rf_from_left_singular(const SubspaceBasis& basis) {
    return {phase_of(basis.matrix), std::nullopt, Architecture::fully_connected};
}

/// Channel-phase baseline F_RF = e^{j arg(H)}; defined for one RF chain per user.
inline RfPrecoder rf_from_channel_phases(const ChannelRealization& channel, Index num_rf) {
    if (num_rf != channel.num_users())
        throw InvalidInput("rf_from_channel_phases: requires N_RF == K");
    return {phase_of(channel.matrix), std::nullopt, Architecture::fully_connected};
}

/// F_RF = e^{j arg(V_R)} from the N_RF leading eigenvectors of the covariance.
inline RfPrecoder rf_from_covariance(const CovarianceEstimate& cov, Index num_rf) {
    const SubspaceBasis basis = covariance_basis(cov, num_rf);
    if (log_level() != LogLevel::quiet) {
        const Index rank = numerical_rank(cov);
        if (num_rf < rank) {
            std::ostringstream msg;
            msg << "rf_from_covariance: N_RF = " << num_rf << " < covariance rank " << rank
                << "; not every path is captured";
            log(LogLevel::info, msg.str());
        }
    }
    return rf_from_left_singular(basis);
}

// Subarray designs -----------------------------------------------------------

namespace detail {

inline Index subarray_size(const SubspaceBasis& basis, Index num_rf, const char* who) {
    const Index n = basis.num_antennas();
    if (num_rf < 1 || num_rf > n)
        throw InvalidInput(std::string(who) + ": N_RF must lie in [1, N]");
    if (n % num_rf != 0) {
        std::ostringstream msg;
        msg << who << ": N = " << n << " is not divisible by N_RF = " << num_rf;
        throw InvalidInput(msg.str());
    }
    if (basis.num_columns() < num_rf)
        throw InvalidInput(std::string(who) + ": basis has fewer than N_RF columns");
    return n / num_rf;
}

inline RfPrecoder subarray_from_partition(const SubspaceBasis& basis, Partition partition,
                                          Architecture arch) {
    const Index nrf = static_cast<Index>(partition.size());
    CMatrix f = CMatrix::Zero(basis.num_antennas(), nrf);
    for (Index r = 0; r < nrf; ++r)
        for (Index a : partition[static_cast<std::size_t>(r)])
            f(a, r) = unit_phase(basis.matrix(a, r));
    return {std::move(f), std::move(partition), arch};
}

} // namespace detail

/// Contiguous blocks S_r = {r N_sub, ..., (r+1) N_sub - 1}.
inline RfPrecoder fixed_subarray_rf(const SubspaceBasis& basis, Index num_rf) {
    const Index nsub = detail::subarray_size(basis, num_rf, "fixed_subarray_rf");
    Partition part(static_cast<std::size_t>(num_rf));
    for (Index r = 0; r < num_rf; ++r) {
        auto& set = part[static_cast<std::size_t>(r)];
        set.resize(static_cast<std::size_t>(nsub));
        std::iota(set.begin(), set.end(), r * nsub);
    }
    return detail::subarray_from_partition(basis, std::move(part), Architecture::fixed_subarray);
}

/// Greedy antenna partitioning: chain r takes the N_sub still-available antennas
/// with the largest |U(n, r)|, ties going to the lower antenna index.
/// Expected O(N_RF N + N log N).
inline RfPrecoder dynamic_subarray_rf(const SubspaceBasis& basis, Index num_rf) {
    const Index nsub = detail::subarray_size(basis, num_rf, "dynamic_subarray_rf");
    const Index n = basis.num_antennas();

    struct Candidate {
        double key; // |U(n, r)|^2, same order as |U(n, r)| without the hypot
        Index antenna;
    };
    const auto before = [](const Candidate& a, const Candidate& b) {
        return a.key > b.key || (a.key == b.key && a.antenna < b.antenna);
    };
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    std::vector<Candidate> pool;
    pool.reserve(static_cast<std::size_t>(n));

    Partition part(static_cast<std::size_t>(num_rf));
    for (Index r = 0; r < num_rf; ++r) {
        pool.clear();
        for (Index a = 0; a < n; ++a)
            if (!taken[static_cast<std::size_t>(a)])
                pool.push_back({std::norm(basis.matrix(a, r)), a});
        // strict total order, so the selected set is unique
        const auto cut = pool.begin() + nsub;
        std::nth_element(pool.begin(), cut, pool.end(), before);

        auto& set = part[static_cast<std::size_t>(r)];
        set.resize(static_cast<std::size_t>(nsub));
        std::transform(pool.begin(), cut, set.begin(), [](const Candidate& c) { return c.antenna; });
        std::sort(set.begin(), set.end());
        for (Index a : set)
            taken[static_cast<std::size_t>(a)] = true;
    }
    return detail::subarray_from_partition(basis, std::move(part), Architecture::dynamic_subarray);
}

/// ||F_RF - U||_F against the first N_RF basis columns.
inline double subarray_objective(const RfPrecoder& rf, const SubspaceBasis& basis) {
    return (rf.matrix - basis.matrix.leftCols(rf.num_rf_chains())).norm();
}

/// N! / ((N_sub!)^N_RF N_RF!): unordered equal-size partitions of N antennas.
inline double subarray_partition_count(Index num_antennas, Index num_rf) {
    if (num_rf < 1 || num_antennas % num_rf != 0)
        throw InvalidInput("subarray_partition_count: N must be divisible by N_RF");
    const Index nsub = num_antennas / num_rf;
    // Fix the smallest free antenna in each successive set: prod_r C(rem - 1, N_sub - 1).
    double count = 1.0;
    for (Index rem = num_antennas; rem > 0; rem -= nsub) {
        double c = 1.0;
        for (Index i = 1; i <= nsub - 1; ++i)
            c = c * static_cast<double>(rem - nsub + i) / static_cast<double>(i);
        count *= std::round(c);
    }
    return count;
}

struct ExhaustiveResult {
    RfPrecoder rf;
    double objective = 0.0;
    std::size_t partitions_examined = 0;
};

inline constexpr double kExhaustiveLimit = 1e6;

namespace detail {

class PartitionSearch {
  public:
    PartitionSearch(const SubspaceBasis& basis, Index num_rf, Index nsub)
        : n_(basis.num_antennas()), nrf_(num_rf), nsub_(nsub),
          gain_(static_cast<std::size_t>(n_ * num_rf)), base_(static_cast<std::size_t>(num_rf)) {
        // cost(S, r) = sum_n |U(n,r)|^2 + sum_{n in S} (1 - 2 |U(n,r)|)
        for (Index r = 0; r < nrf_; ++r) {
            base_[static_cast<std::size_t>(r)] = basis.matrix.col(r).squaredNorm();
            for (Index a = 0; a < n_; ++a)
                gain_[idx(a, r)] = 1.0 - 2.0 * std::abs(basis.matrix(a, r));
        }
        sets_.resize(static_cast<std::size_t>(nrf_));
        used_.assign(static_cast<std::size_t>(n_), false);
        perm_.resize(static_cast<std::size_t>(nrf_));
    }

    void run() { next_set(0); }

    double best_cost() const { return best_cost_; }
    const Partition& best_partition() const { return best_; }
    std::size_t examined() const { return examined_; }

  private:
    std::size_t idx(Index a, Index r) const { return static_cast<std::size_t>(a * nrf_ + r); }

    void next_set(std::size_t depth) {
        if (depth == sets_.size()) {
            evaluate();
            return;
        }
        Index first = 0;
        while (used_[static_cast<std::size_t>(first)])
            ++first;
        auto& set = sets_[depth];
        set.clear();
        set.push_back(first);
        used_[static_cast<std::size_t>(first)] = true;
        extend(depth, first + 1);
        used_[static_cast<std::size_t>(first)] = false;
    }

    void extend(std::size_t depth, Index from) {
        auto& set = sets_[depth];
        if (static_cast<Index>(set.size()) == nsub_) {
            next_set(depth + 1);
            return;
        }
        const Index needed = nsub_ - static_cast<Index>(set.size());
        for (Index a = from; a < n_; ++a) {
            if (used_[static_cast<std::size_t>(a)])
                continue;
            // not enough antennas left above a to finish the set
            Index free_above = 0;
            for (Index b = a; b < n_ && free_above < needed; ++b)
                free_above += used_[static_cast<std::size_t>(b)] ? 0 : 1;
            if (free_above < needed)
                break;
            set.push_back(a);
            used_[static_cast<std::size_t>(a)] = true;
            extend(depth, a + 1);
            used_[static_cast<std::size_t>(a)] = false;
            set.pop_back();
        }
    }

    void evaluate() {
        ++examined_;
        // cost of putting set s on chain r
        std::vector<double> cost(static_cast<std::size_t>(nrf_ * nrf_));
        for (Index s = 0; s < nrf_; ++s)
            for (Index r = 0; r < nrf_; ++r) {
                double c = base_[static_cast<std::size_t>(r)];
                for (Index a : sets_[static_cast<std::size_t>(s)])
                    c += gain_[idx(a, r)];
                cost[static_cast<std::size_t>(s * nrf_ + r)] = c;
            }
        std::iota(perm_.begin(), perm_.end(), Index{0});
        do {
            double total = 0.0;
            for (Index r = 0; r < nrf_; ++r)
                total += cost[static_cast<std::size_t>(perm_[static_cast<std::size_t>(r)] * nrf_ + r)];
            if (total < best_cost_) {
                best_cost_ = total;
                best_.assign(static_cast<std::size_t>(nrf_), {});
                for (Index r = 0; r < nrf_; ++r)
                    best_[static_cast<std::size_t>(r)] =
                        sets_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(r)])];
            }
        } while (std::next_permutation(perm_.begin(), perm_.end()));
    }

    Index n_, nrf_, nsub_;
    std::vector<double> gain_;
    std::vector<double> base_;
    Partition sets_;
    std::vector<bool> used_;
    std::vector<Index> perm_;
    Partition best_;
    double best_cost_ = std::numeric_limits<double>::infinity();
    std::size_t examined_ = 0;
};

} // namespace detail

/// Global minimizer of ||F_RF - U||_F over every equal-size partition and every
/// set-to-chain assignment. Ties keep the first partition in lexicographic order.
/// Refuses instances with more than kExhaustiveLimit partitions.
inline ExhaustiveResult exhaustive_subarray_oracle(const SubspaceBasis& basis, Index num_rf) {
    const Index nsub = detail::subarray_size(basis, num_rf, "exhaustive_subarray_oracle");
    const double count = subarray_partition_count(basis.num_antennas(), num_rf);
    if (count > kExhaustiveLimit || num_rf > 8) {
        std::ostringstream msg;
        msg << "exhaustive_subarray_oracle: " << count << " partitions exceeds the limit of "
            << kExhaustiveLimit;
        throw InvalidInput(msg.str());
    }
    detail::PartitionSearch search(basis, num_rf, nsub);
    search.run();

    ExhaustiveResult out{detail::subarray_from_partition(basis, search.best_partition(),
                                                         Architecture::dynamic_subarray),
                         0.0, search.examined()};
    out.objective = subarray_objective(out.rf, basis);
    return out;
}

} // namespace hpl

#endif // HPL_RF_DESIGN_HPP
