#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "curvot/measures.hpp"

namespace curvot {

enum class OracleMode { adjacency, brute_force };

/// Candidate-neighbor sets for the segment tracer. In adjacency mode the
/// lists come from the regular (weighted Delaunay) triangulation of the sites
/// with weights phi, so they contain every pair of Laguerre cells sharing a
/// facet; extra candidates are harmless for the tracer. In brute-force mode
/// every site is a candidate of every other.
class NeighborOracle {
public:
    NeighborOracle() = default;

    static NeighborOracle brute_force(int n);
    /// `active_counts[i]` marks how many leading entries of `lists[i]` are
    /// sites with nonempty cells; empty = the whole list is active.
    static NeighborOracle adjacency(int n, std::vector<std::vector<std::int32_t>> lists,
                                    std::vector<std::int32_t> active_counts = {});

    OracleMode mode() const { return mode_; }
    int size() const { return n_; }

    std::span<const std::int32_t> candidates(int i) const {
        if (mode_ == OracleMode::brute_force) return {all_.data(), all_.size()};
        return {lists_[i].data(), lists_[i].size()};
    }

    /// Candidates that can actually win a crossing search: sites whose cell
    /// is empty never produce the earliest exit, so the tracer skips them.
    std::span<const std::int32_t> crossing_candidates(int i) const {
        if (mode_ == OracleMode::brute_force) return {all_.data(), all_.size()};
        const std::size_t k =
            active_counts_.empty() ? lists_[i].size() : static_cast<std::size_t>(active_counts_[i]);
        return {lists_[i].data(), k};
    }

private:
    OracleMode mode_ = OracleMode::brute_force;
    int n_ = 0;
    std::vector<std::vector<std::int32_t>> lists_;
    std::vector<std::int32_t> active_counts_;
    std::vector<std::int32_t> all_;
};

/// Builds the candidate-neighbor oracle for the Laguerre tessellation of
/// (mu.positions, phi). Sites whose power cell is empty borrow the list of
/// their power-nearest visible site so the tracer never dead-ends. Falls back
/// to brute force (never fails) when the triangulation degenerates.
template <int D>
NeighborOracle build_oracle(const AtomicMeasure<D>& mu, const DualPotential& phi,
                            OracleMode mode = OracleMode::adjacency);

}  // namespace curvot
