#pragma once

#include "udfmi/core.hpp"
#include "udfmi/signfield.hpp"

#include <cstdint>
#include <vector>

namespace udfmi {

/// Per-voxel partition labels; 0 is the background, 1..count are partitions.
struct LabelField {
    GridSpec spec;
    std::vector<std::uint32_t> label;
    std::uint32_t count = 0;

    LabelField() = default;
    explicit LabelField(const GridSpec& s) : spec(s), label(s.voxel_count(), 0) {}
};

// Sign class used for component labeling: -1, +1, or 0 for empty-neighborhood voxels.
int sign_class(const SignField& sf, std::size_t v);

/// 6-connected components of equal sign class inside omega1, numbered in scan order.
LabelField connected_components(const SignField& sf);

struct Erosion {
    Mask eroded;   // R^e: voxels peeled off (plus any forced-free voxels)
    Mask remnant;  // R^r: survivors
};

/// `iterations` rounds of 6-neighborhood peeling: a voxel goes when a neighbor is
/// background, outside the grid, differently labeled, or already peeled.
/// Voxels flagged in `force_free` always end up eroded.
Erosion erode(const LabelField& lf, int iterations, const Mask* force_free = nullptr);

struct SeedLabels {
    LabelField seeds;                                       // 0 where not a seed
    std::vector<std::vector<std::uint32_t>> by_partition;  // index = partition label (0 unused)
};

/// Fresh labels for each 6-connected component of every partition's remnant.
SeedLabels split_remnants(const LabelField& partitions, const Mask& remnant);

/// Labeling of the eroded voxels with hard seed constraints:
///   E(f) = sum_free D(f) + sum_{6-adjacent pairs in omega1} [f_i != f_j]
/// with D(f) = 0 when f is in the allowed set of the voxel's partition (or that
/// set is empty), 1 otherwise.
struct RelabelProblem {
    enum Role : std::uint8_t { kOutside = 0, kFree = 1, kSeed = 2 };

    GridSpec spec;
    std::vector<std::uint8_t> role;
    std::vector<std::uint32_t> seed_label;  // for kSeed voxels
    std::vector<std::uint32_t> origin;      // for kFree voxels: index into allowed
    std::vector<std::vector<std::uint32_t>> allowed;
    std::uint32_t label_count = 0;           // labels are 1..label_count

    bool is_allowed(std::size_t v, std::uint32_t l) const;
    void validate() const;
};

RelabelProblem make_relabel_problem(const LabelField& partitions, const Erosion& erosion, const SeedLabels& seeds);

std::int64_t relabel_energy(const RelabelProblem& problem, const std::vector<std::uint32_t>& labels);

struct AlphaExpansionResult {
    LabelField labels;
    std::vector<std::int64_t> energy_trace;  // initial, then after every move
    std::vector<std::int64_t> sweep_energy;  // energy at the end of each sweep
    int sweeps = 0;
    std::size_t unreachable = 0;  // free voxels with no seed path inside omega1
};

/// Potts alpha-expansion; every move is solved exactly by min-cut. Stops after a
/// sweep without strict decrease or after max_sweeps. Without any seed the
/// problem is infeasible and ErrorCode::EmptyResult is thrown.
AlphaExpansionResult alpha_expansion(const RelabelProblem& problem, int max_sweeps = 10);

struct MergeResult {
    LabelField labels;
    std::size_t merges = 0;
};

/// Boundary statistics for a pair of adjacent labels.
struct PairBoundary {
    std::uint32_t a = 0, b = 0;
    std::size_t inside = 0;   // adjacencies with both voxels in omega2
    std::size_t outside = 0;  // the rest
};

std::vector<PairBoundary> boundary_counts(const LabelField& lf, const Mask& omega2);

/// Greedy union of adjacent labels while outside > ratio * inside, highest
/// outside/max(inside,1) first, recounting after each union. Labels are then
/// renumbered in scan order.
MergeResult merge_partitions(const LabelField& lf, const Mask& omega2, double ratio = 3.0);

struct LabelingConfig {
    int erosion_iters = 2;
    double merge_ratio = 3.0;
    int max_sweeps = 10;
    // Lost partitions smaller than this are treated as noise in the report.
    std::size_t lost_min_voxels = 8;
};

struct LabelingReport {
    std::size_t components = 0;
    std::size_t signed_components = 0;
    std::size_t seeds = 0;
    std::size_t lost_partitions = 0;        // signed partitions (>= lost_min_voxels) with empty remnant
    std::size_t lost_voxels = 0;
    std::size_t unreachable_voxels = 0;
    std::vector<std::int64_t> energy_trace;
    std::vector<std::int64_t> sweep_energy;
    std::size_t merges = 0;
    std::size_t partitions = 0;              // final label count
};

struct LabelingResult {
    LabelField components;  // connected components before erosion
    LabelField expanded;    // after alpha-expansion
    LabelField labels;      // after merging
    LabelingReport report;
};

/// connected_components -> erode -> split_remnants -> alpha_expansion -> merge_partitions.
LabelingResult build_label_field(const SignField& sf, const LabelingConfig& cfg = {});

Mask omega2_mask(const SignField& sf);

}  // namespace udfmi
