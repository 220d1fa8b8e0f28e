#pragma once

#include "udfmi/fields.hpp"
#include "udfmi/mesh.hpp"

#include <map>
#include <vector>

namespace udfmi {

struct RefineConfig {
    double lambda1 = 1000.0;
    int iterations = 200;
    double step = 5e-4;
    double gradient_h = 0.0;  // <= 0: the field's default step
    int max_halvings = 5;
    // Test-only: use the full 1-ring instead of the per-label ring.
    bool naive_laplacian = false;

    void validate() const;
};

/// Label -> indices of the faces that carry it. Every face is in exactly two groups.
std::map<std::uint32_t, std::vector<std::uint32_t>> group_submeshes(const LabeledMesh& mesh);

/// Number of edges that have more than two incident faces inside a single group.
std::size_t group_nonmanifold_edges(const LabeledMesh& mesh);

/// Sum over groups s and vertices p_i of group s of
///   f(p_i) + lambda * |p_i - mean of the s-neighbors of p_i|^2.
class RefineObjective {
public:
    RefineObjective(const LabeledMesh& mesh, const ScalarField& field, double lambda1, double gradient_h = 0.0,
                    bool naive_laplacian = false);

    /// Non-finite field values are left out of the sum.
    double loss(const std::vector<Vec3>& p) const;
    /// Exact gradient given the field gradient. Entries with a non-finite field
    /// value or gradient are left as NaN.
    std::vector<Vec3> gradient(const std::vector<Vec3>& p) const;

    /// Groups containing each vertex (the multiplicity of its distance term).
    const std::vector<std::uint32_t>& multiplicity() const { return mult_; }
    std::size_t term_count() const { return term_vertex_.size(); }

private:
    const ScalarField& field_;
    double lambda_;
    double h_;
    std::vector<std::uint32_t> mult_;
    // One entry per (group, vertex): the vertex and a CSR range of its neighbors.
    std::vector<std::uint32_t> term_vertex_;
    std::vector<std::uint32_t> term_begin_;
    std::vector<std::uint32_t> neighbors_;
};

struct RefineReport {
    std::vector<double> loss_trace;  // initial loss, then after every iteration
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t frozen_vertices = 0;  // vertex-iterations skipped for non-finite gradients
    double mean_udf_before = 0.0;
    double mean_udf_after = 0.0;
    std::size_t group_nonmanifold_edges = 0;
};

/// Gradient descent on RefineObjective with Jacobi updates. Each iteration
/// tries `step` and halves it up to max_halvings times until the loss does not
/// increase; if none works the iteration is rejected and descent stops.
LabeledMesh refine(const LabeledMesh& mesh, const ScalarField& field, const RefineConfig& cfg, RefineReport* report = nullptr);

}  // namespace udfmi
