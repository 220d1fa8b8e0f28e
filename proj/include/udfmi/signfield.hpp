#pragma once

#include "udfmi/core.hpp"
#include "udfmi/fields.hpp"
#include "udfmi/sampling.hpp"

namespace udfmi {

// Bits of SignField::flags.
enum SignFlag : std::uint8_t {
    kOmega1 = 1,     // inside the r1 envelope
    kOmega2 = 2,     // inside the r2 envelope
    kEmptyNeighborhood = 4,  // no cloud point within the query radius; w = 0
};

/// Local two-signed field over a voxel grid. `w` is meaningful only where
/// the kOmega1 bit is set.
struct SignField {
    GridSpec spec;
    std::vector<double> w;
    std::vector<std::uint8_t> flags;

    SignField() = default;
    explicit SignField(const GridSpec& s) : spec(s), w(s.voxel_count(), 0.0), flags(s.voxel_count(), 0) {}

    bool in_omega1(std::size_t i) const { return flags[i] & kOmega1; }
    bool in_omega2(std::size_t i) const { return flags[i] & kOmega2; }
    bool empty_neighborhood(std::size_t i) const { return flags[i] & kEmptyNeighborhood; }
};

/// mask[v] = field.eval(center(v)) < r.
Mask envelope_mask(const ScalarField& field, const GridSpec& spec, double r);

struct SignFieldStats {
    std::size_t omega1_voxels = 0;
    std::size_t empty_voxels = 0;
};

/// For each voxel center q in omega1:
///   w(q) = sum over cloud points x_i with |x_i - q| <= radius of
///          (x_i - q) . n_i / (|x_i - q|^3 + eps).
/// Voxels with no contributing point keep w = 0 and get kEmptyNeighborhood.
/// `omega2`, when non-null, only sets the kOmega2 bits.
SignField local_two_signed_field(const OrientedPointCloud& cloud, const GridSpec& spec, const Mask& omega1, double radius,
                                 double eps = 1e-8, const Mask* omega2 = nullptr, SignFieldStats* stats = nullptr);

}  // namespace udfmi
