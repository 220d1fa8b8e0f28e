#include "udfmi/signfield.hpp"

#include "udfmi/kdtree.hpp"
#include "udfmi/parallel.hpp"

#include <cmath>

namespace udfmi {

Mask envelope_mask(const ScalarField& field, const GridSpec& spec, double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::Config, "signfield", "envelope radius must be positive");
    spec.validate();
    Mask mask(spec, 0);
    parallel_for(mask.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) mask[i] = field.eval(spec.center(i)) < r ? 1 : 0;
    });
    return mask;
}

SignField local_two_signed_field(const OrientedPointCloud& cloud, const GridSpec& spec, const Mask& omega1, double radius,
                                 double eps, const Mask* omega2, SignFieldStats* stats) {
    if (!(radius > 0.0)) throw Error(ErrorCode::Config, "signfield", "neighborhood radius must be positive");
    if (!(eps > 0.0)) throw Error(ErrorCode::Config, "signfield", "eps must be positive");
    if (cloud.points.empty()) throw Error(ErrorCode::Stage, "signfield", "oriented point cloud is empty");
    if (!(omega1.spec == spec) || (omega2 && !(omega2->spec == spec))) {
        throw Error(ErrorCode::InvalidSpec, "signfield", "envelope masks must share the grid spec");
    }

    SignField sf(spec);
    const KdTree tree(cloud.points);
    parallel_for(sf.w.size(), [&](std::size_t b, std::size_t e) {
        std::vector<std::uint32_t> nb;
        for (std::size_t v = b; v < e; ++v) {
            if (!omega1[v]) continue;
            std::uint8_t f = kOmega1;
            if (omega2 && (*omega2)[v]) f |= kOmega2;
            const Vec3 q = spec.center(v);
            tree.radius_query(q, radius, nb);
            double w = 0.0;
            for (auto i : nb) {
                const Vec3 d = cloud.points[i] - q;
                const double r = d.norm();
                w += d.dot(cloud.normals[i]) / (r * r * r + eps);
            }
            if (nb.empty()) f |= kEmptyNeighborhood;
            sf.w[v] = w;
            sf.flags[v] = f;
        }
    }, 512);

    if (stats) {
        stats->omega1_voxels = 0;
        stats->empty_voxels = 0;
        for (auto f : sf.flags) {
            stats->omega1_voxels += (f & kOmega1) != 0;
            stats->empty_voxels += (f & kEmptyNeighborhood) != 0;
        }
    }
    return sf;
}

}  // namespace udfmi
