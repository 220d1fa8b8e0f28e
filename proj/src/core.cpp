#include "udfmi/core.hpp"
#include "udfmi/parallel.hpp"

#include <atomic>
#include <cmath>

namespace udfmi {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidSpec: return "invalid-spec";
        case ErrorCode::Config: return "config-error";
        case ErrorCode::Io: return "io-error";
        case ErrorCode::Stage: return "stage-failure";
        case ErrorCode::EmptyResult: return "empty-result";
    }
    return "unknown";
}

void GridSpec::validate() const {
    for (int d : dims) {
        if (d <= 0) throw Error(ErrorCode::InvalidSpec, "grid", "resolution must be positive");
    }
    const Vec3 e = bbox.extent();
    if (!(e.x() > 0 && e.y() > 0 && e.z() > 0) || !e.allFinite()) {
        throw Error(ErrorCode::InvalidSpec, "grid", "bounding box must have positive extent");
    }
}

Vec3i GridSpec::locate(const Vec3& p) const {
    const Vec3 h = spacing();
    Vec3i out{};
    for (int a = 0; a < 3; ++a) {
        const int v = static_cast<int>(std::floor((p[a] - bbox.min[a]) / h[a]));
        out[a] = std::clamp(v, 0, dims[a] - 1);
    }
    return out;
}

namespace {
std::atomic<unsigned> g_thread_limit{0};
}

void set_thread_limit(unsigned n) { g_thread_limit = n; }

unsigned thread_count() {
    const unsigned limit = g_thread_limit.load();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return limit == 0 ? hw : std::min(limit, hw);
}

}  // namespace udfmi
