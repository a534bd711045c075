#include "cobra/netsim.hpp"

#include <algorithm>

namespace cobra {

int AsynchronyPlan::group_of(int id) const {
    for (std::size_t g = 0; g < partition.size(); ++g)
        if (std::find(partition[g].begin(), partition[g].end(), id) != partition[g].end()) return static_cast<int>(g);
    return -1;
}

bool AsynchronyPlan::crosses(int src, int dst) const {
    int a = group_of(src);
    int b = group_of(dst);
    return a >= 0 && b >= 0 && a != b;
}

const char* plan_error_name(PlanError e) {
    switch (e) {
    case PlanError::WindowTooLong: return "WindowTooLong";
    case PlanError::WindowsOverlap: return "WindowsOverlap";
    case PlanError::WindowReversed: return "WindowReversed";
    case PlanError::GapTooShort: return "GapTooShort";
    }
    return "?";
}

std::optional<PlanError> validate_plan(const AsynchronyPlan& plan, Tick delta_gst, Tick min_gap) {
    auto w = plan.windows;
    std::sort(w.begin(), w.end(), [](auto& a, auto& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].end < w[i].start) return PlanError::WindowReversed;
        if (w[i].end - w[i].start > delta_gst) return PlanError::WindowTooLong;
        if (i > 0) {
            if (w[i].start < w[i - 1].end) return PlanError::WindowsOverlap;
            if (w[i].start - w[i - 1].end < min_gap) return PlanError::GapTooShort;
        }
    }
    return std::nullopt;
}

Tick deliver_time(int src, int dst, Tick send_time, Tick base_delay, const AsynchronyPlan& plan, const NetMode& mode) {
    Tick base = send_time + base_delay;
    if (!plan.crosses(src, dst)) return base;
    if (mode.kind == NetMode::Kind::PartialSynchrony) {
        // Cross-partition traffic is held until GST.
        if (send_time < mode.gst) return std::max(mode.gst, send_time) + base_delay;
        return base;
    }
    for (const auto& w : plan.windows) {
        // In-flight interval [send, base] meets [start, end).
        if (base >= w.start && send_time < w.end) return std::max(base, w.end + mode.delta);
    }
    return base;
}

} // namespace cobra
