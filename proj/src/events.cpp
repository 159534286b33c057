#include "dnsarsa/events.hpp"

#include <string>

#include "dnsarsa/errors.hpp"

namespace dnsarsa {

std::optional<BehaviorEvent> EventTracker::push(double t, std::span<const double> f_int,
                                                std::span<const double> f_cos) {
    int active = -1;
    for (std::size_t i = 0; i < f_int.size(); ++i) {
        if (f_int[i] > threshold_) {
            if (active >= 0)
                throw WtaViolation("intentions " + std::to_string(active) + " and " + std::to_string(i) +
                                   " both supra-threshold at t=" + std::to_string(t));
            active = static_cast<int>(i);
        }
    }

    std::optional<BehaviorEvent> closed;
    if (open_ && open_->behavior != active) {
        open_->t_off = t;
        open_->closed = true;
        closed = open_;
        open_.reset();
    }
    if (active >= 0 && !open_) open_ = BehaviorEvent{.behavior = active, .t_on = t, .t_off = t};
    if (open_) {
        open_->t_off = t;
        const auto b = static_cast<std::size_t>(open_->behavior);
        if (open_->cos_time < 0.0 && b < f_cos.size() && f_cos[b] > threshold_) open_->cos_time = t;
    }
    return closed;
}

std::optional<BehaviorEvent> EventTracker::finish(double t_end) {
    if (!open_) return std::nullopt;
    open_->t_off = t_end;
    auto ev = open_;
    open_.reset();
    return ev;
}

void NodeTrace::push(std::span<const double> fi, std::span<const double> fc) {
    if (behaviors == 0) behaviors = fi.size();
    if (fi.size() != behaviors || fc.size() != behaviors) throw ConfigError("trace sample width mismatch");
    f_int.insert(f_int.end(), fi.begin(), fi.end());
    f_cos.insert(f_cos.end(), fc.begin(), fc.end());
}

std::vector<BehaviorEvent> extract_events(const NodeTrace& trace, double threshold) {
    std::vector<BehaviorEvent> events;
    EventTracker tracker(threshold);
    const std::size_t k = trace.behaviors;
    const std::size_t n = trace.samples();
    for (std::size_t s = 0; s < n; ++s) {
        const double t = static_cast<double>(s) * trace.dt;
        const std::span<const double> fi(trace.f_int.data() + s * k, k);
        const std::span<const double> fc(trace.f_cos.data() + s * k, k);
        if (auto ev = tracker.push(t, fi, fc)) events.push_back(*ev);
    }
    if (n > 0)
        if (auto ev = tracker.finish(static_cast<double>(n - 1) * trace.dt)) events.push_back(*ev);
    return events;
}

}  // namespace dnsarsa
