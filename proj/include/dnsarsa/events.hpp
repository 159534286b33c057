#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dnsarsa {

/// One intention episode cut out of the continuous node traces.
struct BehaviorEvent {
    int behavior = -1;
    double t_on = 0.0;
    double t_off = 0.0;    ///< end of trace when the intention was still on
    double cos_time = -1.0;  ///< first CoS sample > 0.5 within [t_on, t_off], -1 if none
    bool closed = false;     ///< intention went back below threshold

    bool completed() const { return cos_time >= 0.0; }
};

/// Online event segmentation. Feed one sample per tick with the sigmoided
/// intention and CoS outputs; throws WtaViolation when two intentions are
/// above threshold at once.
class EventTracker {
public:
    explicit EventTracker(double threshold = 0.5) : threshold_(threshold) {}

    /// Returns the event that closed on this sample, if any.
    std::optional<BehaviorEvent> push(double t, std::span<const double> f_int, std::span<const double> f_cos);
    /// Closes the open event at the end of the trace, if any.
    std::optional<BehaviorEvent> finish(double t_end);
    const std::optional<BehaviorEvent>& open() const noexcept { return open_; }

private:
    double threshold_;
    std::optional<BehaviorEvent> open_;
};

/// Sampled traces, row-major [sample][behavior].
struct NodeTrace {
    double dt = 1.0 / 32.0;
    std::size_t behaviors = 0;
    std::vector<double> f_int;
    std::vector<double> f_cos;

    std::size_t samples() const { return behaviors ? f_int.size() / behaviors : 0; }
    void push(std::span<const double> fi, std::span<const double> fc);
};

/// Ordered, non-overlapping events; sample n is at time n * dt.
std::vector<BehaviorEvent> extract_events(const NodeTrace& trace, double threshold = 0.5);

}  // namespace dnsarsa
