#pragma once

#include "govdisc/timeseries.hpp"

#include <span>
#include <vector>

namespace govdisc {

struct SmootherConfig {
    enum class Method { None, MovingAverage };
    Method method = Method::MovingAverage;
    int window = 5; // odd

    static SmootherConfig none() { return {Method::None, 1}; }
    static SmootherConfig moving_average(int window) { return {Method::MovingAverage, window}; }
};

/// Time derivative per sample; `valid[i] == false` marks samples excluded
/// from regression (segment endpoints, short segments).
struct DerivativeSeries {
    std::vector<double> values;
    std::vector<bool> valid;

    std::size_t size() const { return values.size(); }
    std::size_t valid_count() const;
};

/// Centered moving average whose window shrinks symmetrically near the ends.
std::vector<double> smooth(std::span<const double> series, const SmootherConfig& config);

/// `smooth` applied independently inside each phase segment. Windows longer
/// than a segment are cut to the largest odd length that fits.
std::vector<double> smooth_by_segment(std::span<const double> series, const std::vector<PhaseTag>& tags,
                                      const SmootherConfig& config);

/// Central differences inside each phase segment. Segment endpoints get
/// one-sided estimates that are masked invalid; no stencil crosses a segment.
DerivativeSeries differentiate(std::span<const double> series, std::span<const double> t,
                               const std::vector<PhaseTag>& tags);

} // namespace govdisc
