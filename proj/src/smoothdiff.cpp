#include "govdisc/smoothdiff.hpp"

#include "govdisc/error.hpp"
#include "govdisc/log.hpp"

#include <algorithm>

namespace govdisc {

std::size_t DerivativeSeries::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

std::vector<double> smooth(std::span<const double> series, const SmootherConfig& config) {
    std::vector<double> out(series.begin(), series.end());
    if (config.method == SmootherConfig::Method::None) return out;
    if (config.window < 1 || config.window % 2 == 0)
        throw ConfigError("moving-average window must be odd and >= 1, got " + std::to_string(config.window));
    if (static_cast<std::size_t>(config.window) > series.size())
        throw ConfigError("moving-average window " + std::to_string(config.window) + " exceeds series length " +
                          std::to_string(series.size()));
    const long n = static_cast<long>(series.size());
    const long half = config.window / 2;
    for (long i = 0; i < n; ++i) {
        long r = std::min({half, i, n - 1 - i});
        double acc = 0.0;
        for (long j = i - r; j <= i + r; ++j) acc += series[j];
        out[i] = acc / static_cast<double>(2 * r + 1);
    }
    return out;
}

std::vector<double> smooth_by_segment(std::span<const double> series, const std::vector<PhaseTag>& tags,
                                      const SmootherConfig& config) {
    if (tags.size() != series.size()) throw DataError("smoothing: tags and series lengths differ");
    std::vector<double> out(series.size());
    for (const auto& seg : phase_segments(tags)) {
        SmootherConfig cfg = config;
        if (cfg.method == SmootherConfig::Method::MovingAverage) {
            if (cfg.window < 1 || cfg.window % 2 == 0)
                throw ConfigError("moving-average window must be odd and >= 1, got " + std::to_string(cfg.window));
            int fit = static_cast<int>(seg.size());
            if (fit % 2 == 0) --fit;
            cfg.window = std::max(1, std::min(cfg.window, fit));
        }
        auto part = smooth(series.subspan(seg.begin, seg.size()), cfg);
        std::copy(part.begin(), part.end(), out.begin() + static_cast<long>(seg.begin));
    }
    return out;
}

DerivativeSeries differentiate(std::span<const double> y, std::span<const double> t,
                               const std::vector<PhaseTag>& tags) {
    if (y.size() != t.size() || y.size() != tags.size())
        throw DataError("differentiate: series, timestamps and tags must have equal length");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw DataError("differentiate: timestamps not strictly increasing at " + std::to_string(i));

    DerivativeSeries d;
    d.values.assign(y.size(), 0.0);
    d.valid.assign(y.size(), false);
    for (const auto& seg : phase_segments(tags)) {
        std::size_t a = seg.begin, b = seg.end; // [a, b)
        if (seg.size() < 3) {
            log::warn("segment layer " + std::to_string(seg.layer) + " " + stage_name(seg.stage) + " has " +
                      std::to_string(seg.size()) + " samples; derivative masked");
            if (seg.size() == 2) {
                double s = (y[a + 1] - y[a]) / (t[a + 1] - t[a]);
                d.values[a] = d.values[a + 1] = s;
            }
            continue;
        }
        d.values[a] = (y[a + 1] - y[a]) / (t[a + 1] - t[a]);
        d.values[b - 1] = (y[b - 1] - y[b - 2]) / (t[b - 1] - t[b - 2]);
        for (std::size_t i = a + 1; i + 1 < b; ++i) {
            d.values[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
            d.valid[i] = true;
        }
    }
    return d;
}

} // namespace govdisc
