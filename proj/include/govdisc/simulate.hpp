#pragma once

#include "govdisc/govmodel.hpp"
#include "govdisc/parallel.hpp"
#include "govdisc/timeseries.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace govdisc {

struct IntegratorConfig {
    enum class Method { RK4 };
    Method method = Method::RK4;
    int substeps = 10;
    void validate() const;
};

/// States beyond this magnitude (degC) count as divergence.
inline constexpr double kDivergenceLimit = 1e4;

/// One classical Runge-Kutta step of size h for dy/dt = f(y).
template <class F>
inline double rk4_step(F&& f, double y, double h) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// dT/dt given the state and the current row of held inputs.
using ScalarRhs = std::function<double(double T, std::span<const double> inputs)>;

struct Trajectory {
    std::vector<double> values; // one per timestamp, values[0] = T0
    bool diverged = false;
    std::size_t divergence_index = 0; // first sample past the limit (valid when diverged)
};

/// Integrates across the sample instants `t`; interval i -> i+1 holds input
/// row i constant (rows are `width` wide, row-major). The step is
/// (t[i+1] - t[i]) / substeps. On divergence the offending and later samples
/// are NaN.
Trajectory integrate_segment(const ScalarRhs& rhs, double T0, std::span<const double> t,
                             std::span<const double> inputs, std::size_t width, const IntegratorConfig& cfg);

struct SegmentResult {
    int layer = 0;
    Stage stage = Stage::Heat;
    std::size_t begin = 0;
    std::size_t end = 0;
    double start_value = NAN;
    double end_value = NAN; // state at the first sample of the next segment, or at the last sample
};

struct SimulationResult {
    std::string label;
    std::vector<double> t;
    std::vector<double> measured;  // NaN where unavailable
    std::vector<double> predicted; // NaN outside simulated segments
    std::vector<PhaseTag> tags;
    std::vector<SegmentResult> segments;
    bool diverged = false;
    std::optional<double> divergence_time;
    double seconds = 0.0; // wall clock of the core integration

    std::size_t size() const { return t.size(); }
};

enum class StageFilter { Heat, Cool, Both };

/// Every selected (layer, stage) segment integrated on its own, seeded from the
/// measured tool temperature at its first sample.
SimulationResult simulate_type1(const PiecewiseToolModel& model, const PhasedDataset& data, StageFilter filter,
                                const IntegratorConfig& cfg = {});

/// Whole run from one initial value; each interval uses the stage of its
/// starting sample, so segments chain without gaps.
SimulationResult simulate_type2(const PiecewiseToolModel& model, const PhasedDataset& data, double T0 = 24.0,
                                const IntegratorConfig& cfg = {});

enum class ToolSource { Measured, Simulated };
const char* tool_source_name(ToolSource s);
ToolSource parse_tool_source(const std::string& text);

/// Tool temperature and position per sample driving the build equations.
struct BuildDrive {
    std::vector<double> t;
    std::vector<double> T_tool;
    std::vector<Vec3> s_tool;
    std::vector<PhaseTag> tags;
    ToolSource source = ToolSource::Measured;
};

/// Measured source reads T_tool from the data; simulated source runs the tool
/// model (Type II from T0) and uses its prediction.
BuildDrive make_build_drive(const PhasedDataset& data, ToolSource source, const PiecewiseToolModel* tool = nullptr,
                            double T0 = 24.0, const IntegratorConfig& cfg = {});

struct BuildOptions {
    bool freeze_d_on_cool = false; // hold d at its last Heat value while cooling
    IntegratorConfig integrator;
    Execution exec = Execution::Parallel;
};

/// One ODE per location, results ordered like `locations`.
std::vector<SimulationResult> simulate_build(const BuildModel& model, const BuildDrive& drive,
                                             std::span<const Vec3> locations, std::span<const double> T0,
                                             const BuildOptions& opts = {});

/// Distance from the tool to `location` per sample, honoring the freeze switch.
std::vector<double> distance_series(const BuildDrive& drive, const Vec3& location, bool freeze_d_on_cool);

/// `count` points evenly spaced along the wall centerline at the sensor depth.
std::vector<Vec3> centerline_locations(int count, double wall_length, const SensorLayout& layout);

/// timestamp, measured, predicted, layer, stage
void write_trajectory_csv(std::ostream& out, const SimulationResult& result);

} // namespace govdisc
