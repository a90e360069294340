#pragma once

#include "govdisc/govmodel.hpp"
#include "govdisc/kvconfig.hpp"
#include "govdisc/timeseries.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace govdisc {

/// Spindle torque during Heat stages (zero while cooling).
struct TorqueProfile {
    enum class Kind { Constant, RampThenHold, WithRipple };
    Kind kind = Kind::Constant;
    double level = 60.0;     // N*m
    double amplitude = 0.1;  // ripple, relative to level
    double period = 30.0;    // ripple period, s
    double ramp_time = 20.0; // RampThenHold: rise from half level to level, s

    static TorqueProfile constant(double level) { return {Kind::Constant, level, 0.0, 30.0, 20.0}; }
    static TorqueProfile ripple(double level, double amplitude, double period) {
        return {Kind::WithRipple, level, amplitude, period, 20.0};
    }
    /// `t_heat`: seconds since the layer's Heat stage began; `t`: absolute time.
    double value(double t_heat, double t) const;
};

/// Per-layer cycle: preheat (tool idle over the start of the track), then
/// deposition (spindle eases down to the deposition speed while the tool
/// traverses the wall), then cooling with the tool parked where it stopped.
struct ProcessPlan {
    enum class InputHold { Continuous, SampleHold };

    int layers = 16;
    double wall_length = 216.0;    // mm
    double traverse_speed = 127.0; // mm/min
    double deposit_omega = 135.0;  // rpm
    double preheat_omega = 350.0;  // rpm
    double preheat_duration = 20.0; // s
    double cool_duration = 150.0;   // s
    double spindle_ramp = 20.0;     // s, cosine ease from preheat to deposit speed
    double preheat_feed = 0.93;     // mm/s feedstock
    double deposit_feed = 1.93;     // mm/s feedstock
    double layer_thickness = 1.52;  // mm
    double sensor_depth = 2.54;     // mm below the substrate surface
    double ambient = 24.0;          // degC, initial tool and build temperature
    double sample_period = 1.0;     // s
    int substeps = 20;              // ground-truth RK4 steps per sample
    InputHold input_hold = InputHold::Continuous;
    TorqueProfile torque;
    double noise = 0.0;             // relative Gaussian sigma on temperatures
    std::uint64_t seed = 1;

    void validate() const;
    double deposition_duration() const; // whole seconds of traverse
    double heat_duration() const { return preheat_duration + deposition_duration(); }
    double cycle_duration() const { return heat_duration() + cool_duration; }
    std::size_t sample_count() const;
    SensorLayout layout() const { return SensorLayout::equally_spaced(wall_length, sensor_depth); }

    /// Reads a [plan] section; unknown keys are rejected.
    static ProcessPlan from_config(const KvConfig& cfg);
};

/// Process inputs at one instant.
struct PlanInputs {
    double omega = 0.0;
    double T_f = 0.0;
    double f_m = 0.0; // mm/min
    double f_t = 0.0; // mm/min
    Vec3 s_tool;
    Vec3 v_tool;
    PhaseTag tag;
};

/// Inputs at absolute time t. Stage boundaries belong to the later stage.
PlanInputs plan_inputs(const ProcessPlan& plan, double t);

/// Inputs at offset `tau` into `layer`'s cycle while in `stage`; used inside a
/// sample interval so a boundary at its end does not leak into it.
PlanInputs plan_inputs(const ProcessPlan& plan, int layer, Stage stage, double tau);

/// One entry per sample.
struct InputProfile {
    std::vector<double> t;
    std::vector<PlanInputs> inputs;
    std::size_t size() const { return t.size(); }
};

InputProfile generate_profile(const ProcessPlan& plan);

struct SyntheticDataset {
    PhasedDataset data;   // noisy
    PhasedDataset shadow; // noiseless
    ModelFile truth;
    ProcessPlan plan;
};

/// Integrates tool and (optionally) build models jointly through the plan,
/// samples every sample_period and adds seeded multiplicative noise to the
/// temperature channels.
SyntheticDataset generate_ground_truth(const PiecewiseToolModel& tool, const std::optional<BuildModel>& build,
                                       const ProcessPlan& plan);

struct TermError {
    std::string term;
    double truth = 0.0;
    double found = 0.0;
    double relative = 0.0;
};

struct RecoveryReport {
    double jaccard = 0.0;
    bool exact_support = false;
    std::vector<TermError> errors; // over the support intersection, library order
    double max_relative_error() const;
    bool passes(double threshold) const;
    std::string text() const;
};

RecoveryReport recovery_report(const SparseModel& truth, const SparseModel& discovered);

} // namespace govdisc
