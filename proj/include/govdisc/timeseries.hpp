#pragma once

#include "govdisc/kvconfig.hpp"

#include <array>
#include <bitset>
#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace govdisc {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Euclidean distance between the tool (treated as the point heat source)
/// and a substrate location, in mm.
inline double tool_distance(const Vec3& tool, const Vec3& location) {
    double dx = tool.x - location.x, dy = tool.y - location.y, dz = tool.z - location.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

constexpr int kSensorCount = 4;

// Canonical channels. Units: s, degC, rpm, mm/min (feeds), N*m, W, N, mm, mm/s.
enum class Channel : int {
    t,
    T_tool,
    T_build1,
    T_build2,
    T_build3,
    T_build4,
    omega,
    f_t,
    f_m,
    T_f,
    P_f,
    T_m,
    F_m,
    x,
    y,
    z,
    vx,
    vy,
    vz,
    Count
};

constexpr int kChannelCount = static_cast<int>(Channel::Count);

const std::string& channel_name(Channel c);
std::optional<Channel> channel_from_name(const std::string& name);
bool is_mandatory(Channel c);
bool is_temperature(Channel c);

/// One timestamped row of all in-process channels. Absent channels hold NaN.
struct ProcessRecord {
    double t = 0.0;
    double T_tool = NAN;
    std::array<double, kSensorCount> T_build{NAN, NAN, NAN, NAN};
    double omega = NAN;
    double f_t = NAN;
    double f_m = NAN;
    double T_f = NAN;
    double P_f = NAN;
    double T_m = NAN;
    double F_m = NAN;
    Vec3 s_tool{NAN, NAN, NAN};
    Vec3 v_tool{NAN, NAN, NAN};

    double get(Channel c) const;
    void set(Channel c, double value);
};

struct SensorLayout {
    std::array<Vec3, kSensorCount> locations;
    double depth_offset = 2.54;

    /// Thermocouples at the centers of four equal sub-spans of the wall,
    /// `depth` below the substrate surface (z = 0).
    static SensorLayout equally_spaced(double wall_length = 216.0, double depth = 2.54);
    void validate() const;
    friend bool operator==(const SensorLayout&, const SensorLayout&) = default;
};

enum class Stage { Heat, Cool };
const char* stage_name(Stage s);
Stage parse_stage(const std::string& text);

struct PhaseTag {
    int layer = 1;
    Stage stage = Stage::Heat;
    friend bool operator==(const PhaseTag&, const PhaseTag&) = default;
};

using ChannelSet = std::bitset<kChannelCount>;

/// Ingested log before phase tagging. `column_tags` is filled only when the
/// schema declares explicit layer/stage columns.
struct Dataset {
    std::string id;
    std::vector<ProcessRecord> records;
    ChannelSet present;
    SensorLayout layout = SensorLayout::equally_spaced();
    std::optional<std::vector<PhaseTag>> column_tags;

    bool has(Channel c) const { return present.test(static_cast<int>(c)); }
    std::size_t size() const { return records.size(); }
};

/// Records tagged with (layer, Heat|Cool). Tags are non-decreasing in
/// (layer, stage) order with Heat before Cool inside a layer.
class PhasedDataset {
public:
    PhasedDataset() = default;
    PhasedDataset(Dataset data, std::vector<PhaseTag> tags);

    const std::string& id() const { return data_.id; }
    const std::vector<ProcessRecord>& records() const { return data_.records; }
    const std::vector<PhaseTag>& tags() const { return tags_; }
    const SensorLayout& layout() const { return data_.layout; }
    const Dataset& data() const { return data_; }
    bool has(Channel c) const { return data_.has(c); }
    std::size_t size() const { return data_.records.size(); }
    int first_layer() const { return tags_.empty() ? 0 : tags_.front().layer; }
    int last_layer() const { return tags_.empty() ? 0 : tags_.back().layer; }
    /// Number of distinct layers (L).
    int layer_count() const { return tags_.empty() ? 0 : last_layer() - first_layer() + 1; }

    std::vector<double> channel(Channel c) const;

private:
    Dataset data_;
    std::vector<PhaseTag> tags_;
};

/// Maximal run of records sharing one (layer, stage) tag; [begin, end).
struct Segment {
    int layer = 0;
    Stage stage = Stage::Heat;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

std::vector<Segment> phase_segments(const std::vector<PhaseTag>& tags);

// ---------------------------------------------------------------------------
// Schema

/// Column-mapping config. See docs/formats.md for the file layout.
struct Schema {
    struct Column {
        std::string header;
        std::string unit; // empty means canonical
    };
    std::map<Channel, Column> columns;
    bool explicit_columns = false;
    std::optional<std::string> layer_column;
    std::optional<std::string> stage_column;
    std::optional<SensorLayout> layout;
    std::string dataset_id;

    /// Header names equal canonical channel names; `layer`/`stage` columns are
    /// picked up when present.
    static Schema canonical();
    static Schema from_config(const KvConfig& cfg);
    static Schema load(const std::filesystem::path& path);
};

/// Multiplier/offset converting `unit` to the canonical unit of `c`.
double to_canonical(Channel c, const std::string& unit, double value);

Dataset load_dataset(std::istream& in, const Schema& schema, const std::string& id = "stream");
Dataset load_dataset(const std::filesystem::path& path, const Schema& schema);

/// Canonical CSV: present channels plus `layer` and `stage` columns.
void write_dataset_csv(std::ostream& out, const PhasedDataset& data);

struct SegmentationRule {
    enum class Mode { Columns, Auto };
    Mode mode = Mode::Columns;
    double omega_threshold = 50.0; // rpm
    double speed_gate = 0.1;       // mm/s, horizontal tool speed

    static SegmentationRule columns() { return {}; }
    static SegmentationRule automatic() {
        SegmentationRule r;
        r.mode = Mode::Auto;
        return r;
    }
};

PhasedDataset segment_phases(const Dataset& data, const SegmentationRule& rule);

/// Keeps records whose layer lies in [first, last]. Layer indices are kept
/// unless `renumber` is set.
PhasedDataset select_layers(const PhasedDataset& phased, int first, int last, bool renumber = false);

} // namespace govdisc
