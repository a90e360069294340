#include "govdisc/timeseries.hpp"

#include "govdisc/error.hpp"
#include "govdisc/log.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace govdisc {

namespace {

const std::array<std::string, kChannelCount> kNames = {
    "t", "T_tool", "T_build1", "T_build2", "T_build3", "T_build4", "omega", "f_t", "f_m", "T_f",
    "P_f", "T_m", "F_m", "x", "y", "z", "vx", "vy", "vz"};

enum class Quantity { Time, Temperature, Rotation, Feed, Torque, Power, Force, Length, Speed };

Quantity quantity_of(Channel c) {
    switch (c) {
    case Channel::t: return Quantity::Time;
    case Channel::T_tool:
    case Channel::T_build1:
    case Channel::T_build2:
    case Channel::T_build3:
    case Channel::T_build4: return Quantity::Temperature;
    case Channel::omega: return Quantity::Rotation;
    case Channel::f_t:
    case Channel::f_m: return Quantity::Feed;
    case Channel::T_f:
    case Channel::T_m: return Quantity::Torque;
    case Channel::P_f: return Quantity::Power;
    case Channel::F_m: return Quantity::Force;
    case Channel::x:
    case Channel::y:
    case Channel::z: return Quantity::Length;
    default: return Quantity::Speed;
    }
}

std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

// CSV fields, honoring double quotes.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

Vec3 parse_vec3(const std::string& text, const std::string& what) {
    auto parts = split(text, ',');
    if (parts.size() != 3) throw SchemaError(what, "expected 'x, y, z' for " + what);
    return {parse_double(parts[0], what), parse_double(parts[1], what), parse_double(parts[2], what)};
}

} // namespace

const std::string& channel_name(Channel c) { return kNames.at(static_cast<int>(c)); }

std::optional<Channel> channel_from_name(const std::string& name) {
    for (int i = 0; i < kChannelCount; ++i)
        if (kNames[i] == name) return static_cast<Channel>(i);
    return std::nullopt;
}

bool is_mandatory(Channel c) {
    return c == Channel::t || c == Channel::T_tool || c == Channel::omega || c == Channel::T_f;
}

bool is_temperature(Channel c) { return quantity_of(c) == Quantity::Temperature; }

double ProcessRecord::get(Channel c) const {
    switch (c) {
    case Channel::t: return t;
    case Channel::T_tool: return T_tool;
    case Channel::T_build1: return T_build[0];
    case Channel::T_build2: return T_build[1];
    case Channel::T_build3: return T_build[2];
    case Channel::T_build4: return T_build[3];
    case Channel::omega: return omega;
    case Channel::f_t: return f_t;
    case Channel::f_m: return f_m;
    case Channel::T_f: return T_f;
    case Channel::P_f: return P_f;
    case Channel::T_m: return T_m;
    case Channel::F_m: return F_m;
    case Channel::x: return s_tool.x;
    case Channel::y: return s_tool.y;
    case Channel::z: return s_tool.z;
    case Channel::vx: return v_tool.x;
    case Channel::vy: return v_tool.y;
    case Channel::vz: return v_tool.z;
    default: return NAN;
    }
}

void ProcessRecord::set(Channel c, double v) {
    switch (c) {
    case Channel::t: t = v; break;
    case Channel::T_tool: T_tool = v; break;
    case Channel::T_build1: T_build[0] = v; break;
    case Channel::T_build2: T_build[1] = v; break;
    case Channel::T_build3: T_build[2] = v; break;
    case Channel::T_build4: T_build[3] = v; break;
    case Channel::omega: omega = v; break;
    case Channel::f_t: f_t = v; break;
    case Channel::f_m: f_m = v; break;
    case Channel::T_f: T_f = v; break;
    case Channel::P_f: P_f = v; break;
    case Channel::T_m: T_m = v; break;
    case Channel::F_m: F_m = v; break;
    case Channel::x: s_tool.x = v; break;
    case Channel::y: s_tool.y = v; break;
    case Channel::z: s_tool.z = v; break;
    case Channel::vx: v_tool.x = v; break;
    case Channel::vy: v_tool.y = v; break;
    case Channel::vz: v_tool.z = v; break;
    default: break;
    }
}

SensorLayout SensorLayout::equally_spaced(double wall_length, double depth) {
    SensorLayout l;
    l.depth_offset = depth;
    for (int i = 0; i < kSensorCount; ++i)
        l.locations[i] = {wall_length * (2.0 * i + 1.0) / (2.0 * kSensorCount), 0.0, -depth};
    return l;
}

void SensorLayout::validate() const {
    for (int i = 0; i < kSensorCount; ++i)
        for (int j = i + 1; j < kSensorCount; ++j)
            if (locations[i] == locations[j])
                throw ConfigError("sensor layout: thermocouples " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1) + " coincide");
}

const char* stage_name(Stage s) { return s == Stage::Heat ? "Heat" : "Cool"; }

Stage parse_stage(const std::string& text) {
    std::string t = lower(trim(text));
    if (t == "heat" || t == "h" || t == "heating") return Stage::Heat;
    if (t == "cool" || t == "c" || t == "cooling") return Stage::Cool;
    throw DataError("unrecognized stage value '" + text + "'");
}

std::vector<Segment> phase_segments(const std::vector<PhaseTag>& tags) {
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (segs.empty() || !(tags[i] == tags[i - 1]))
            segs.push_back({tags[i].layer, tags[i].stage, i, i + 1});
        else
            segs.back().end = i + 1;
    }
    return segs;
}

PhasedDataset::PhasedDataset(Dataset data, std::vector<PhaseTag> tags)
    : data_(std::move(data)), tags_(std::move(tags)) {
    if (tags_.size() != data_.records.size())
        throw DataError("phase tags (" + std::to_string(tags_.size()) + ") do not match records (" +
                        std::to_string(data_.records.size()) + ")");
    for (std::size_t i = 0; i < tags_.size(); ++i) {
        if (tags_[i].layer < 1) throw DataError("layer index < 1 at row " + std::to_string(i));
        if (i == 0) continue;
        const auto& a = tags_[i - 1];
        const auto& b = tags_[i];
        bool ok = (b.layer == a.layer && (a.stage == b.stage || (a.stage == Stage::Heat && b.stage == Stage::Cool))) ||
                  b.layer == a.layer + 1;
        if (!ok)
            throw DataError("phase tags out of order at row " + std::to_string(i) + " (layer " +
                            std::to_string(a.layer) + " " + stage_name(a.stage) + " -> layer " +
                            std::to_string(b.layer) + " " + stage_name(b.stage) + ")");
    }
}

std::vector<double> PhasedDataset::channel(Channel c) const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& r : records()) out.push_back(r.get(c));
    return out;
}

// ---------------------------------------------------------------------------
// Schema and units

double to_canonical(Channel c, const std::string& unit_raw, double v) {
    std::string u = lower(trim(unit_raw));
    if (u.empty()) return v;
    auto bad = [&]() -> double {
        throw SchemaError(channel_name(c), "unsupported unit '" + unit_raw + "' for channel " + channel_name(c));
    };
    switch (quantity_of(c)) {
    case Quantity::Time:
        if (u == "s") return v;
        if (u == "ms") return v * 1e-3;
        if (u == "min") return v * 60.0;
        return bad();
    case Quantity::Temperature:
        if (u == "c" || u == "degc") return v;
        if (u == "k") return v - 273.15;
        if (u == "f" || u == "degf") return (v - 32.0) * 5.0 / 9.0;
        return bad();
    case Quantity::Rotation:
        if (u == "rpm") return v;
        if (u == "rad/s") return v * 60.0 / (2.0 * M_PI);
        return bad();
    case Quantity::Feed:
        if (u == "mm/min") return v;
        if (u == "mm/s") return v * 60.0;
        if (u == "in/min") return v * 25.4;
        return bad();
    case Quantity::Torque:
        if (u == "n*m" || u == "nm" || u == "n.m" || u == "n·m") return v;
        if (u == "n*mm" || u == "nmm") return v * 1e-3;
        if (u == "lbf*in" || u == "lbf.in") return v * 0.112984829;
        return bad();
    case Quantity::Power:
        if (u == "w") return v;
        if (u == "kw") return v * 1e3;
        return bad();
    case Quantity::Force:
        if (u == "n") return v;
        if (u == "kn") return v * 1e3;
        if (u == "lbf") return v * 4.44822162;
        return bad();
    case Quantity::Length:
        if (u == "mm") return v;
        if (u == "m") return v * 1e3;
        if (u == "in") return v * 25.4;
        return bad();
    case Quantity::Speed:
        if (u == "mm/s") return v;
        if (u == "mm/min") return v / 60.0;
        if (u == "in/min") return v * 25.4 / 60.0;
        return bad();
    }
    return bad();
}

Schema Schema::canonical() {
    Schema s;
    for (int i = 0; i < kChannelCount; ++i) s.columns[static_cast<Channel>(i)] = {kNames[i], ""};
    s.layer_column = "layer";
    s.stage_column = "stage";
    return s;
}

Schema Schema::from_config(const KvConfig& cfg) {
    static const std::vector<std::string> known = {"", "columns", "units", "phase", "layout", "dataset"};
    for (const auto& sec : cfg.sections())
        if (std::find(known.begin(), known.end(), sec) == known.end())
            throw SchemaError(sec, cfg.source() + ": unknown schema section [" + sec + "]");

    Schema s;
    s.explicit_columns = cfg.has_section("columns") && !cfg.section("columns").empty();
    if (!s.explicit_columns) s = canonical();
    for (const auto& e : cfg.section("columns")) {
        auto c = channel_from_name(e.key);
        if (!c) throw SchemaError(e.key, cfg.source() + ":" + std::to_string(e.line) + ": unknown channel '" + e.key + "'");
        s.columns[*c].header = e.value;
    }
    for (const auto& e : cfg.section("units")) {
        auto c = channel_from_name(e.key);
        if (!c) throw SchemaError(e.key, cfg.source() + ":" + std::to_string(e.line) + ": unknown channel '" + e.key + "'");
        if (!s.columns.count(*c)) s.columns[*c] = {e.key, ""};
        to_canonical(*c, e.value, 0.0); // validates the unit
        s.columns[*c].unit = e.value;
    }
    for (const auto& e : cfg.section("phase")) {
        if (e.key == "layer")
            s.layer_column = e.value;
        else if (e.key == "stage")
            s.stage_column = e.value;
        else
            throw SchemaError(e.key, cfg.source() + ":" + std::to_string(e.line) + ": unknown phase key '" + e.key + "'");
    }
    if (cfg.has_section("layout")) {
        SensorLayout l = SensorLayout::equally_spaced();
        for (const auto& e : cfg.section("layout")) {
            if (e.key == "depth_offset") {
                l.depth_offset = parse_double(e.value, "layout.depth_offset");
            } else if (e.key.size() == 4 && e.key.rfind("ktc", 0) == 0 && e.key[3] >= '1' && e.key[3] <= '4') {
                l.locations[e.key[3] - '1'] = parse_vec3(e.value, "layout." + e.key);
            } else {
                throw SchemaError(e.key, cfg.source() + ":" + std::to_string(e.line) + ": unknown layout key '" + e.key + "'");
            }
        }
        l.validate();
        s.layout = l;
    }
    for (const auto& e : cfg.section("dataset")) {
        if (e.key == "id")
            s.dataset_id = e.value;
        else
            throw SchemaError(e.key, cfg.source() + ":" + std::to_string(e.line) + ": unknown dataset key '" + e.key + "'");
    }
    for (const auto& e : cfg.section("")) throw SchemaError(e.key, cfg.source() + ": key '" + e.key + "' outside any section");
    return s;
}

Schema Schema::load(const std::filesystem::path& path) { return from_config(KvConfig::load(path)); }

// ---------------------------------------------------------------------------
// Ingestion

Dataset load_dataset(std::istream& in, const Schema& schema, const std::string& id) {
    Dataset ds;
    ds.id = schema.dataset_id.empty() ? id : schema.dataset_id;
    if (schema.layout) ds.layout = *schema.layout;

    std::string line;
    if (!std::getline(in, line)) throw DataError(id + ": empty file");
    auto header = split_csv(line);

    std::vector<int> col_channel(header.size(), -1);
    std::vector<std::string> col_unit(header.size());
    int layer_col = -1, stage_col = -1;
    for (const auto& [ch, spec] : schema.columns) {
        auto it = std::find(header.begin(), header.end(), spec.header);
        if (it == header.end()) {
            if (is_mandatory(ch))
                throw SchemaError(channel_name(ch), id + ": missing mandatory column for channel " + channel_name(ch) +
                                                        " (expected header '" + spec.header + "')");
            if (schema.explicit_columns)
                log::warn(id + ": declared column '" + spec.header + "' for " + channel_name(ch) + " not found");
            continue;
        }
        auto idx = static_cast<std::size_t>(it - header.begin());
        col_channel[idx] = static_cast<int>(ch);
        col_unit[idx] = spec.unit;
        ds.present.set(static_cast<int>(ch));
    }
    for (Channel ch : {Channel::t, Channel::T_tool, Channel::omega, Channel::T_f})
        if (!ds.has(ch))
            throw SchemaError(channel_name(ch), id + ": schema does not map mandatory channel " + channel_name(ch));

    for (std::size_t i = 0; i < header.size(); ++i) {
        if (col_channel[i] >= 0) continue;
        if (schema.layer_column && header[i] == *schema.layer_column) {
            layer_col = static_cast<int>(i);
        } else if (schema.stage_column && header[i] == *schema.stage_column) {
            stage_col = static_cast<int>(i);
        } else {
            log::warn(id + ": ignoring unmapped column '" + header[i] + "'");
        }
    }
    bool tagged = layer_col >= 0 && stage_col >= 0;
    if ((layer_col >= 0) != (stage_col >= 0))
        log::warn(id + ": only one of layer/stage columns present; explicit phase tags ignored");
    std::vector<PhaseTag> tags;

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != header.size())
            throw DataError(id + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        ProcessRecord rec;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (col_channel[i] < 0) continue;
            auto ch = static_cast<Channel>(col_channel[i]);
            double v;
            if (fields[i].empty()) {
                v = NAN;
            } else {
                try {
                    v = parse_double(fields[i], channel_name(ch));
                } catch (const ConfigError&) {
                    throw DataError(id + ": row " + std::to_string(row) + ": non-numeric value '" + fields[i] +
                                    "' in column '" + header[i] + "'");
                }
                v = to_canonical(ch, col_unit[i], v);
            }
            rec.set(ch, v);
        }
        if (!std::isfinite(rec.t)) throw DataError(id + ": row " + std::to_string(row) + ": missing timestamp");
        if (!std::isfinite(rec.T_tool))
            throw DataError(id + ": row " + std::to_string(row) + ": non-finite tool temperature");
        for (int k = 0; k < kSensorCount; ++k)
            if (ds.has(static_cast<Channel>(static_cast<int>(Channel::T_build1) + k)) && !std::isfinite(rec.T_build[k]))
                throw DataError(id + ": row " + std::to_string(row) + ": non-finite build temperature KTC" +
                                std::to_string(k + 1));
        if (!(rec.omega >= 0.0)) throw DataError(id + ": row " + std::to_string(row) + ": spindle speed must be >= 0");
        if (!ds.records.empty() && !(rec.t > ds.records.back().t))
            throw DataError(id + ": non-monotone timestamps at row " + std::to_string(row));
        if (tagged) {
            PhaseTag tag;
            try {
                tag.layer = static_cast<int>(parse_int(fields[layer_col], "layer"));
            } catch (const ConfigError&) {
                throw DataError(id + ": row " + std::to_string(row) + ": bad layer value '" + fields[layer_col] + "'");
            }
            tag.stage = parse_stage(fields[stage_col]);
            tags.push_back(tag);
        }
        ds.records.push_back(rec);
        ++row;
    }
    if (tagged) ds.column_tags = std::move(tags);
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file " + path.string());
    return load_dataset(in, schema, path.stem().string());
}

void write_dataset_csv(std::ostream& out, const PhasedDataset& data) {
    std::vector<Channel> cols;
    for (int i = 0; i < kChannelCount; ++i)
        if (data.has(static_cast<Channel>(i))) cols.push_back(static_cast<Channel>(i));
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << channel_name(cols[i]);
    out << ",layer,stage\n";
    char buf[40];
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto& rec = data.records()[r];
        for (std::size_t i = 0; i < cols.size(); ++i) {
            double v = rec.get(cols[i]);
            if (std::isfinite(v)) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << (i ? "," : "") << buf;
            } else {
                out << (i ? "," : "");
            }
        }
        out << ',' << data.tags()[r].layer << ',' << stage_name(data.tags()[r].stage) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Segmentation

PhasedDataset segment_phases(const Dataset& data, const SegmentationRule& rule) {
    if (data.records.empty()) throw DataError(data.id + ": cannot segment an empty dataset");
    if (rule.mode == SegmentationRule::Mode::Columns) {
        if (!data.column_tags) throw ConfigError(data.id + ": no layer/stage columns; use automatic segmentation");
        return PhasedDataset(data, *data.column_tags);
    }

    const auto& recs = data.records;
    std::size_t n = recs.size();
    std::vector<double> speed(n, 0.0);
    if (data.has(Channel::vx) && data.has(Channel::vy)) {
        for (std::size_t i = 0; i < n; ++i) speed[i] = std::hypot(recs[i].v_tool.x, recs[i].v_tool.y);
    } else if (data.has(Channel::x) && data.has(Channel::y)) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t a = i == 0 ? 0 : i - 1, b = std::min(n - 1, i + 1);
            if (a == b) continue;
            double dt = recs[b].t - recs[a].t;
            speed[i] = std::hypot(recs[b].s_tool.x - recs[a].s_tool.x, recs[b].s_tool.y - recs[a].s_tool.y) / dt;
        }
    } else {
        throw ConfigError(data.id + ": automatic segmentation needs tool velocity (vx, vy) or position (x, y)");
    }

    std::vector<PhaseTag> tags(n);
    int layer = 1;
    bool any_heat = false;
    for (std::size_t i = 0; i < n; ++i) {
        bool heat = recs[i].omega >= rule.omega_threshold && speed[i] > rule.speed_gate;
        Stage st = heat ? Stage::Heat : Stage::Cool;
        // A leading idle run forms a cool-only layer 1; every Cool->Heat edge opens a layer.
        if (i > 0 && heat && tags[i - 1].stage == Stage::Cool) ++layer;
        tags[i] = {layer, st};
        any_heat = any_heat || heat;
    }
    if (!any_heat) throw DataError(data.id + ": segmentation found no heating samples");
    return PhasedDataset(data, std::move(tags));
}

PhasedDataset select_layers(const PhasedDataset& phased, int first, int last, bool renumber) {
    if (first > last) throw RangeError("layer range [" + std::to_string(first) + ", " + std::to_string(last) + "] is empty");
    if (first < phased.first_layer() || last > phased.last_layer())
        throw RangeError("layer range [" + std::to_string(first) + ", " + std::to_string(last) +
                         "] outside available layers [" + std::to_string(phased.first_layer()) + ", " +
                         std::to_string(phased.last_layer()) + "]");
    Dataset sub = phased.data();
    sub.records.clear();
    sub.column_tags.reset();
    std::vector<PhaseTag> tags;
    for (std::size_t i = 0; i < phased.size(); ++i) {
        auto tag = phased.tags()[i];
        if (tag.layer < first || tag.layer > last) continue;
        if (renumber) tag.layer -= first - 1;
        sub.records.push_back(phased.records()[i]);
        tags.push_back(tag);
    }
    if (sub.records.empty()) throw RangeError("layer range selects no records");
    return PhasedDataset(std::move(sub), std::move(tags));
}

} // namespace govdisc
