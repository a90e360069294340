#include "govdisc/govmodel.hpp"

#include "govdisc/error.hpp"
#include "govdisc/fsutil.hpp"
#include "govdisc/kvconfig.hpp"
#include "govdisc/regression_set.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace govdisc {

void InitialConditions::validate() const {
    if (!std::isfinite(T_tool0)) throw ConfigError("initial tool temperature must be finite");
    for (double v : T_build0)
        if (!std::isfinite(v)) throw ConfigError("initial build temperatures must be finite");
}

std::optional<std::string> ModelFile::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return v;
    return std::nullopt;
}

void ModelFile::set_meta(const std::string& key, const std::string& value) {
    for (auto& [k, v] : metadata)
        if (k == key) {
            v = value;
            return;
        }
    metadata.emplace_back(key, value);
}

PiecewiseToolModel ModelFile::tool() const {
    if (!heating || !cooling) throw ConfigError("model file lacks a heating or cooling submodel");
    return {*heating, *cooling};
}

BuildModel ModelFile::build_model() const {
    if (!build) throw ConfigError("model file lacks a build submodel");
    const std::vector<std::string> want{feature::T_build, feature::T_tool, feature::d};
    if (build->library.features() != want)
        throw ConfigError("build submodel must be over exactly {T_build, T_tool, d}");
    return {*build, layout.value_or(SensorLayout::equally_spaced())};
}

ModelFile make_file(const PiecewiseToolModel& tool) {
    ModelFile f;
    f.heating = tool.heating;
    f.cooling = tool.cooling;
    return f;
}

ModelFile make_file(const BuildModel& build) {
    ModelFile f;
    f.build = build.model;
    f.layout = build.layout;
    return f;
}

// ---------------------------------------------------------------- rhs

BoundModel::BoundModel(const SparseModel& model, const std::vector<std::string>& slots) {
    if (model.library.features().size() > 8) throw ConfigError("bound models support at most 8 features");
    for (const auto& f : model.library.features()) {
        auto it = std::find_if(slots.begin(), slots.end(),
                               [&](const std::string& s) { return canonical_feature(s) == f; });
        if (it == slots.end()) throw DataError("missing input '" + f + "' for model evaluation");
        feature_slot_.push_back(static_cast<int>(it - slots.begin()));
    }
    for (int p : model.gamma.indices()) terms_.push_back({model.xi[p], model.library.term(p).exponents});
}

double BoundModel::operator()(std::span<const double> slot_values) const {
    double buf[8];
    const std::size_t nf = feature_slot_.size();
    for (std::size_t f = 0; f < nf; ++f) buf[f] = slot_values[feature_slot_[f]];
    std::span<const double> vals(buf, nf);
    double acc = 0.0;
    for (const auto& t : terms_) acc += t.coefficient * monomial(vals, t.exponents);
    return acc;
}

double rhs_tool(const PiecewiseToolModel& model, Stage stage, double T, const std::map<std::string, double>& inputs) {
    const SparseModel& sub = model.stage(stage);
    std::map<std::string, double> canon;
    for (const auto& [k, v] : inputs) canon[canonical_feature(k)] = v;
    std::vector<double> vals;
    for (const auto& f : sub.library.features()) {
        if (f == feature::T) {
            vals.push_back(T);
            continue;
        }
        auto it = canon.find(f);
        if (it == canon.end())
            throw DataError(std::string("missing input '") + f + "' for the " + (stage == Stage::Heat ? "heating" : "cooling") +
                            " submodel");
        vals.push_back(it->second);
    }
    return sub.evaluate(vals);
}

double rhs_build(const BuildModel& model, double T_build, double T_tool, double d) {
    const double vals[3] = {T_build, T_tool, d};
    return model.model.evaluate(vals);
}

// ---------------------------------------------------------------- file format

std::uint32_t crc32_of(std::string_view bytes) {
    uLong c = crc32(0L, Z_NULL, 0);
    return static_cast<std::uint32_t>(
        crc32(c, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::string crc32_hex(std::string_view bytes) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc32_of(bytes));
    return buf;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_text(const std::string& s, const std::string& what) {
    if (s.find_first_of("#\n\r") != std::string::npos)
        throw ConfigError(what + " may not contain '#' or line breaks: " + s);
}

const char* submodel_names[] = {"heating", "cooling", "build"};

void write_submodel(std::ostringstream& os, const char* name, const SparseModel& m) {
    os << "\n[submodel " << name << "]\n";
    os << "features = ";
    for (std::size_t f = 0; f < m.library.features().size(); ++f) {
        check_text(m.library.features()[f], "feature name");
        os << (f ? ", " : "") << m.library.features()[f];
    }
    os << "\nmax_degree = " << m.library.max_degree() << "\n";
    os << "k = " << m.hp.k << "\n";
    os << "lambda2 = " << num(m.hp.lambda2) << "\n";
    os << "big_m = " << num(m.hp.big_m) << "\n";
    os << "stage1_objective = " << num(m.diag.stage1_objective) << "\n";
    os << "stage2_residual_norm = " << num(m.diag.stage2_residual_norm) << "\n";
    os << "condition_estimate = " << num(m.diag.condition_estimate) << "\n";
    check_text(m.diag.solver, "solver name");
    os << "solver = " << m.diag.solver << "\n";
    os << "supports_evaluated = " << m.diag.supports_evaluated << "\n";
    os << "excluded =";
    for (std::size_t i = 0; i < m.diag.excluded.size(); ++i) os << (i ? ", " : " ") << m.diag.excluded[i];
    os << "\n";
    for (int p : m.gamma.indices()) {
        os << "term =";
        for (int e : m.library.term(p).exponents) os << " " << e;
        os << " | " << num(m.xi[p]) << "   # " << m.library.term_name(p) << "\n";
    }
}

SparseModel read_submodel(const std::vector<KvConfig::Entry>& entries, const std::string& where) {
    std::vector<std::string> features;
    int max_degree = -1;
    std::optional<long> k;
    HyperParams hp;
    FitDiagnostics diag;
    std::vector<std::pair<std::vector<int>, double>> terms;
    auto fail = [&](const KvConfig::Entry& e, const std::string& msg) {
        throw FormatError(where + ":" + std::to_string(e.line) + ": " + msg);
    };
    for (const auto& e : entries) {
        try {
            if (e.key == "features") {
                for (auto& f : split(e.value, ',')) features.push_back(canonical_feature(f));
            } else if (e.key == "max_degree") {
                max_degree = static_cast<int>(parse_int(e.value, e.key));
            } else if (e.key == "k") {
                k = parse_int(e.value, e.key);
            } else if (e.key == "lambda2") {
                hp.lambda2 = parse_double(e.value, e.key);
            } else if (e.key == "big_m") {
                hp.big_m = parse_double(e.value, e.key);
            } else if (e.key == "stage1_objective") {
                diag.stage1_objective = parse_double(e.value, e.key);
            } else if (e.key == "stage2_residual_norm") {
                diag.stage2_residual_norm = parse_double(e.value, e.key);
            } else if (e.key == "condition_estimate") {
                diag.condition_estimate = parse_double(e.value, e.key);
            } else if (e.key == "solver") {
                diag.solver = e.value;
            } else if (e.key == "supports_evaluated") {
                diag.supports_evaluated = static_cast<std::uint64_t>(parse_int(e.value, e.key));
            } else if (e.key == "excluded") {
                if (!e.value.empty())
                    for (auto& s : split(e.value, ',')) diag.excluded.push_back(static_cast<int>(parse_int(s, e.key)));
            } else if (e.key == "term") {
                auto bar = e.value.find('|');
                if (bar == std::string::npos) fail(e, "term needs 'exponents | coefficient'");
                std::vector<int> exps;
                std::istringstream ss(e.value.substr(0, bar));
                std::string tok;
                while (ss >> tok) {
                    if (tok.rfind("ext:", 0) == 0) fail(e, "term extension '" + tok + "' is not supported");
                    exps.push_back(static_cast<int>(parse_int(tok, "term exponent")));
                }
                terms.emplace_back(std::move(exps), parse_double(e.value.substr(bar + 1), "term coefficient"));
            } else {
                fail(e, "unknown key '" + e.key + "'");
            }
        } catch (const FormatError&) {
            throw;
        } catch (const ConfigError& ex) {
            fail(e, ex.what());
        }
    }
    if (features.empty() && max_degree < 0) throw FormatError(where + ": submodel needs features and max_degree");
    if (max_degree < 0) throw FormatError(where + ": missing max_degree");
    for (const auto& [exps, c] : terms) {
        if (exps.size() != features.size())
            throw FormatError(where + ": term has " + std::to_string(exps.size()) + " exponents for " +
                              std::to_string(features.size()) + " features");
        int deg = 0;
        for (int x : exps) {
            if (x < 0) throw FormatError(where + ": negative exponent");
            deg += x;
        }
        if (deg > max_degree) throw FormatError(where + ": term degree exceeds max_degree");
    }
    SparseModel m;
    try {
        m = make_model(features, max_degree, terms);
    } catch (const ConfigError& ex) {
        throw FormatError(where + ": " + ex.what());
    }
    if (m.gamma.count() != terms.size()) throw FormatError(where + ": duplicate term");
    if (k && *k != static_cast<long>(terms.size()))
        throw FormatError(where + ": k = " + std::to_string(*k) + " but " + std::to_string(terms.size()) +
                          " terms listed");
    hp.k = static_cast<int>(terms.size());
    hp.max_degree = max_degree;
    m.hp = hp;
    m.diag = diag;
    return m;
}

Vec3 parse_vec3(const std::string& text, const std::string& what) {
    auto parts = split(text, ',');
    if (parts.size() != 3) throw FormatError(what + ": expected 'x, y, z'");
    return {parse_double(parts[0], what), parse_double(parts[1], what), parse_double(parts[2], what)};
}

std::string body_of(const ModelFile& model) {
    std::ostringstream os;
    os << "[metadata]\n";
    for (const auto& [k, v] : model.metadata) {
        check_text(k, "metadata key");
        check_text(v, "metadata value");
        if (k.find('=') != std::string::npos || trim(k) != k || k.empty())
            throw ConfigError("invalid metadata key '" + k + "'");
        os << k << " = " << v << "\n";
    }
    if (model.layout) {
        os << "\n[layout]\n";
        for (int i = 0; i < kSensorCount; ++i) {
            const auto& l = model.layout->locations[i];
            os << "ktc" << i + 1 << " = " << num(l.x) << ", " << num(l.y) << ", " << num(l.z) << "\n";
        }
        os << "depth_offset = " << num(model.layout->depth_offset) << "\n";
    }
    if (model.heating) write_submodel(os, submodel_names[0], *model.heating);
    if (model.cooling) write_submodel(os, submodel_names[1], *model.cooling);
    if (model.build) write_submodel(os, submodel_names[2], *model.build);
    return os.str();
}

std::string header_for(const std::string& body) {
    return std::string(kModelFormatId) + " " + std::to_string(kModelFormatVersion) + "\nchecksum crc32 " +
           crc32_hex(body) + "\n";
}

struct Split {
    std::string first, second, body;
};

Split split_header(const std::string& text, const std::string& source) {
    auto nl1 = text.find('\n');
    if (nl1 == std::string::npos) throw FormatError(source + ": truncated model file");
    auto nl2 = text.find('\n', nl1 + 1);
    if (nl2 == std::string::npos) throw FormatError(source + ": missing checksum line");
    return {trim(text.substr(0, nl1)), trim(text.substr(nl1 + 1, nl2 - nl1 - 1)), text.substr(nl2 + 1)};
}

void check_format_line(const std::string& line, const std::string& source) {
    std::istringstream ss(line);
    std::string id, version;
    ss >> id >> version;
    if (id != kModelFormatId) throw FormatError(source + ": not a model file (format id '" + id + "')");
    if (version != std::to_string(kModelFormatVersion))
        throw FormatError(source + ": unsupported model format version '" + version + "' (this build reads " +
                          std::to_string(kModelFormatVersion) + ")");
}

} // namespace

std::string serialize_model(const ModelFile& model) {
    std::string body = body_of(model);
    return header_for(body) + body;
}

ModelFile parse_model(const std::string& text, const std::string& source) {
    auto parts = split_header(text, source);
    check_format_line(parts.first, source);
    std::istringstream cs(parts.second);
    std::string word, algo, sum;
    cs >> word >> algo >> sum;
    if (word != "checksum" || algo != "crc32" || sum.size() != 8)
        throw FormatError(source + ": malformed checksum line");
    if (sum != crc32_hex(parts.body))
        throw CorruptionError(source + ": checksum mismatch (file says " + sum + ", body hashes to " +
                              crc32_hex(parts.body) + ")");

    std::istringstream in(parts.body);
    KvConfig cfg;
    try {
        cfg = KvConfig::parse(in, source);
    } catch (const ConfigError& e) {
        throw FormatError(e.what());
    }
    ModelFile m;
    for (const auto& sec : cfg.sections()) {
        const auto& entries = cfg.section(sec);
        if (sec.empty()) {
            if (!entries.empty()) throw FormatError(source + ": keys outside any section");
            continue;
        }
        if (sec == "metadata") {
            for (const auto& e : entries) m.metadata.emplace_back(e.key, e.value);
        } else if (sec == "layout") {
            SensorLayout l;
            for (const auto& e : entries) {
                if (e.key.size() == 4 && e.key.rfind("ktc", 0) == 0 && e.key[3] >= '1' && e.key[3] <= '4')
                    l.locations[e.key[3] - '1'] = parse_vec3(e.value, source + " " + e.key);
                else if (e.key == "depth_offset")
                    l.depth_offset = parse_double(e.value, e.key);
                else
                    throw FormatError(source + ":" + std::to_string(e.line) + ": unknown layout key '" + e.key + "'");
            }
            m.layout = l;
        } else if (sec.rfind("submodel ", 0) == 0) {
            std::string name = trim(sec.substr(9));
            auto where = source + " [" + sec + "]";
            if (name == "heating")
                m.heating = read_submodel(entries, where);
            else if (name == "cooling")
                m.cooling = read_submodel(entries, where);
            else if (name == "build")
                m.build = read_submodel(entries, where);
            else
                throw FormatError(source + ": unknown submodel '" + name + "'");
        } else {
            throw FormatError(source + ": unknown section [" + sec + "]");
        }
    }
    return m;
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_model(model));
}

ModelFile load_model(const std::filesystem::path& path) { return parse_model(read_file(path), path.string()); }

std::string restamp_model(const std::string& text) {
    auto parts = split_header(text, "<restamp>");
    check_format_line(parts.first, "<restamp>");
    return header_for(parts.body) + parts.body;
}

std::string pretty_print(const SparseModel& model) {
    const auto& feats = model.library.features();
    std::string lhs = "d" + (feats.empty() ? std::string("T") : feats.front()) + "/dt = ";
    auto idx = model.gamma.indices();
    if (idx.empty()) return lhs + "0";
    std::string out = lhs;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) out += " ";
        out += term_to_string(model.library.term(idx[i]), feats, model.xi[idx[i]]);
    }
    return out;
}

std::string pretty_print(const ModelFile& model) {
    std::string out;
    if (model.heating) out += "heating: " + pretty_print(*model.heating) + "\n";
    if (model.cooling) out += "cooling: " + pretty_print(*model.cooling) + "\n";
    if (model.build) out += "build:   " + pretty_print(*model.build) + "\n";
    return out;
}

} // namespace govdisc
