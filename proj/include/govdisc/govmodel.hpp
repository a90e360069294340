#pragma once

#include "govdisc/sparsereg.hpp"
#include "govdisc/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace govdisc {

/// Heating and cooling submodels of the tool temperature. The heating model
/// runs over {T, ω, T_f} and optionally f_m, F_m; cooling over {T}.
struct PiecewiseToolModel {
    SparseModel heating;
    SparseModel cooling;

    const SparseModel& stage(Stage s) const { return s == Stage::Heat ? heating : cooling; }
};

/// Build temperature at a fixed location, driven by tool temperature and the
/// tool-to-location distance. The rotating deposit is treated as a point heat
/// source at the tool, so its temperature and position are the tool's.
struct BuildModel {
    SparseModel model;
    SensorLayout layout = SensorLayout::equally_spaced();
};

struct InitialConditions {
    double T_tool0 = 24.0;
    std::vector<double> T_build0;
    void validate() const;
};

/// Everything a model file can hold. Submodels are optional so one file may
/// carry a tool model, a build model, or both.
struct ModelFile {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::optional<SparseModel> heating;
    std::optional<SparseModel> cooling;
    std::optional<SparseModel> build;
    std::optional<SensorLayout> layout;

    std::optional<std::string> meta(const std::string& key) const;
    void set_meta(const std::string& key, const std::string& value);

    bool has_tool() const { return heating && cooling; }
    PiecewiseToolModel tool() const;
    BuildModel build_model() const;

    friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

ModelFile make_file(const PiecewiseToolModel& tool);
ModelFile make_file(const BuildModel& build);

/// Stage submodel evaluated at state T with named inputs (display or ASCII
/// names). Throws DataError when an input the submodel needs is missing.
double rhs_tool(const PiecewiseToolModel& model, Stage stage, double T, const std::map<std::string, double>& inputs);
double rhs_build(const BuildModel& model, double T_build, double T_tool, double d);

/// Evaluates a submodel from values held in caller-defined slots; the
/// mapping from library features to slots is resolved once.
class BoundModel {
public:
    BoundModel() = default;
    /// `slots` names the caller's value layout; every library feature must
    /// appear in it.
    BoundModel(const SparseModel& model, const std::vector<std::string>& slots);
    double operator()(std::span<const double> slot_values) const;

private:
    struct Term {
        double coefficient;
        std::vector<int> exponents;
    };
    std::vector<Term> terms_; // selected terms in library order
    std::vector<int> feature_slot_;
};

inline constexpr const char* kModelFormatId = "govdisc-model";
inline constexpr int kModelFormatVersion = 1;

std::uint32_t crc32_of(std::string_view bytes);
std::string crc32_hex(std::string_view bytes);

std::string serialize_model(const ModelFile& model);
ModelFile parse_model(const std::string& text, const std::string& source = "<model>");
void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

/// Rewrites the checksum line of a model document to match its body. Used to
/// stamp hand-edited files.
std::string restamp_model(const std::string& text);

/// "dT/dt = +3.2820e-1 −1.3500e-2·T −6.0601e-6·T^2". The left-hand side is
/// d<state>/dt where the state is the library's first feature.
std::string pretty_print(const SparseModel& model);
std::string pretty_print(const ModelFile& model);

} // namespace govdisc
