#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ifmem/params.hpp"
#include "ifmem/simulator.hpp"

namespace ifmem {

/// All measured sweeps for one device size.
struct MeasurementSet {
    std::string device_area_label;
    std::vector<IVTrace> traces;
};

struct NormalParam {
    double mean = 0.0;
    double sd = 0.0;

    friend bool operator==(const NormalParam&, const NormalParam&) = default;
};

/// Independent per-parameter normal distributions for one device area.
/// eta and x0 are carried alongside as fixed scalars.
struct GaussianParamSet {
    std::string area_label;
    std::array<NormalParam, kParamCount> params{};
    Polarity eta = Polarity::positive;
    double x0 = 0.0;

    NormalParam& operator[](ParamId id) { return params[static_cast<std::size_t>(id)]; }
    const NormalParam& operator[](ParamId id) const {
        return params[static_cast<std::size_t>(id)];
    }

    ModelParameters means() const;

    friend bool operator==(const GaussianParamSet&, const GaussianParamSet&) = default;
};

/// Throws ValidationError / DomainError on a negative sd or invalid means.
void validate(const GaussianParamSet& g);

// --- traces -----------------------------------------------------------------

/// CSV with header `time,voltage,current` and an optional `state` column.
IVTrace parse_trace_csv(std::string_view text, const std::string& source = "<memory>");
IVTrace load_trace_csv(const std::filesystem::path& path);
std::string format_trace_csv(const IVTrace& trace);
void save_trace_csv(const std::filesystem::path& path, const IVTrace& trace);

/// One measurement file -> one trace (state column ignored). The area label
/// defaults to the name of the containing directory.
MeasurementSet load_measurements(const std::filesystem::path& path, std::string area_label = "");

/// Layout `<dir>/<area-label>/*.csv`. Areas are ordered by the leading
/// number in their label, then lexicographically; files by name.
std::vector<MeasurementSet> load_measurement_dir(const std::filesystem::path& dir);

// --- parameters ---------------------------------------------------------------

nlohmann::json params_to_json(const ModelParameters& p);
ModelParameters params_from_json(const nlohmann::json& j);
void save_params(const std::filesystem::path& path, const ModelParameters& p);
ModelParameters load_params(const std::filesystem::path& path);

nlohmann::json gaussian_to_json(const GaussianParamSet& g);
GaussianParamSet gaussian_from_json(const nlohmann::json& j);
void save_gaussian(const std::filesystem::path& path, const GaussianParamSet& g);
GaussianParamSet load_gaussian(const std::filesystem::path& path);

// --- files --------------------------------------------------------------------

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ifmem
