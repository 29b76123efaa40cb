#include "ifmem/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ifmem/errors.hpp"

namespace ifmem {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

double parse_number(std::string_view field, const std::string& where) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (!field.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw FormatError(where + ": cannot parse number '" + std::string(field) + "'");
    }
    return value;
}

// Leading decimal number of an area label ("32um" -> 32), if any.
std::optional<double> leading_number(const std::string& label) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
    if (ec != std::errc() || ptr == label.data()) return std::nullopt;
    return value;
}

void require_keys(const json& j, const std::vector<std::string>& expected, const char* what) {
    if (!j.is_object()) throw FormatError(std::string(what) + " must be a JSON object");
    std::vector<std::string> missing;
    std::vector<std::string> unknown;
    for (const auto& key : expected) {
        if (!j.contains(key)) missing.push_back(key);
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(expected.begin(), expected.end(), key) == expected.end()) {
            unknown.push_back(key);
        }
    }
    std::string msg;
    if (!missing.empty()) msg += "missing keys: " + join(missing);
    if (!unknown.empty()) msg += std::string(msg.empty() ? "" : "; ") + "unknown keys: " + join(unknown);
    if (!msg.empty()) throw FormatError(std::string(what) + ": " + msg);
}

double number_at(const json& j, const std::string& key, const std::string& context) {
    const json& v = j.at(key);
    if (!v.is_number()) throw FormatError(context + key + " must be a number");
    return v.get<double>();
}

Polarity polarity_from(const json& j, const std::string& context) {
    const double eta = number_at(j, "eta", context);
    if (eta == 1.0) return Polarity::positive;
    if (eta == -1.0) return Polarity::negative;
    throw DomainError(context + "eta must be +1 or -1");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

ModelParameters GaussianParamSet::means() const {
    ModelParameters p;
    for (ParamId id : kAllParams) p[id] = (*this)[id].mean;
    p.eta = eta;
    p.x0 = x0;
    return p;
}

void validate(const GaussianParamSet& g) {
    for (ParamId id : kAllParams) {
        const double sd = g[id].sd;
        if (!std::isfinite(sd) || sd < 0.0) {
            throw ValidationError("sd of " + std::string(param_name(id)) + " must be >= 0");
        }
    }
    validate(g.means());
}

// --- traces -----------------------------------------------------------------

IVTrace parse_trace_csv(std::string_view text, const std::string& source) {
    IVTrace trace;
    std::size_t line_no = 0;
    std::size_t row = 0;
    bool header_seen = false;
    bool with_state = false;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);

        const auto fields = split_commas(line);
        if (!header_seen) {
            const bool base = fields.size() >= 3 && fields[0] == "time" &&
                              fields[1] == "voltage" && fields[2] == "current";
            with_state = base && fields.size() == 4 && fields[3] == "state";
            if (!base || (fields.size() != 3 && !with_state)) {
                throw FormatError(where + ": expected header 'time,voltage,current[,state]', got '" +
                                  std::string(line) + "'");
            }
            header_seen = true;
            continue;
        }

        const std::size_t expected = with_state ? 4 : 3;
        if (fields.size() != expected) {
            throw FormatError(where + ": expected " + std::to_string(expected) + " fields, got " +
                              std::to_string(fields.size()));
        }
        ++row;
        const double t = parse_number(fields[0], where);
        const double v = parse_number(fields[1], where);
        const double i = parse_number(fields[2], where);
        if (!std::isfinite(t) || !std::isfinite(v) || !std::isfinite(i)) {
            throw ValidationError(where + ": non-finite value at row " + std::to_string(row));
        }
        if (!trace.time.empty() && !(t > trace.time.back())) {
            throw ValidationError(source + ": non-monotonic at row " + std::to_string(row) +
                                  " (line " + std::to_string(line_no) + ")");
        }
        trace.time.push_back(t);
        trace.voltage.push_back(v);
        trace.current.push_back(i);
        if (with_state) {
            const double x = parse_number(fields[3], where);
            if (!std::isfinite(x)) {
                throw ValidationError(where + ": non-finite value at row " + std::to_string(row));
            }
            trace.state.push_back(x);
        }
    }
    if (!header_seen) throw FormatError(source + ": empty file, expected a CSV header");
    if (trace.time.empty()) throw ValidationError(source + ": no data rows");
    if (trace.size() > 1) {
        trace.dt = (trace.time.back() - trace.time.front()) / static_cast<double>(trace.size() - 1);
    }
    return trace;
}

IVTrace load_trace_csv(const fs::path& path) {
    return parse_trace_csv(read_text_file(path), path.string());
}

std::string format_trace_csv(const IVTrace& trace) {
    std::string out = trace.has_state() ? "time,voltage,current,state\n" : "time,voltage,current\n";
    out.reserve(trace.size() * 64);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += format_double(trace.time[i]);
        out += ',';
        out += format_double(trace.voltage[i]);
        out += ',';
        out += format_double(trace.current[i]);
        if (trace.has_state()) {
            out += ',';
            out += format_double(trace.state[i]);
        }
        out += '\n';
    }
    return out;
}

void save_trace_csv(const fs::path& path, const IVTrace& trace) {
    write_file_atomic(path, format_trace_csv(trace));
}

MeasurementSet load_measurements(const fs::path& path, std::string area_label) {
    IVTrace trace = load_trace_csv(path);
    trace.state.clear();
    if (area_label.empty()) area_label = path.parent_path().filename().string();
    return MeasurementSet{std::move(area_label), {std::move(trace)}};
}

std::vector<MeasurementSet> load_measurement_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
    std::vector<fs::path> areas;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) areas.push_back(entry.path());
    }
    std::sort(areas.begin(), areas.end(), [](const fs::path& a, const fs::path& b) {
        const auto na = leading_number(a.filename().string());
        const auto nb = leading_number(b.filename().string());
        if (na && nb && *na != *nb) return *na < *nb;
        if (na.has_value() != nb.has_value()) return na.has_value();
        return a.filename() < b.filename();
    });

    std::vector<MeasurementSet> sets;
    for (const auto& area : areas) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(area)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                files.push_back(entry.path());
            }
        }
        if (files.empty()) continue;
        std::sort(files.begin(), files.end());
        MeasurementSet set{area.filename().string(), {}};
        for (const auto& f : files) set.traces.push_back(load_measurements(f, set.device_area_label).traces.front());
        sets.push_back(std::move(set));
    }
    if (sets.empty()) throw ValidationError("no measurement CSV files under " + dir.string());
    return sets;
}

// --- parameters ---------------------------------------------------------------

json params_to_json(const ModelParameters& p) {
    json j = json::object();
    for (ParamId id : kAllParams) j[std::string(param_name(id))] = p[id];
    j["eta"] = static_cast<int>(p.eta);
    j["x0"] = p.x0;
    return j;
}

ModelParameters params_from_json(const json& j) {
    std::vector<std::string> keys;
    for (ParamId id : kAllParams) keys.emplace_back(param_name(id));
    keys.emplace_back("eta");
    keys.emplace_back("x0");
    require_keys(j, keys, "parameters");

    ModelParameters p;
    for (ParamId id : kAllParams) p[id] = number_at(j, std::string(param_name(id)), "");
    p.eta = polarity_from(j, "");
    p.x0 = number_at(j, "x0", "");
    validate(p);
    return p;
}

void save_params(const fs::path& path, const ModelParameters& p) {
    write_file_atomic(path, dump(params_to_json(p)));
}

ModelParameters load_params(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return params_from_json(j);
}

json gaussian_to_json(const GaussianParamSet& g) {
    json params = json::object();
    for (ParamId id : kAllParams) {
        params[std::string(param_name(id))] = {{"mean", g[id].mean}, {"sd", g[id].sd}};
    }
    return json{{"area_label", g.area_label},
                {"eta", static_cast<int>(g.eta)},
                {"x0", g.x0},
                {"parameters", params}};
}

GaussianParamSet gaussian_from_json(const json& j) {
    require_keys(j, {"area_label", "eta", "x0", "parameters"}, "gaussian parameter set");
    if (!j.at("area_label").is_string()) throw FormatError("area_label must be a string");

    GaussianParamSet g;
    g.area_label = j.at("area_label").get<std::string>();
    g.eta = polarity_from(j, "");
    g.x0 = number_at(j, "x0", "");

    const json& params = j.at("parameters");
    std::vector<std::string> names;
    for (ParamId id : kAllParams) names.emplace_back(param_name(id));
    require_keys(params, names, "parameters");
    for (ParamId id : kAllParams) {
        const std::string name(param_name(id));
        const json& entry = params.at(name);
        if (!entry.is_object()) throw FormatError("parameters." + name + " must be an object");
        std::vector<std::string> missing;
        for (const char* k : {"mean", "sd"}) {
            if (!entry.contains(k)) missing.push_back(name + "." + k);
        }
        if (!missing.empty()) throw FormatError("missing keys: " + join(missing));
        require_keys(entry, {"mean", "sd"}, ("parameters." + name).c_str());
        g[id].mean = number_at(entry, "mean", name + ".");
        g[id].sd = number_at(entry, "sd", name + ".");
    }
    validate(g);
    return g;
}

void save_gaussian(const fs::path& path, const GaussianParamSet& g) {
    write_file_atomic(path, dump(gaussian_to_json(g)));
}

GaussianParamSet load_gaussian(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return gaussian_from_json(j);
}

// --- files --------------------------------------------------------------------

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ValidationError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace ifmem
