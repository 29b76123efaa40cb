// ifmem: simulate, fit, sample, rank sensitivities and check area trends.
//
// Every command writes its outputs plus manifest.json into --out. The
// manifest holds the fully resolved configuration, so `ifmem rerun
// --manifest <file>` reproduces the outputs byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "ifmem/data_io.hpp"
#include "ifmem/errors.hpp"
#include "ifmem/fitting.hpp"
#include "ifmem/simulator.hpp"
#include "ifmem/variation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ifmem;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kInputError = 2, kNumericalError = 3, kNotConverged = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything a command needs; serialised verbatim into the manifest.
struct Options {
    std::string command;
    std::vector<std::string> params;
    std::vector<std::string> gaussian;
    std::string data_dir;
    double vmax = 1.0;
    double vmin = -2.0;
    double duration = kDefaultSweepDuration;
    std::optional<double> dt;  // default duration / 1e4
    std::optional<double> x0;  // default: from the input file
    std::optional<int> eta;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    int max_evaluations = 80000;
    bool svg = false;
    std::string out;
    unsigned threads = 0;  // not part of the manifest: results do not depend on it
};

json options_to_json(const Options& o) {
    json j{{"params", o.params},   {"gaussian", o.gaussian}, {"data_dir", o.data_dir},
           {"vmax", o.vmax},       {"vmin", o.vmin},         {"duration", o.duration},
           {"n", o.n},             {"seed", o.seed},         {"max_evaluations", o.max_evaluations},
           {"svg", o.svg}};
    j["dt"] = o.dt ? json(*o.dt) : json(nullptr);
    j["x0"] = o.x0 ? json(*o.x0) : json(nullptr);
    j["eta"] = o.eta ? json(*o.eta) : json(nullptr);
    return j;
}

Options options_from_json(const std::string& command, const json& j) {
    Options o;
    o.command = command;
    o.params = j.at("params").get<std::vector<std::string>>();
    o.gaussian = j.at("gaussian").get<std::vector<std::string>>();
    o.data_dir = j.at("data_dir").get<std::string>();
    o.vmax = j.at("vmax").get<double>();
    o.vmin = j.at("vmin").get<double>();
    o.duration = j.at("duration").get<double>();
    o.n = j.at("n").get<std::size_t>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.max_evaluations = j.at("max_evaluations").get<int>();
    o.svg = j.at("svg").get<bool>();
    if (!j.at("dt").is_null()) o.dt = j.at("dt").get<double>();
    if (!j.at("x0").is_null()) o.x0 = j.at("x0").get<double>();
    if (!j.at("eta").is_null()) o.eta = j.at("eta").get<int>();
    return o;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < length; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

// Collects the files a command reads and writes for the manifest.
class Run {
public:
    explicit Run(Options opt) : opt_(std::move(opt)), config_(options_to_json(opt_)) {
        if (opt_.out.empty()) throw UsageError("--out is required");
        fs::create_directories(opt_.out);
    }

    // Records a default the command resolved, so the manifest is explicit.
    void resolved(const std::string& key, json value) { config_[key] = std::move(value); }

    void input(const fs::path& path) {
        if (!fs::is_regular_file(path)) throw FormatError(path.string() + ": no such file");
        inputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(read_text_file(path))}});
    }

    void output(const std::string& name, std::string_view content) {
        write_file_atomic(fs::path(opt_.out) / name, content);
        outputs_.push_back({{"path", name}, {"sha256", sha256_hex(content)}});
    }

    void finish() {
        json manifest{{"tool", "ifmem"},
                      {"version", kVersion},
                      {"command", opt_.command},
                      {"config", config_},
                      {"seed", opt_.seed},
                      {"inputs", inputs_},
                      {"outputs", outputs_}};
        write_file_atomic(fs::path(opt_.out) / "manifest.json", manifest.dump(2) + "\n");
    }

private:
    Options opt_;
    json config_;
    json inputs_ = json::array();
    json outputs_ = json::array();
};

SweepSpec sweep_of(const Options& o) { return standard_sweep(o.vmax, o.vmin, o.duration); }

SimulationConfig sim_config(const Options& o) {
    const double dt = o.dt.value_or(o.duration / 1e4);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    return SimulationConfig{.dt = dt};
}

void apply_overrides(const Options& o, ModelParameters& p) {
    if (o.x0) p.x0 = *o.x0;
    if (o.eta) {
        if (*o.eta != 1 && *o.eta != -1) throw DomainError("eta must be +1 or -1");
        p.eta = *o.eta > 0 ? Polarity::positive : Polarity::negative;
    }
    validate(p);
}

// Minimal I-V plot: one polyline per trace, shared axes.
std::string iv_svg(const std::vector<const IVTrace*>& traces) {
    double vlo = 0, vhi = 0, ilo = 0, ihi = 0;
    for (const auto* t : traces) {
        for (std::size_t i = 0; i < t->size(); ++i) {
            vlo = std::min(vlo, t->voltage[i]);
            vhi = std::max(vhi, t->voltage[i]);
            ilo = std::min(ilo, t->current[i]);
            ihi = std::max(ihi, t->current[i]);
        }
    }
    if (vhi == vlo) vhi = vlo + 1;
    if (ihi == ilo) ihi = ilo + 1;
    const double w = 640, h = 480, m = 50;
    auto px = [&](double v) { return m + (v - vlo) / (vhi - vlo) * (w - 2 * m); };
    auto py = [&](double i) { return h - m - (i - ilo) / (ihi - ilo) * (h - 2 * m); };
    char buf[128];
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\">\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"gray\"/>\n", m, py(0),
                  w - m, py(0));
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"gray\"/>\n", px(0), m,
                  px(0), h - m);
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\">V [%g, %g] V, I [%.3g, %.3g] A</text>\n",
                  m, m / 2, vlo, vhi, ilo, ihi);
    s += buf;
    for (const auto* t : traces) {
        s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.5\" points=\"";
        for (std::size_t i = 0; i < t->size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(t->voltage[i]), py(t->current[i]));
            s += buf;
        }
        s += "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string numbered(const char* stem, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, i, ext);
    return buf;
}

// --- commands -------------------------------------------------------------------

int cmd_simulate(const Options& opt) {
    if (opt.params.size() != 1) throw UsageError("simulate needs exactly one --params file");
    const SimulationConfig cfg = sim_config(opt);
    Run run(opt);
    run.input(opt.params[0]);
    ModelParameters p = load_params(opt.params[0]);
    apply_overrides(opt, p);
    run.resolved("dt", cfg.dt);
    run.resolved("x0", p.x0);
    run.resolved("eta", static_cast<int>(sign_of(p.eta)));
    const IVTrace t = simulate(p, sweep_of(opt), cfg);

    run.output("trace.csv", format_trace_csv(t));
    if (opt.svg) run.output("trace.svg", iv_svg({&t}));
    run.finish();

    const auto hi = std::max_element(t.voltage.begin(), t.voltage.end()) - t.voltage.begin();
    const auto lo = std::min_element(t.voltage.begin(), t.voltage.end()) - t.voltage.begin();
    std::printf("I(%g V) = %.6g A\nI(%g V) = %.6g A\nloop area = %.6g A V\n", t.voltage[hi],
                t.current[hi], t.voltage[lo], t.current[lo], loop_area(t));
    return kOk;
}

int cmd_fit(const Options& opt) {
    if (opt.data_dir.empty()) throw UsageError("fit needs --data-dir");
    if (opt.gaussian.empty()) throw UsageError("fit needs --gaussian reference sets for theta0");
    Run run(opt);
    std::vector<GaussianParamSet> refs;
    for (const auto& g : opt.gaussian) {
        run.input(g);
        refs.push_back(load_gaussian(g));
    }
    if (!fs::is_directory(opt.data_dir)) throw FormatError(opt.data_dir + ": not a directory");
    const std::vector<MeasurementSet> data = load_measurement_dir(opt.data_dir);
    if (data.empty()) throw ValidationError(opt.data_dir + ": no area directories with traces");
    for (const auto& entry : fs::recursive_directory_iterator(opt.data_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") run.input(entry.path());
    }

    FitConfig cfg = default_fit_config(refs);
    if (opt.x0) cfg.theta0.x0 = *opt.x0;
    if (opt.eta) apply_overrides(opt, cfg.theta0);
    cfg.max_evaluations = opt.max_evaluations;
    cfg.seed = opt.seed;
    run.resolved("x0", cfg.theta0.x0);
    run.resolved("eta", static_cast<int>(sign_of(cfg.theta0.eta)));
    const TwoStepFitResult result = two_step_fit(data, cfg, opt.threads);

    for (const auto& g : result.areas) run.output(g.area_label + ".json", gaussian_to_json(g).dump(2) + "\n");
    const std::string report = format_fit_report(result);
    run.output("report.txt", report);

    std::string fits = "area,trace,step";
    for (ParamId id : kAllParams) fits += "," + std::string(param_name(id));
    fits += ",mae,mpe,evaluations,converged\n";
    for (std::size_t a = 0; a < data.size(); ++a) {
        for (int step = 1; step <= 2; ++step) {
            const auto& rows = step == 1 ? result.step1[a] : result.step2[a];
            for (std::size_t k = 0; k < rows.size(); ++k) {
                fits += data[a].device_area_label + "," + std::to_string(k) + "," + std::to_string(step);
                for (ParamId id : kAllParams) fits += "," + format_double(rows[k].theta_hat[id]);
                fits += "," + format_double(rows[k].mae) + "," + format_double(rows[k].mpe) + "," +
                        std::to_string(rows[k].evaluations) + "," + (rows[k].converged ? "1" : "0") + "\n";
            }
        }
    }
    run.output("fits.csv", fits);
    run.finish();
    std::cout << report;
    if (!result.all_converged()) {
        std::cerr << "warning: some fits did not converge within the evaluation budget\n";
        return kNotConverged;
    }
    return kOk;
}

int cmd_sample(const Options& opt) {
    if (opt.gaussian.size() != 1) throw UsageError("sample needs exactly one --gaussian file");
    if (opt.n == 0) throw DomainError("--n must be at least 1");
    const SimulationConfig cfg = sim_config(opt);
    Run run(opt);
    run.input(opt.gaussian[0]);
    GaussianParamSet dist = load_gaussian(opt.gaussian[0]);
    if (opt.x0) dist.x0 = *opt.x0;
    if (opt.eta) {
        ModelParameters check = dist.means();
        apply_overrides(opt, check);
        dist.eta = check.eta;
    }
    run.resolved("dt", cfg.dt);
    run.resolved("x0", dist.x0);
    run.resolved("eta", static_cast<int>(sign_of(dist.eta)));
    const std::vector<IVTrace> traces = ensemble(dist, opt.n, sweep_of(opt), cfg, opt.seed, opt.threads);

    std::vector<const IVTrace*> all;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const ModelParameters p = sample_parameters(dist, member_seed(opt.seed, i));
        run.output(numbered("params", i, ".json"), params_to_json(p).dump(2) + "\n");
        run.output(numbered("trace", i, ".csv"), format_trace_csv(traces[i]));
        all.push_back(&traces[i]);
    }
    if (opt.svg) run.output("ensemble.svg", iv_svg(all));
    run.finish();
    std::printf("%zu traces written to %s\n", traces.size(), opt.out.c_str());
    return kOk;
}

int cmd_sensitivity(const Options& opt) {
    if (opt.params.empty() && opt.gaussian.empty()) {
        throw UsageError("sensitivity needs --params or --gaussian files");
    }
    const SimulationConfig cfg = sim_config(opt);
    Run run(opt);
    run.resolved("dt", cfg.dt);
    std::vector<std::string> labels;
    std::vector<ModelParameters> models;
    for (const auto& f : opt.params) {
        run.input(f);
        models.push_back(load_params(f));
        labels.push_back(fs::path(f).stem().string());
    }
    for (const auto& f : opt.gaussian) {
        run.input(f);
        const GaussianParamSet g = load_gaussian(f);
        models.push_back(g.means());
        labels.push_back(g.area_label.empty() ? fs::path(f).stem().string() : g.area_label);
    }
    const SweepSpec spec = sweep_of(opt);
    std::vector<SensitivityReport> reports;
    for (auto& p : models) {
        apply_overrides(opt, p);
        reports.push_back(sensitivity_search(p, spec, cfg, opt.threads));
    }
    const SensitivityTable table = rank_sensitivity(labels, reports);
    const std::string csv = sensitivity_csv(table);
    run.output("sensitivity.csv", csv);
    json j = sensitivity_json(table);
    json warnings = json::array();
    for (std::size_t a = 0; a < reports.size(); ++a) {
        for (const auto& w : reports[a].warnings) warnings.push_back(labels[a] + ": " + w);
    }
    j["warnings"] = warnings;
    run.output("sensitivity.json", j.dump(2) + "\n");
    run.finish();
    std::cout << csv;
    for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << "\n";
    return kOk;
}

int cmd_trends(const Options& opt) {
    if (opt.gaussian.size() < 2) throw UsageError("trends needs at least two --gaussian files");
    Run run(opt);
    std::vector<GaussianParamSet> sets;
    for (const auto& f : opt.gaussian) {
        run.input(f);
        sets.push_back(load_gaussian(f));
        if (sets.back().area_label.empty()) sets.back().area_label = fs::path(f).stem().string();
    }
    const std::vector<TrendEntry> trends = trend_check(sets);

    std::string table = "parameter,trend\n";
    for (const auto& t : trends) table += std::string(param_name(t.id)) + "," + std::string(trend_name(t.trend)) + "\n";
    run.output("trends.csv", table);

    // tidy, one row per (parameter, area): ready for a parameter-vs-area plot
    std::string tidy = "parameter,area,area_index,mean,sd\n";
    for (ParamId id : kAllParams) {
        for (std::size_t a = 0; a < sets.size(); ++a) {
            tidy += std::string(param_name(id)) + "," + sets[a].area_label + "," + std::to_string(a) + "," +
                    format_double(sets[a][id].mean) + "," + format_double(sets[a][id].sd) + "\n";
        }
    }
    run.output("parameters_by_area.csv", tidy);
    run.finish();
    std::cout << table;
    return kOk;
}

int dispatch(const Options& opt) {
    if (opt.command == "simulate") return cmd_simulate(opt);
    if (opt.command == "fit") return cmd_fit(opt);
    if (opt.command == "sample") return cmd_sample(opt);
    if (opt.command == "sensitivity") return cmd_sensitivity(opt);
    if (opt.command == "trends") return cmd_trends(opt);
    throw UsageError("unknown command '" + opt.command + "'");
}

int cmd_rerun(const std::string& manifest_path, const std::string& out, unsigned threads) {
    const json m = json::parse(read_text_file(manifest_path));
    Options opt = options_from_json(m.at("command").get<std::string>(), m.at("config"));
    opt.out = out.empty() ? fs::path(manifest_path).parent_path().string() : out;
    opt.threads = threads;
    for (const auto& in : m.at("inputs")) {
        const std::string path = in.at("path").get<std::string>();
        if (!fs::is_regular_file(path) || sha256_hex(read_text_file(path)) != in.at("sha256")) {
            throw FormatError(path + ": input changed since the manifest was written");
        }
    }
    return dispatch(opt);
}

void add_sweep_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--vmax", o.vmax, "Positive sweep amplitude (V)")->capture_default_str();
    cmd->add_option("--vmin", o.vmin, "Negative sweep amplitude (V)")->capture_default_str();
    cmd->add_option("--duration", o.duration, "Sweep duration (s)")->capture_default_str();
    cmd->add_option("--dt", o.dt, "Integration step (s); default duration/1e4");
    cmd->add_option("--x0", o.x0, "Initial state; default from the input file");
    cmd->add_option("--eta", o.eta, "Switching polarity, +1 or -1; default from the input file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interface-memristor model toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Options o;
    std::string manifest;
    auto* sim = app.add_subcommand("simulate", "Simulate one parameter set over the standard sweep");
    sim->add_option("--params", o.params, "Parameter JSON")->required();
    add_sweep_flags(sim, o);
    sim->add_flag("--svg", o.svg, "Also write an I-V plot");

    auto* fit = app.add_subcommand("fit", "Two-step regression over <data-dir>/<area>/*.csv");
    fit->add_option("--data-dir", o.data_dir, "Measurement directory")->required();
    fit->add_option("--gaussian", o.gaussian, "Reference parameter sets giving theta0")->required();
    fit->add_option("--max-evaluations", o.max_evaluations, "Budget per fit")->capture_default_str();
    fit->add_option("--x0", o.x0, "Initial state; default from the references");
    fit->add_option("--eta", o.eta, "Switching polarity; default from the references");

    auto* smp = app.add_subcommand("sample", "Simulate an ensemble of sampled devices");
    smp->add_option("--gaussian", o.gaussian, "Parameter distribution JSON")->required();
    smp->add_option("--n", o.n, "Ensemble size")->required();
    add_sweep_flags(smp, o);
    smp->add_flag("--svg", o.svg, "Also write an overlay I-V plot");

    auto* sens = app.add_subcommand("sensitivity", "Change per parameter giving 10% MPE");
    sens->add_option("--params", o.params, "Parameter JSON (repeatable)");
    sens->add_option("--gaussian", o.gaussian, "Distribution JSON, means are used (repeatable)");
    add_sweep_flags(sens, o);

    auto* trends = app.add_subcommand("trends", "Classify parameter trends across areas");
    trends->add_option("--gaussian", o.gaussian, "Distribution JSON, small to large area")->required();

    auto* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest");
    rerun->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();

    for (auto* cmd : {sim, fit, smp, sens, trends, rerun}) {
        cmd->add_option("--out", o.out, "Output directory")->required(cmd != rerun);
        cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
        cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (rerun->parsed()) return cmd_rerun(manifest, o.out, o.threads);
        o.command = app.get_subcommands().front()->get_name();
        // manifests record absolute input paths so a re-run works from any directory
        for (auto* list : {&o.params, &o.gaussian}) {
            for (auto& path : *list) path = fs::absolute(path).lexically_normal().string();
        }
        if (!o.data_dir.empty()) o.data_dir = fs::absolute(o.data_dir).lexically_normal().string();
        return dispatch(o);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
}
