// Command-line front end: corpus synthesis, detection/identification runs,
// and the closed-form vs ODE oracle comparison dump.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hifd/hifd.hpp"

namespace fs = std::filesystem;
using namespace hifd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoDetection = 2;
constexpr int kExitNoFeeder = 3;

struct ConfigCli {
    PipelineConfig cfg;
    std::string config_path;

    void attach(CLI::App* app) {
        app->add_option("--fs", cfg.fs, "sampling rate, Hz");
        app->add_option("--f0", cfg.f0, "power frequency, Hz");
        app->add_option("--fc", cfg.fc, "low-pass cutoff, Hz");
        app->add_option("--l", cfg.l, "slope interval length, samples (0 = N_T/8)");
        app->add_option("--d", cfg.d, "half-cycle guard, samples (0 = N_T/16)");
        app->add_option("--trigger-threshold", cfg.trigger_threshold,
                        "consecutive faulty cycles to trigger");
        app->add_option("--window-pre", cfg.window_pre, "identification cycles before trigger");
        app->add_option("--window-post", cfg.window_post, "identification cycles after trigger");
        app->add_option("--rho", cfg.rho, "interior-minima spread tolerance");
        app->add_option("--epsilon-m", cfg.epsilon_m, "M-shape prominence gate");
        app->add_flag_callback("--no-grubbs-rlrs", [this] { cfg.grubbs_rlrs = false; },
                               "disable the outlier-rejection stage");
        app->add_option("--seed", cfg.seed, "seed echoed into the report");
        app->add_option("--config", config_path,
                        "JSON config; its values take precedence over flags");
    }

    PipelineConfig resolve() const {
        PipelineConfig out = cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ingestion_error("cannot open config '" + config_path + "'");
            json j;
            in >> j;
            // defaults, then flags, then the config file on top
            json merged = to_json(out);
            merged.merge_patch(j);
            out = config_from_json(merged);
        }
        out.validate();
        return out;
    }
};

void echo_config(const PipelineConfig& cfg) {
    std::cout << "config: " << to_json(cfg).dump() << '\n';
}

int run_synth(const std::string& manifest_path, const std::string& out_dir,
              const std::string& export_manifest) {
    Manifest manifest =
        manifest_path.empty() ? default_manifest() : load_manifest(manifest_path);
    fs::create_directories(out_dir);

    const auto corpus = build_corpus(manifest);
    json labels = json::array();
    for (const auto& lr : corpus) {
        const auto csv_path = fs::path(out_dir) / (lr.scenario.id + ".csv");
        export_csv(lr.record, csv_path.string());
        labels.push_back(json{{"id", lr.scenario.id},
                              {"file", csv_path.filename().string()},
                              {"neutral", to_string(lr.scenario.neutral)},
                              {"faulty_feeder", lr.faulty_feeder_id},
                              {"fault_rms", lr.scenario.fault_rms()},
                              {"impulses", lr.scenario.has_impulses()},
                              {"scenario", to_json(lr.scenario)}});
    }
    {
        std::ofstream out(fs::path(out_dir) / "labels.json");
        out << labels.dump(2) << '\n';
    }
    if (!export_manifest.empty()) {
        std::ofstream out(export_manifest);
        out << to_json(manifest).dump(2) << '\n';
    }
    std::cout << "wrote " << corpus.size() << " records to " << out_dir << '\n';
    return kExitOk;
}

int run_detect(const std::string& in_path, const ConfigCli& cc, const std::string& neutral,
               const std::string& report_path, const std::string& plot_dir,
               bool identify_mode) {
    const PipelineConfig cfg = cc.resolve();
    echo_config(cfg);

    CsvOptions copt;
    copt.f0 = cfg.f0;
    copt.neutral = neutral_from_string(neutral);
    copt.expected_fs = cfg.fs;
    const auto record = ingest_csv(in_path, copt);

    const auto report = run_pipeline(record, cfg);
    std::cout << human_summary(report);
    if (!report_path.empty()) emit_report(report, report_path, ReportFormat::Structured);
    if (!plot_dir.empty()) emit_plot_data(report, record, plot_dir);

    if (!report.trigger_cycle) return kExitNoDetection;
    if (identify_mode && (!report.identification || !report.identification->chosen_feeder))
        return kExitNoFeeder;
    return kExitOk;
}

int run_oracle(const std::string& neutral_name, std::vector<double> c0_uf, int faulty,
               double v, double rn, double i_fm, double ratio, double tau, double phi,
               double delta, int cycles, const std::string& out_path) {
    const NeutralType neutral = neutral_from_string(neutral_name);
    if (neutral == NeutralType::Isolated)
        throw parameter_error("oracle: only resonant and low-resistor branches have an ODE");
    std::vector<double> c0;
    for (double c : c0_uf) c0.push_back(c * 1e-6);
    const NetworkParams params =
        neutral == NeutralType::Resonant
            ? NetworkParams::resonant(c0, faulty, v)
            : NetworkParams::low_resistor(c0, faulty, rn);

    DistortionSpec spec;
    spec.i_fm = i_fm;
    spec.i_fm_dist = ratio * i_fm;
    spec.tau = tau;
    spec.phi = phi;
    spec.offset_delta = delta;

    const auto oracle = ode_oracle(params, spec, neutral, 6400.0, cycles);
    const auto closed = closed_form_branch(params, spec, neutral, 6400.0, cycles);

    double worst = 0.0;
    for (std::size_t n = 0; n < oracle.values.size(); ++n)
        worst = std::max(worst, std::abs(oracle.values[n] - closed.values[n]));
    const double rel = spec.i_fm_dist > 0.0 ? worst / spec.i_fm_dist : 0.0;

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << "n\ttime\tclosed_form\tode_oracle\tdifference\n";
        for (std::size_t n = 0; n < oracle.values.size(); ++n)
            out << n << '\t' << detail::format_double(n / 6400.0) << '\t'
                << detail::format_double(closed.values[n]) << '\t'
                << detail::format_double(oracle.values[n]) << '\t'
                << detail::format_double(oracle.values[n] - closed.values[n]) << '\n';
        std::cout << "dump written to " << out_path << '\n';
    }
    std::printf("max |closed - oracle| = %.6g A (%.4f%% of the distortion peak)\n", worst,
                100.0 * rel);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-impedance fault detection and feeder identification"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::string manifest_path, out_dir = "corpus", export_manifest;
    synth->add_option("--manifest", manifest_path, "scenario manifest (JSON)");
    synth->add_option("--out", out_dir, "output directory");
    synth->add_option("--export-manifest", export_manifest,
                      "write the effective manifest to this path");

    // detect / identify share their options
    std::string in_path, neutral = "resonant", report_path, plot_dir;
    ConfigCli detect_cfg, identify_cfg;
    auto* detect = app.add_subcommand("detect", "run HIF detection on a record");
    auto* identify = app.add_subcommand("identify", "full pipeline: detect, then identify");
    for (auto* sub : {detect, identify}) {
        sub->add_option("--in", in_path, "input CSV record")->required();
        sub->add_option("--neutral", neutral, "isolated | resonant | low-resistor");
        sub->add_option("--report", report_path, "write the structured JSON report here");
        sub->add_option("--plot-dir", plot_dir, "write per-channel plot columns here");
    }
    detect_cfg.attach(detect);
    identify_cfg.attach(identify);

    // oracle
    auto* oracle = app.add_subcommand("oracle", "closed form vs ODE integration dump");
    std::string o_neutral = "resonant", o_out;
    std::vector<double> o_c0{1.1, 0.4, 0.9};
    int o_fault = 1, o_cycles = 8;
    double o_v = -0.08, o_rn = 10.0, o_ifm = 10.0, o_ratio = 0.5, o_tau = -0.5, o_phi = 0.7,
           o_delta = 0.0;
    oracle->add_option("--neutral", o_neutral, "resonant | low-resistor");
    oracle->add_option("--c0", o_c0, "feeder capacitances, uF");
    oracle->add_option("--faulty", o_fault, "faulty feeder index");
    oracle->add_option("--v", o_v, "detuning index (resonant)");
    oracle->add_option("--rn", o_rn, "neutral resistor, ohm (low-resistor)");
    oracle->add_option("--i-fm", o_ifm, "fault current peak, A");
    oracle->add_option("--ratio", o_ratio, "distortion peak / fault peak");
    oracle->add_option("--tau", o_tau, "distortion decay constant");
    oracle->add_option("--phi", o_phi, "capacitive-current phase, rad");
    oracle->add_option("--delta", o_delta, "distortion offset, rad");
    oracle->add_option("--cycles", o_cycles, "cycles to integrate");
    oracle->add_option("--out", o_out, "TSV dump path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(manifest_path, out_dir, export_manifest);
        if (detect->parsed())
            return run_detect(in_path, detect_cfg, neutral, report_path, plot_dir, false);
        if (identify->parsed())
            return run_detect(in_path, identify_cfg, neutral, report_path, plot_dir, true);
        if (oracle->parsed())
            return run_oracle(o_neutral, o_c0, o_fault, o_v, o_rn, o_ifm, o_ratio, o_tau,
                              o_phi, o_delta, o_cycles, o_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
