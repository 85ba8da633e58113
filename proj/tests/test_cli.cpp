// End-to-end checks of the command-line surface: verbs, files, exit codes.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>

#include "hifd/hifd.hpp"

#ifndef HIFD_CLI_PATH
#error "HIFD_CLI_PATH must point at the built binary"
#endif

using namespace hifd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("hifd_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(HIFD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli: synth, identify, detect and oracle verbs with exit codes") {
    TempDir tmp;

    // synth writes the corpus plus labels
    REQUIRE(run("synth --out " + tmp.file("corpus") + " --export-manifest " +
                tmp.file("manifest.json")) == 0);
    REQUIRE(fs::exists(tmp.path / "corpus" / "labels.json"));
    REQUIRE(fs::exists(tmp.path / "corpus" / "R01.csv"));
    REQUIRE(fs::exists(tmp.path / "manifest.json"));

    // identify on a faulty record: exit 0, report written
    REQUIRE(run("identify --in " + tmp.file("corpus/R01.csv") +
                " --neutral resonant --report " + tmp.file("r01.json")) == 0);
    const auto rep = parse_report(tmp.file("r01.json"));
    REQUIRE(rep.identification.has_value());
    REQUIRE(rep.identification->chosen_feeder == "F2");

    // a healthy record: no detection, exit 2
    {
        SynchronizedRecord rec;
        rec.neutral = NeutralType::Resonant;
        auto mk = [&](double amp, double phase) {
            SampleSeries s;
            s.fs = 6400.0;
            s.f0 = 50.0;
            s.values.resize(20 * 128);
            for (long i = 0; i < 20 * 128; ++i)
                s.values[i] = amp * std::sin(2.0 * kPi * 50.0 * i / 6400.0 + phase);
            return s;
        };
        rec.u0b = mk(60.0, -0.5);
        rec.feeders = {{"i0L", mk(4.0, 2.0)}, {"F1", mk(8.0, 0.2)}, {"F2", mk(5.0, 0.2)}};
        export_csv(rec, tmp.file("healthy.csv"));
    }
    REQUIRE(run("detect --in " + tmp.file("healthy.csv")) == 2);
    REQUIRE(run("identify --in " + tmp.file("healthy.csv")) == 2);

    // detection without identification: faulty currents with a flat bus
    // voltage leave every INDEX at zero, exit 3
    {
        auto rec = ingest_csv(tmp.file("corpus/R01.csv"));
        for (auto& x : rec.u0b.values) x = 0.0;
        export_csv(rec, tmp.file("nobus.csv"));
    }
    REQUIRE(run("identify --in " + tmp.file("nobus.csv") + " --neutral resonant") == 3);
    REQUIRE(run("detect --in " + tmp.file("nobus.csv") + " --neutral resonant") == 0);

    // bad inputs: exit 1
    REQUIRE(run("identify --in " + tmp.file("does_not_exist.csv")) == 1);
    REQUIRE(run("synth --manifest " + tmp.file("corpus/R01.csv") + " --out " +
                tmp.file("x")) == 1);

    // oracle verb writes its dump
    REQUIRE(run("oracle --neutral resonant --v -0.07 --out " + tmp.file("oracle.tsv")) == 0);
    REQUIRE(fs::exists(tmp.path / "oracle.tsv"));
}

TEST_CASE("cli: config file values take precedence over flags") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("cfg.json"));
        out << R"({"trigger_threshold": 30})";
    }
    // build a short faulty record; with threshold 30 it cannot trigger inside
    // 12 cycles, so the config file wins over the flag setting threshold 4
    const auto p = NetworkParams::resonant(
        {1.2e-6, 0.35e-6, 1.4e-6, 0.9e-6}, 1, -0.09);
    DistortionSpec spec;
    spec.i_fm = 12.0;
    spec.i_fm_dist = distortion_peak_for_band(p, 12.0, 0.26);
    spec.tau = -0.4;
    spec.phi = 0.7;
    export_csv(solve_resonant(p, spec, 6400.0, 12), tmp.file("rec.csv"));

    REQUIRE(run("detect --in " + tmp.file("rec.csv") + " --trigger-threshold 4") == 0);
    REQUIRE(run("detect --in " + tmp.file("rec.csv") + " --trigger-threshold 4 --config " +
                tmp.file("cfg.json")) == 2);
}
