#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

#include "frfm/io.hpp"
#include "frfm/synthesis.hpp"

using namespace frfm;

namespace {

// Runs the installed binary through the shell and returns its exit code.
int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null",
            const std::string& stderr_path = "/dev/null") {
    const std::string cmd =
        std::string(FRFM_BIN) + " " + args + " > " + stdout_path + " 2> " + stderr_path;
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct ModeSpec {
    double f_hz;
    double xi;
    double peak_db;
};

void write_model(const std::string& path, const std::vector<ModeSpec>& modes) {
    std::string text = "{\"modes\": [";
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const ModalParameter m = helpers::mode_from(modes[i].f_hz, modes[i].xi, modes[i].peak_db);
        if (i) text += ", ";
        text += "{\"f_hz\": " + io::format_double(modes[i].f_hz) +
                ", \"xi\": " + io::format_double(m.xi_r) +
                ", \"phi\": " + io::format_double(m.phi_product) + "}";
    }
    text += "]}";
    io::atomic_write_text(path, text);
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    helpers::TmpDir tmp("cliusage");
    CHECK(run_cli("") == 2);
    CHECK(run_cli("synth") == 2);  // missing required --model
    CHECK(run_cli("--no-such-flag synth") == 2);
    CHECK(run_cli("distance --features x.csv --metric bogus") == 2);
    CHECK(run_cli("report --figure nonsense") == 2);
    CHECK(run_cli("cluster --distance d.csv --linkage ward") == 2);
    CHECK(run_cli("estimate --manifest m.json --estimator h9") == 2);

    // Contradictory grid flags are an argument error, also code 2.
    write_model(tmp.file("m.json"), {{100.0, 0.02, 10.0}});
    CHECK(run_cli("synth --model " + tmp.file("m.json") + " --bins 10 --fmax 50 -o " +
                  tmp.file("x.csv")) == 2);
    CHECK(run_cli("synth --model " + tmp.file("m.json") + " -o " + tmp.file("x.csv")) == 2);
}

TEST_CASE("missing or broken inputs exit with code 1") {
    helpers::TmpDir tmp("clidata");
    CHECK(run_cli("synth --model " + tmp.file("ghost.json") + " --fmax 100 -o " +
                  tmp.file("x.csv")) == 1);
    CHECK(run_cli("extract " + tmp.file("a.csv") + " " + tmp.file("b.csv") + " -o " +
                  tmp.file("f.csv")) == 1);

    io::atomic_write_text(tmp.file("bad.json"), "{\"modes\": []}");
    CHECK(run_cli("synth --model " + tmp.file("bad.json") + " --fmax 100 -o " +
                  tmp.file("x.csv")) == 1);
}

TEST_CASE("the synth-extract-distance-cluster-report chain is deterministic") {
    helpers::TmpDir tmp("clichain");
    write_model(tmp.file("a.json"), {{300.0, 0.02, 12.0}, {800.0, 0.015, 9.0}});
    write_model(tmp.file("b.json"), {{304.0, 0.021, 12.3}, {806.0, 0.0145, 8.8}});
    write_model(tmp.file("c.json"), {{450.0, 0.03, 10.0}, {1100.0, 0.01, 14.0}});

    const std::string grid = " --f0 0 --df 2 --fmax 2000 -o ";
    for (const char* name : {"a", "b", "c"}) {
        const std::string base = tmp.file(name);
        CHECK(run_cli("synth --model " + base + ".json" + grid + base + ".csv") == 0);
        CHECK(std::filesystem::exists(base + ".csv"));
    }
    // Repeat synthesis writes identical bytes.
    CHECK(run_cli("synth --model " + tmp.file("a.json") + grid + tmp.file("a2.csv")) == 0);
    CHECK(helpers::read_file(tmp.file("a.csv")) == helpers::read_file(tmp.file("a2.csv")));

    const std::string features = tmp.file("features.csv");
    CHECK(run_cli("extract " + tmp.file("a.csv") + " " + tmp.file("b.csv") + " " +
                  tmp.file("c.csv") + " --n-peaks 2 -o " + features) == 0);
    const FeatureMatrices fm = io::load_features_csv(features);
    CHECK(fm.labels == std::vector<std::string>{"a", "b", "c"});
    CHECK(fm.members() == 3);
    CHECK(fm.n_peaks() == 2);

    const std::string dist = tmp.file("distance.csv");
    CHECK(run_cli("distance --features " + features + " -o " + dist) == 0);
    const DistanceMatrix d = io::load_distance_csv(dist);
    d.check();
    REQUIRE(d.size() == 3);
    CHECK(d.d(0, 1) < d.d(0, 2));  // a and b share a model shape, c does not
    CHECK(d.d(0, 1) < d.d(1, 2));

    CHECK(run_cli("distance --features " + features + " -o " + tmp.file("distance2.csv")) == 0);
    CHECK(helpers::read_file(dist) == helpers::read_file(tmp.file("distance2.csv")));

    const std::string outdir = tmp.file("clustered");
    CHECK(run_cli("cluster --distance " + dist + " -o " + outdir) == 0);
    for (const char* artifact : {"dendrogram.json", "dendrogram.newick", "distance_ordered.csv"})
        CHECK(std::filesystem::exists(std::filesystem::path(outdir) / artifact));
    const io::DendrogramFile df =
        io::load_dendrogram_json((std::filesystem::path(outdir) / "dendrogram.json").string());
    CHECK(df.labels == std::vector<std::string>{"a", "b", "c"});
    CHECK(df.dend.merges[0].left == 0);
    CHECK(df.dend.merges[0].right == 1);

    const std::string svg = tmp.file("dend.svg");
    CHECK(run_cli("report --figure dendrogram --dendrogram " + outdir + "/dendrogram.json -o " +
                  svg) == 0);
    CHECK(helpers::read_file(svg).rfind("<svg", 0) == 0);

    const std::string overlay = tmp.file("overlay.svg");
    CHECK(run_cli("report --figure frf-overlay --frf " + tmp.file("a.csv") +
                  " --n-peaks 2 -o " + overlay) == 0);
    const std::string body = helpers::read_file(overlay);
    std::size_t circles = 0;
    for (std::size_t at = body.find("<circle"); at != std::string::npos;
         at = body.find("<circle", at + 7))
        ++circles;
    CHECK(circles == 2);
}

TEST_CASE("--summary emits a machine-readable run record") {
    helpers::TmpDir tmp("clisummary");
    write_model(tmp.file("m.json"), {{200.0, 0.02, 10.0}});
    const std::string out = tmp.file("frf.csv");
    const std::string cap = tmp.file("stdout.json");
    REQUIRE(run_cli("--summary synth --model " + tmp.file("m.json") + " --fmax 500 -o " + out,
                    cap) == 0);

    const nlohmann::json j = nlohmann::json::parse(helpers::read_file(cap));
    CHECK(j.at("command") == "synth");
    REQUIRE(j.at("outputs").is_array());
    CHECK(j["outputs"].size() == 1);
    CHECK(j["outputs"][0] == out);
    CHECK(j.at("warnings").is_array());
    CHECK(j["warnings"].empty());
}

TEST_CASE("config files supply defaults that flags override") {
    helpers::TmpDir tmp("cliconfig");
    write_model(tmp.file("m.json"), {{100.0, 0.02, 10.0}});
    io::atomic_write_text(tmp.file("cfg.json"), "{\"synth\": {\"df\": 4.0}}\n");

    const std::string base = "--config " + tmp.file("cfg.json") + " synth --model " +
                             tmp.file("m.json") + " --fmax 400 -o ";
    REQUIRE(run_cli(base + tmp.file("a.csv")) == 0);
    CHECK(io::load_frf_csv(tmp.file("a.csv")).df == 4.0);

    REQUIRE(run_cli(base + tmp.file("b.csv") + " --df 2") == 0);
    CHECK(io::load_frf_csv(tmp.file("b.csv")).df == 2.0);

    io::atomic_write_text(tmp.file("broken.json"), "{nope}");
    CHECK(run_cli("--config " + tmp.file("broken.json") + " synth --model " + tmp.file("m.json") +
                  " --fmax 400 -o " + tmp.file("c.csv")) == 2);
}

TEST_CASE("duplicate member labels are rejected") {
    helpers::TmpDir tmp("clidup");
    write_model(tmp.file("m.json"), {{300.0, 0.02, 12.0}, {800.0, 0.015, 9.0}});
    const std::string grid = " --f0 0 --df 2 --fmax 2000 -o ";
    REQUIRE(run_cli("synth --model " + tmp.file("m.json") + grid + tmp.file("a.csv")) == 0);
    std::filesystem::create_directories(tmp.path / "sub");
    std::filesystem::copy_file(tmp.file("a.csv"), tmp.file("sub/a.csv"));

    // Same stem in two directories collides on the derived label.
    CHECK(run_cli("extract " + tmp.file("a.csv") + " " + tmp.file("sub/a.csv") + " --n-peaks 2 -o " +
                  tmp.file("f.csv")) == 2);
}

TEST_CASE("--quiet silences warnings on stderr") {
    helpers::TmpDir tmp("cliquiet");
    write_model(tmp.file("m.json"), {{300.0, 0.02, 12.0}, {800.0, 0.015, 9.0}});
    REQUIRE(run_cli("synth --model " + tmp.file("m.json") + " --f0 0 --df 2 --fmax 2000 -o " +
                    tmp.file("a.csv")) == 0);

    // Bend one frequency stamp so loading resamples and warns.
    std::string text = helpers::read_file(tmp.file("a.csv"));
    const std::size_t at = text.find("\n500,");
    REQUIRE(at != std::string::npos);
    text.replace(at, 5, "\n500.9,");
    io::atomic_write_text(tmp.file("bent.csv"), text);

    const std::string args = "extract " + tmp.file("a.csv") + " " + tmp.file("bent.csv") +
                             " --n-peaks 2 -o " + tmp.file("f.csv");
    const std::string errfile = tmp.file("stderr.txt");
    REQUIRE(run_cli(args, "/dev/null", errfile) == 0);
    CHECK(helpers::read_file(errfile).find("resampled") != std::string::npos);

    REQUIRE(run_cli("--quiet " + args, "/dev/null", errfile) == 0);
    CHECK(helpers::read_file(errfile).empty());
}

TEST_CASE("estimate writes one FRF per manifest entry") {
    helpers::TmpDir tmp("cliest");
    const ModalModel model{{helpers::mode_from(100.0, 0.03, 10.0)}};
    const helpers::ImpulsePair pair = helpers::impulse_pair_from_model(model, 1024.0, 1024);
    io::save_time_csv(pair.force, tmp.file("f.csv"));
    io::save_time_csv(pair.velocity, tmp.file("x.csv"));
    io::atomic_write_text(tmp.file("m.json"),
                          R"({"entries": [{"label": "hit", "kind": "impulse_pair",)"
                          R"( "paths": ["f.csv", "x.csv"]}]})");

    const std::string outdir = tmp.file("est");
    REQUIRE(run_cli("estimate --manifest " + tmp.file("m.json") + " -o " + outdir) == 0);
    const std::string frf_path = (std::filesystem::path(outdir) / "frf_hit.csv").string();
    REQUIRE(std::filesystem::exists(frf_path));
    // A single average cannot produce a coherence file.
    CHECK(!std::filesystem::exists((std::filesystem::path(outdir) / "coherence_hit.csv").string()));

    // The unit impulse makes the estimate equal the target spectrum up to FFT
    // round-trip error; its peak bin should sit at the synthesized mode.
    const FrequencySeries est = io::load_frf_csv(frf_path);
    std::size_t peak = 0;
    for (std::size_t k = 1; k < est.size(); ++k)
        if (std::abs(est.values[k]) > std::abs(est.values[peak])) peak = k;
    CHECK(std::abs(est.freq(peak) - 100.0) <= 1.0);
}
