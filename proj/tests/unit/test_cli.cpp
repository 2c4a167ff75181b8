#include "hetsnn/runner.hpp"
#include "hetsnn/snapshot.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hetsnn;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const char* kSmallConfig = R"(; small end-to-end fixture
[experiment]
seed = 5

[topology]
n_total = 60
lattice = 4 4 4

[plasticity]
train_duration = 200

[metrics]
tau_max = 20
mc_samples = 700
rank_stimuli = 5

[lnp]
iterations = 2
timescale_budget = 5

[data]
warmup_samples = 20
train_samples = 60
test_samples = 20
trials_per_class = 4

[bo]
budget = 5
n_init = 3
train_duration = 100
)";

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / ("hetsnn_test_" + name);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const fs::path& dir, const std::string& text, const std::string& name = "run.ini") {
    write_text_file(dir / name, text);
    return dir / name;
}

CommandArgs args(const std::string& cmd, const fs::path& config, const fs::path& out) {
    CommandArgs a;
    a.command = cmd;
    a.config = config;
    a.out = out;
    return a;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(kSmallConfig);
    CHECK(c.seed == 5u);
    CHECK(c.topology.n_total == 60);
    CHECK(c.topology.lattice_shape == std::array<std::size_t, 3>{4, 4, 4});
    CHECK(c.lnp.config.iterations == 2);

    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const std::string unknown = message("[topology]\nbogus = 1\n");
    CHECK(unknown.find("[topology]") != std::string::npos);
    CHECK(unknown.find("bogus") != std::string::npos);
    CHECK(message("[nowhere]\nx = 1\n").find("nowhere") != std::string::npos);
    CHECK(message("[topology]\nn_total = many\n").find("[topology] n_total") != std::string::npos);
    CHECK(message("[dynamics]\ntau_m_exc = 4 5 6\n").find("[dynamics] tau_m_exc") != std::string::npos);
    CHECK(message("[encoding]\nmode = morse\n").find("[encoding] mode") != std::string::npos);

    const ExperimentConfig g = parse_config("[dynamics]\ntau_m_exc = 3 7\ntau_m_inh = 12\n");
    CHECK(g.dynamics.profile.excitatory.tau_m == GammaSpec::gamma(3.0, 7.0));
    CHECK(g.dynamics.profile.inhibitory.tau_m == GammaSpec::point_mass(12.0));

    ExperimentConfig unseeded = parse_config("[topology]\nn_total = 50\n");
    CHECK_THROWS_AS(unseeded.require_seed(), ConfigError);
    CHECK(config_hash("abc", 1) == config_hash("abc", 1));
    CHECK(config_hash("abc", 1) != config_hash("abc", 2));
    CHECK(config_hash("abc", 1).size() == 8);
}

TEST_CASE("exit codes") {
    TempDir dir("exit");
    CHECK(run_command(args("build", dir.path / "missing.ini", dir.path / "o")) == 4);
    CHECK(run_command(args("build", write_config(dir.path, "[topology]\nwhat = 1\n", "bad.ini"), dir.path / "o")) == 2);
    CHECK(run_command(args("build", write_config(dir.path, "[topology]\nn_total = 60\nlattice = 4 4 4\n", "noseed.ini"),
                           dir.path / "o")) == 2);

    const fs::path cfg = write_config(dir.path, kSmallConfig);
    CHECK(run_command(args("build", cfg, dir.path / "o")) == 0);
    CommandArgs train = args("train", cfg, dir.path / "o");
    CHECK(run_command(train) == 2);  // no snapshot
    train.snapshot = dir.path / "o" / "snapshot.json";
    CHECK(run_command(train) == 2);  // no task
    train.task = "weather";
    CHECK(run_command(train) == 2);

    // An unstable integrator step overflows the chaotic series.
    const fs::path ucfg = write_config(dir.path, std::string(kSmallConfig).replace(
                                                     std::string(kSmallConfig).find("[data]"), 6, "[data]\ndt = 1.0"),
                                       "unstable.ini");
    train.config = ucfg;
    train.task = "lorenz63";
    CHECK(run_command(train) == 3);

    CommandArgs bad_snapshot = train;
    bad_snapshot.config = cfg;
    bad_snapshot.snapshot = write_config(dir.path, "{ not json", "broken.json");
    CHECK(run_command(bad_snapshot) == 4);
}

TEST_CASE("build") {
    TempDir dir("build");
    const fs::path cfg = write_config(dir.path, kSmallConfig);
    REQUIRE(run_command(args("build", cfg, dir.path / "a")) == 0);
    REQUIRE(run_command(args("build", cfg, dir.path / "b")) == 0);
    const std::string a = read_text_file(dir.path / "a" / "snapshot.json");
    CHECK(a == read_text_file(dir.path / "b" / "snapshot.json"));
    CHECK(serialize_model(parse_model(a)) == a);

    const ordered_json snap = ordered_json::parse(a);
    std::vector<std::string> keys;
    for (auto it = snap.begin(); it != snap.end(); ++it) keys.push_back(it.key());
    REQUIRE(keys.size() >= 3);
    CHECK(keys[0] == "nodes");
    CHECK(keys[1] == "edges");
    CHECK(keys[2] == "input_edges");
    const auto& node = snap["nodes"][0];
    CHECK(node.contains("id"));
    CHECK(node["pos"].size() == 3);
    CHECK((node["sign"] == 1 || node["sign"] == -1));
    const auto& edge = snap["edges"][0];
    CHECK(edge.contains("src"));
    CHECK(edge.contains("dst"));
    CHECK(edge.contains("w"));
    CHECK(snap["input_edges"][0].contains("enc"));

    const ordered_json manifest = ordered_json::parse(read_text_file(dir.path / "a" / "manifest_build.json"));
    for (const auto& f : manifest["files"]) CHECK(fs::exists(dir.path / "a" / f.get<std::string>()));
    CHECK(manifest["config_hash"].get<std::string>().size() == 8);

    const fs::path ecfg = write_config(
        dir.path, std::string(kSmallConfig).replace(std::string(kSmallConfig).find("lattice = 4 4 4"), 15,
                                                    "lattice = 4 4 4\namplitude_c = 0"),
        "empty.ini");
    REQUIRE(run_command(args("build", ecfg, dir.path / "e")) == 0);
    CHECK(parse_model(read_text_file(dir.path / "e" / "snapshot.json")).graph.edges().empty());

    // --seed overrides the file.
    CommandArgs s = args("build", cfg, dir.path / "s");
    s.seed = 6;
    REQUIRE(run_command(s) == 0);
    CHECK(read_text_file(dir.path / "s" / "snapshot.json") != a);
}

TEST_CASE("train") {
    TempDir dir("train");
    const fs::path cfg = write_config(dir.path, kSmallConfig);
    REQUIRE(run_command(args("build", cfg, dir.path / "b")) == 0);
    CommandArgs t = args("train", cfg, dir.path / "t");
    t.snapshot = dir.path / "b" / "snapshot.json";
    t.task = "lorenz63";
    REQUIRE(run_command(t) == 0);
    t.out = dir.path / "t2";
    REQUIRE(run_command(t) == 0);
    CHECK(read_text_file(dir.path / "t" / "trained.json") == read_text_file(dir.path / "t2" / "trained.json"));

    const auto csv = lines_of(read_text_file(dir.path / "t" / "spike_counts.csv"));
    REQUIRE(csv.size() == 61);
    CHECK(csv[0] == "neuron_id,spike_count");
    std::size_t total = 0;
    for (std::size_t i = 1; i < csv.size(); ++i) total += std::stoul(csv[i].substr(csv[i].find(',') + 1));
    const ordered_json stats = ordered_json::parse(read_text_file(dir.path / "t" / "train_stats.json"));
    CHECK(total == stats["total_spikes"].get<std::size_t>());
    CHECK(total > 0);

    const std::string zero_gain = std::string(kSmallConfig).replace(
        std::string(kSmallConfig).find("train_duration = 200"), 20, "train_duration = 200\na_plus = 0\na_minus = 0");
    const fs::path zcfg = write_config(dir.path, zero_gain, "zero.ini");
    REQUIRE(run_command(args("build", zcfg, dir.path / "zb")) == 0);
    CommandArgs z = t;
    z.config = zcfg;
    z.snapshot = dir.path / "zb" / "snapshot.json";
    z.out = dir.path / "z";
    REQUIRE(run_command(z) == 0);
    const Model before = load_model(dir.path / "zb" / "snapshot.json");
    const Model after = load_model(dir.path / "z" / "trained.json");
    REQUIRE(after.graph.edges().size() == before.graph.edges().size());
    for (std::size_t e = 0; e < before.graph.edges().size(); ++e)
        CHECK(after.graph.edges()[e].w == before.graph.edges()[e].w);

    CommandArgs c = t;
    c.task = "synth-class";
    c.out = dir.path / "c";
    REQUIRE(run_command(c) == 0);
    CHECK(ordered_json::parse(read_text_file(dir.path / "c" / "readout.json"))["kind"] == "classifier");
}

TEST_CASE("prune") {
    TempDir dir("prune");
    const fs::path cfg = write_config(dir.path, kSmallConfig);
    REQUIRE(run_command(args("build", cfg, dir.path / "b")) == 0);
    CommandArgs p = args("prune", cfg, dir.path / "p");
    p.snapshot = dir.path / "b" / "snapshot.json";
    REQUIRE(run_command(p) == 0);
    const auto log = lines_of(read_text_file(dir.path / "p" / "lnp_log.jsonl"));
    REQUIRE(log.size() == 2);
    for (std::size_t k = 0; k < log.size(); ++k) {
        const ordered_json j = ordered_json::parse(log[k]);
        std::vector<std::string> keys;
        for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
        CHECK(keys == std::vector<std::string>{"iter", "n_neurons", "n_synapses", "density", "lambda_max",
                                               "degree_var", "shift_applied", "seed"});
        char name[32];
        std::snprintf(name, sizeof name, "iter_%03zu.json", k + 1);
        const Model m = load_model(dir.path / "p" / "prune" / name);
        CHECK(j["n_neurons"].get<std::size_t>() == m.graph.size());
        CHECK(j["n_synapses"].get<std::size_t>() == m.graph.edges().size());
    }

    const std::string none = std::string(kSmallConfig).replace(std::string(kSmallConfig).find("iterations = 2"), 14,
                                                               "iterations = 0");
    CommandArgs z = p;
    z.config = write_config(dir.path, none, "none.ini");
    z.out = dir.path / "z";
    REQUIRE(run_command(z) == 0);
    CHECK(read_text_file(dir.path / "z" / "pruned.json") == read_text_file(dir.path / "b" / "snapshot.json"));
    CHECK(read_text_file(dir.path / "z" / "lnp_log.jsonl").empty());

    const std::string activity = std::string(kSmallConfig).replace(std::string(kSmallConfig).find("iterations = 2"), 14,
                                                                   "iterations = 2\nmode = activity\nactivity_keep = 0.5");
    CommandArgs a = p;
    a.config = write_config(dir.path, activity, "activity.ini");
    a.out = dir.path / "a";
    a.task = "lorenz63";
    REQUIRE(run_command(a) == 0);
    const Model pruned = load_model(dir.path / "a" / "pruned.json");
    const Model original = load_model(dir.path / "b" / "snapshot.json");
    CHECK(pruned.graph.edges().size() <= original.graph.edges().size() / 2 + 1);
}

TEST_CASE("evaluate") {
    TempDir dir("evaluate");
    const fs::path cfg = write_config(dir.path, kSmallConfig);
    REQUIRE(run_command(args("build", cfg, dir.path / "b")) == 0);
    CommandArgs e = args("evaluate", cfg, dir.path / "e");
    e.snapshot = dir.path / "b" / "snapshot.json";
    e.task = "lorenz63";
    REQUIRE(run_command(e) == 0);
    const ordered_json r = ordered_json::parse(read_text_file(dir.path / "e" / "report.json"));
    std::vector<std::string> keys;
    for (auto it = r.begin(); it != r.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"task", "seed", "model", "prediction", "spikes", "energy", "memory",
                                           "separation"});
    CHECK(r["prediction"]["nrmse"].size() == r["prediction"]["horizon"].get<std::size_t>());
    CHECK(r["prediction"]["vpt"].get<std::size_t>() <= r["prediction"]["horizon"].get<std::size_t>());

    e.task = "synth-class";
    e.out = dir.path / "c";
    REQUIRE(run_command(e) == 0);
    const ordered_json c = ordered_json::parse(read_text_file(dir.path / "c" / "report.json"));
    const auto& cm = c["classification"]["confusion"];
    std::size_t diag = 0, total = 0;
    for (std::size_t i = 0; i < cm.size(); ++i)
        for (std::size_t j = 0; j < cm[i].size(); ++j) {
            total += cm[i][j].get<std::size_t>();
            if (i == j) diag += cm[i][j].get<std::size_t>();
        }
    CHECK(total == c["classification"]["n_test"].get<std::size_t>());
    CHECK(c["classification"]["accuracy"].get<double>() ==
          doctest::Approx(static_cast<double>(diag) / static_cast<double>(total)));
}

TEST_CASE("distribution search") {
    TempDir dir("bo");
    const fs::path cfg = write_config(dir.path, kSmallConfig);
    REQUIRE(run_command(args("bo", cfg, dir.path / "o")) == 0);
    const auto csv = lines_of(read_text_file(dir.path / "o" / "bo_trace.csv"));
    REQUIRE(csv.size() == 6);
    CHECK(csv[0].rfind("iter,ok,value,best_so_far", 0) == 0);
    double previous = -1e300;
    for (std::size_t i = 1; i < csv.size(); ++i) {
        std::istringstream row(csv[i]);
        std::string iter, ok, value, best;
        std::getline(row, iter, ',');
        std::getline(row, ok, ',');
        std::getline(row, value, ',');
        std::getline(row, best, ',');
        const double b = std::stod(best);
        CHECK(b >= previous);
        previous = b;
    }
    const ordered_json best = ordered_json::parse(read_text_file(dir.path / "o" / "best_distribution.json"));
    CHECK(best["objective"] == "efficiency");
    CHECK(best["marginals"].size() == 6);
}
