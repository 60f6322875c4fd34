#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbboost/cli.hpp"
#include "gbboost/dataset.hpp"

using namespace gbb;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "gbboost");
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& s : args) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gbb_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    REQUIRE(f.good());
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

std::string blobs_csv(std::size_t n, std::size_t q, int K, double spread, std::uint64_t seed) {
    const Dataset d = synth_blobs(n, q, K, spread, seed);
    std::ostringstream o;
    o << std::setprecision(12);
    for (std::size_t r = 0; r < d.n; ++r) {
        for (std::size_t j = 0; j < d.q; ++j) o << d.at(r, j) << ',';
        o << 'c' << d.labels[r] << '\n';
    }
    return o.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

// Timing fields vary between identical runs; everything else must not.
void strip_ms(json& j) {
    if (j.is_object()) {
        std::vector<std::string> doomed;
        for (auto& [key, value] : j.items()) {
            if (key.ends_with("_ms"))
                doomed.push_back(key);
            else
                strip_ms(value);
        }
        for (const auto& key : doomed) j.erase(key);
    } else if (j.is_array()) {
        for (auto& v : j) strip_ms(v);
    }
}

}  // namespace

TEST_CASE("noisify: rate 0 is a byte-identical copy with an empty sidecar") {
    const std::string dir = fresh_dir("noisify_zero");
    // KEEL-style directives, comments and a header all survive verbatim.
    const std::string text =
        "@relation toy\n"
        "% a comment\n"
        "a,b,label\n"
        "1.0,2.0,x\n"
        "# trailing comment\n"
        "3.0,4.0,y\n"
        "5.5,6.5,x\n";
    write_file(dir + "/toy.csv", text);
    REQUIRE(run({"noisify", "--data", dir + "/toy.csv", "--noise", "0", "--out", dir}) == 0);
    CHECK(read_file(dir + "/toy_noise00.csv") == text);
    CHECK(read_file(dir + "/toy_noise00.flips.csv") ==
          "index,original_label,new_label,seed,rate\n");
}

TEST_CASE("noisify: only the flipped label cells change") {
    const std::string dir = fresh_dir("noisify_flip");
    write_file(dir + "/blob.csv", blobs_csv(60, 3, 3, 1.0, 11));
    REQUIRE(run({"noisify", "--data", dir + "/blob.csv", "--noise", "0.1", "--noise-seed", "9",
                 "--out", dir}) == 0);

    const Dataset before = load_dataset(dir + "/blob.csv");
    const Dataset after = load_dataset(dir + "/blob_noise10.csv");
    CHECK(after.features == before.features);  // bitwise: untouched lines + exact cells
    CHECK(after.class_names == before.class_names);

    const auto sidecar = lines_of(read_file(dir + "/blob_noise10.flips.csv"));
    REQUIRE(sidecar.size() == 1 + 6);  // header + floor(0.1 * 60)
    CHECK(sidecar[0] == "index,original_label,new_label,seed,rate");
    std::set<std::size_t> flipped;
    for (std::size_t i = 1; i < sidecar.size(); ++i) {
        std::istringstream row(sidecar[i]);
        std::string idx, old_name, new_name, seed, rate;
        std::getline(row, idx, ',');
        std::getline(row, old_name, ',');
        std::getline(row, new_name, ',');
        std::getline(row, seed, ',');
        std::getline(row, rate, ',');
        const std::size_t r = std::stoul(idx);
        flipped.insert(r);
        CHECK(before.class_names[before.labels[r]] == old_name);
        CHECK(after.class_names[after.labels[r]] == new_name);
        CHECK(old_name != new_name);
        CHECK(seed == "9");
        CHECK(rate == "0.1");
    }
    for (std::size_t r = 0; r < before.n; ++r)
        if (!flipped.count(r)) CHECK(before.labels[r] == after.labels[r]);
}

TEST_CASE("noisify: sweep emits the six standard rates") {
    const std::string dir = fresh_dir("noisify_sweep");
    write_file(dir + "/blob.csv", blobs_csv(80, 2, 3, 1.0, 13));
    REQUIRE(run({"noisify", "--data", dir + "/blob.csv", "--sweep", "--out", dir}) == 0);
    for (const char* pct : {"05", "10", "15", "20", "25", "30"}) {
        CHECK(fs::exists(dir + "/blob_noise" + std::string(pct) + ".csv"));
        CHECK(fs::exists(dir + "/blob_noise" + std::string(pct) + ".flips.csv"));
    }
    CHECK(run({"noisify", "--data", dir + "/blob.csv", "--sweep", "--noise", "0.4", "--out",
               dir}) != 0);  // mutually exclusive
}

TEST_CASE("noisify: missing input exits nonzero") {
    const std::string dir = fresh_dir("noisify_missing");
    CHECK(run({"noisify", "--data", dir + "/absent.csv", "--noise", "0.1", "--out", dir}) != 0);
}

TEST_CASE("granulate: 625-row 3-class file reports capacity 12") {
    const std::string dir = fresh_dir("granulate");
    write_file(dir + "/balance.csv", blobs_csv(625, 4, 3, 1.0, 53));
    REQUIRE(run({"granulate", "--data", dir + "/balance.csv", "--dump", "--out", dir}) == 0);

    const json report = json::parse(read_file(dir + "/balance.granulation.json"));
    CHECK(report["capacity"] == 12);
    CHECK(report["capacity_clamped"] == false);
    CHECK(report["all_pure"] == true);
    CHECK(report["n"] == 625);
    CHECK(report["classes"] == 3);
    CHECK(report["retained"].get<std::size_t>() + report["discarded"].get<std::size_t>() == 625);
    CHECK(report["ball_size_max"].get<std::size_t>() <= 12);
    CHECK(report["config"]["normalize"] == true);

    const auto membership = lines_of(read_file(dir + "/balance.membership.csv"));
    REQUIRE(membership.size() == 1 + report["retained"].get<std::size_t>());
    CHECK(membership[0] == "ball_id,sample_index,radial_distance");
    const long balls = report["balls"].get<long>();
    std::set<long> rows_seen;
    for (std::size_t i = 1; i < membership.size(); ++i) {
        std::istringstream row(membership[i]);
        std::string ball, sample, radial;
        std::getline(row, ball, ',');
        std::getline(row, sample, ',');
        std::getline(row, radial, ',');
        CHECK(std::stol(ball) >= 0);
        CHECK(std::stol(ball) < balls);
        CHECK(rows_seen.insert(std::stol(sample)).second);  // disjoint balls
        CHECK(std::stod(radial) >= 0.0);
    }

    std::size_t hist_total = 0;
    for (const auto& [size, count] : report["size_histogram"].items()) {
        CHECK(std::stoul(size) >= 2);
        CHECK(std::stoul(size) <= 12);
        hist_total += count.get<std::size_t>() * std::stoul(size);
    }
    CHECK(hist_total == report["retained"].get<std::size_t>());
}

TEST_CASE("granulate: single-class input is rejected at load") {
    const std::string dir = fresh_dir("granulate_single");
    write_file(dir + "/mono.csv", "1.0,2.0,a\n3.0,4.0,a\n5.0,6.0,a\n");
    CHECK(run({"granulate", "--data", dir + "/mono.csv", "--out", dir}) != 0);
}

TEST_CASE("train: identical configs give identical reports and ensembles") {
    const std::string dir = fresh_dir("train_det");
    write_file(dir + "/blob.csv", blobs_csv(200, 3, 3, 1.2, 29));
    const std::vector<std::string> base = {"train",   "--data",  dir + "/blob.csv",
                                           "--algo",  "samme",   "--iters",
                                           "10",      "--noise", "0.1",
                                           "--repeats", "2"};
    auto with_out = [&](const std::string& out) {
        std::vector<std::string> args = base;
        args.push_back("--out");
        args.push_back(out);
        return args;
    };
    REQUIRE(run(with_out(dir + "/a")) == 0);
    REQUIRE(run(with_out(dir + "/b")) == 0);

    json ra = json::parse(read_file(dir + "/a/blob_samme.report.json"));
    json rb = json::parse(read_file(dir + "/b/blob_samme.report.json"));
    strip_ms(ra);
    strip_ms(rb);
    ra["config"].erase("out");
    rb["config"].erase("out");
    CHECK(ra == rb);
    CHECK(read_file(dir + "/a/blob_samme.ensemble") ==
          read_file(dir + "/b/blob_samme.ensemble"));
}

TEST_CASE("train: gsa report carries stop metadata, repeats and means") {
    const std::string dir = fresh_dir("train_gsa");
    write_file(dir + "/blob.csv", blobs_csv(625, 4, 3, 1.0, 53));
    REQUIRE(run({"train", "--data", dir + "/blob.csv", "--algo", "gsa", "--noise", "0.1",
                 "--repeats", "3", "--out", dir}) == 0);

    const json report = json::parse(read_file(dir + "/blob_gsa.report.json"));
    REQUIRE(report["repeats"].size() == 3);
    double acc_sum = 0.0;
    for (const auto& rep : report["repeats"]) {
        CHECK(rep.contains("stopped_early"));
        CHECK(rep["stopped_early"].is_boolean());
        CHECK(rep["t_prime"].get<std::size_t>() >= 1);
        CHECK(rep["subset_final"].get<std::size_t>() > 0);  // gsa: never null
        CHECK(!rep["stop_reason"].get<std::string>().empty());
        CHECK(rep["confusion"].size() == 3);
        acc_sum += rep["accuracy"].get<double>();
    }
    CHECK(report["mean"]["accuracy"].get<double>() ==
          doctest::Approx(acc_sum / 3.0).epsilon(1e-12));
    CHECK(report["config"]["depth"] == 5);     // defaults resolved into the report
    CHECK(report["config"]["iters"] == 100);
    CHECK(report["ensemble_repeat"] == 0);

    // Per-repeat seeds derive from the base seeds.
    CHECK(report["repeats"][0]["split_seed"] == 1);
    CHECK(report["repeats"][2]["split_seed"] == 3);
    CHECK(report["repeats"][2]["noise_seed"] == 3);
}

TEST_CASE("train: samme report leaves subset_final null") {
    const std::string dir = fresh_dir("train_samme_null");
    write_file(dir + "/blob.csv", blobs_csv(150, 2, 3, 1.0, 31));
    REQUIRE(run({"train", "--data", dir + "/blob.csv", "--algo", "samme", "--iters", "5",
                 "--out", dir}) == 0);
    const json report = json::parse(read_file(dir + "/blob_samme.report.json"));
    CHECK(report["repeats"][0]["subset_final"].is_null());
}

TEST_CASE("eval: scores a saved ensemble and rejects mismatched data") {
    const std::string dir = fresh_dir("eval");
    write_file(dir + "/blob.csv", blobs_csv(300, 3, 3, 1.0, 37));
    REQUIRE(run({"train", "--data", dir + "/blob.csv", "--algo", "gsa", "--out", dir}) == 0);
    REQUIRE(run({"eval", "--data", dir + "/blob.csv", "--model", dir + "/blob_gsa.ensemble",
                 "--out", dir}) == 0);

    const json report = json::parse(read_file(dir + "/blob_eval_gadaboost_sa.json"));
    CHECK(report["accuracy"].get<double>() >= 0.8);  // separable blobs, trained on 80% of them
    CHECK(report["algorithm"] == "gadaboost_sa");
    CHECK(report["t_prime"].get<std::size_t>() >= 1);
    CHECK(report["per_class"].size() == 3);

    write_file(dir + "/narrow.csv", blobs_csv(50, 2, 3, 1.0, 39));
    CHECK(run({"eval", "--data", dir + "/narrow.csv", "--model", dir + "/blob_gsa.ensemble",
               "--out", dir}) != 0);
    CHECK(run({"eval", "--data", dir + "/blob.csv", "--out", dir}) != 0);  // --model required
}

TEST_CASE("bench: run cardinality, comparison table and plot series") {
    const std::string dir = fresh_dir("bench");
    write_file(dir + "/blob.csv", blobs_csv(250, 3, 3, 1.2, 41));
    REQUIRE(run({"bench", "--data", dir + "/blob.csv", "--algo", "gsa,samme", "--noise",
                 "0.1,0.2", "--repeats", "2", "--iters", "15", "--out", dir}) == 0);

    const auto runs = lines_of(read_file(dir + "/bench_runs.csv"));
    REQUIRE(runs.size() == 1 + 2 * 2 * 2);  // algos x noise x repeats
    CHECK(runs[0] == "dataset,algorithm,noise,seed,accuracy,macro_f1,fit_ms,Tprime,subset_final");

    const auto cmp = lines_of(read_file(dir + "/bench_compare.csv"));
    REQUIRE(cmp.size() == 1 + 2 * 1 * 2);  // noise x rivals x metrics
    CHECK(cmp[0] == "noise,rival,metric,win,loss,tie");
    for (std::size_t i = 1; i < cmp.size(); ++i) {
        std::istringstream row(cmp[i]);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 6);
        CHECK(std::stoi(fields[3]) + std::stoi(fields[4]) + std::stoi(fields[5]) == 2);
    }

    const auto plot = lines_of(read_file(dir + "/bench_plot.csv"));
    REQUIRE(plot.size() == 1 + 2 * 2);  // algos x noise
    CHECK(plot[0] == "noise,algorithm,mean_accuracy");

    // Summary orders algorithms by mean accuracy descending within a noise level.
    const auto summary = lines_of(read_file(dir + "/bench_summary.csv"));
    REQUIRE(summary.size() == 1 + 2 * 2);
    double prev = 2.0;
    std::string prev_noise;
    for (std::size_t i = 1; i < summary.size(); ++i) {
        std::istringstream row(summary[i]);
        std::string noise, algo, acc;
        std::getline(row, noise, ',');
        std::getline(row, algo, ',');
        std::getline(row, acc, ',');
        if (noise != prev_noise) prev = 2.0;
        CHECK(std::stod(acc) <= prev);
        prev = std::stod(acc);
        prev_noise = noise;
    }

    const json report = json::parse(read_file(dir + "/bench_report.json"));
    CHECK(report["reference"] == "gsa");
    CHECK(report["failures"].empty());
    CHECK(report["runs"] == 8);
}

TEST_CASE("bench: workers do not change the results") {
    const std::string dir = fresh_dir("bench_workers");
    write_file(dir + "/blob.csv", blobs_csv(150, 2, 3, 1.2, 43));
    const std::vector<std::string> base = {"bench", "--data", dir + "/blob.csv", "--algo",
                                           "gsa,samme", "--noise", "0.15", "--repeats", "2",
                                           "--iters", "10"};
    auto with = [&](const std::string& out, const char* workers) {
        std::vector<std::string> args = base;
        args.insert(args.end(), {"--out", out, "--workers", workers});
        return args;
    };
    REQUIRE(run(with(dir + "/w1", "1")) == 0);
    REQUIRE(run(with(dir + "/w3", "3")) == 0);

    auto rows_without_ms = [&](const std::string& path) {
        std::vector<std::string> out;
        for (auto& line : lines_of(read_file(path))) {
            std::vector<std::string> fields;
            std::istringstream row(line);
            std::string f;
            while (std::getline(row, f, ',')) fields.push_back(f);
            fields.erase(fields.begin() + 6);  // fit_ms varies
            std::string joined;
            for (const auto& x : fields) joined += x + '|';
            out.push_back(joined);
        }
        return out;
    };
    CHECK(rows_without_ms(dir + "/w1/bench_runs.csv") ==
          rows_without_ms(dir + "/w3/bench_runs.csv"));
}

TEST_CASE("config file: applied under flags, unknown keys rejected") {
    const std::string dir = fresh_dir("config");
    write_file(dir + "/blob.csv", blobs_csv(200, 3, 3, 1.2, 47));
    write_file(dir + "/run.cfg",
               "# defaults for the small experiment\n"
               "algo = samme\n"
               "depth = 3\n"
               "iters = 7\n"
               "noise = 0.15\n");
    REQUIRE(run({"train", "--config", dir + "/run.cfg", "--data", dir + "/blob.csv", "--iters",
                 "9", "--out", dir}) == 0);
    const json report = json::parse(read_file(dir + "/blob_samme.report.json"));
    CHECK(report["algorithm"] == "samme");
    CHECK(report["config"]["depth"] == 3);          // from the file
    CHECK(report["config"]["iters"] == 9);          // flag wins
    CHECK(report["config"]["noise"][0].get<double>() == doctest::Approx(0.15));

    write_file(dir + "/bad.cfg", "depht = 3\n");
    CHECK(run({"train", "--config", dir + "/bad.cfg", "--data", dir + "/blob.csv", "--out",
               dir}) != 0);
    write_file(dir + "/junk.cfg", "depth\n");
    CHECK(run({"train", "--config", dir + "/junk.cfg", "--data", dir + "/blob.csv", "--out",
               dir}) != 0);
}

TEST_CASE("GBBOOST_OUT supplies the default output directory") {
    const std::string dir = fresh_dir("envout");
    write_file(dir + "/blob.csv", blobs_csv(100, 2, 2, 1.0, 59));
    REQUIRE(setenv("GBBOOST_OUT", (dir + "/via_env").c_str(), 1) == 0);
    const int rc = run({"granulate", "--data", dir + "/blob.csv"});
    unsetenv("GBBOOST_OUT");
    REQUIRE(rc == 0);
    CHECK(fs::exists(dir + "/via_env/blob.granulation.json"));
}

TEST_CASE("label columns resolve by header name and by index") {
    const std::string dir = fresh_dir("labelcol");
    // label first, two feature columns after it
    std::ostringstream csv;
    csv << "target,f0,f1\n";
    const Dataset d = synth_blobs(90, 2, 3, 1.0, 61);
    csv << std::setprecision(12);
    for (std::size_t r = 0; r < d.n; ++r)
        csv << 'c' << d.labels[r] << ',' << d.at(r, 0) << ',' << d.at(r, 1) << '\n';
    write_file(dir + "/named.csv", csv.str());

    CHECK(run({"train", "--data", dir + "/named.csv", "--label-col", "target", "--algo",
               "samme", "--iters", "5", "--out", dir + "/by_name"}) == 0);
    CHECK(run({"train", "--data", dir + "/named.csv", "--label-col", "0", "--algo", "samme",
               "--iters", "5", "--out", dir + "/by_index"}) == 0);
    const json a = json::parse(read_file(dir + "/by_name/named_samme.report.json"));
    const json b = json::parse(read_file(dir + "/by_index/named_samme.report.json"));
    CHECK(a["repeats"][0]["accuracy"] == b["repeats"][0]["accuracy"]);
}
