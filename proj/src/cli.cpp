#include "gbboost/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gbboost/boosting.hpp"
#include "gbboost/dataset.hpp"
#include "gbboost/ensemble_io.hpp"
#include "gbboost/granulation.hpp"
#include "gbboost/metrics.hpp"

using json = nlohmann::json;

namespace gbb {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(',', start);
        std::string item = trim(pos == std::string::npos ? s.substr(start)
                                                         : s.substr(start, pos - start));
        if (!item.empty()) out.push_back(item);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f << content;
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

// Run `job(0..n_jobs)` on up to `workers` threads. Jobs must not throw;
// callers record failures into per-slot state instead.
void run_pool(std::size_t n_jobs, int workers, const std::function<void(std::size_t)>& job) {
    if (workers <= 1 || n_jobs <= 1) {
        for (std::size_t i = 0; i < n_jobs; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n_jobs;) job(i);
    };
    std::vector<std::thread> threads;
    const int count = std::min<int>(workers, static_cast<int>(n_jobs));
    threads.reserve(count);
    for (int t = 0; t < count; ++t) threads.emplace_back(loop);
    for (auto& t : threads) t.join();
}

json config_json(const RunConfig& cfg) {
    return json{{"data", cfg.data},
                {"label_col", cfg.label_col},
                {"model", cfg.model},
                {"algos", cfg.algos},
                {"depth", cfg.depth},
                {"min_leaf", cfg.min_leaf},
                {"iters", cfg.iters},
                {"k", cfg.k},
                {"noise", cfg.noise},
                {"noise_seed", cfg.noise_seed},
                {"split", cfg.split},
                {"split_seed", cfg.split_seed},
                {"repeats", cfg.repeats},
                {"normalize", cfg.normalize},
                {"out", resolve_out_dir(cfg)},
                {"workers", cfg.workers},
                {"dump", cfg.dump},
                {"sweep", cfg.sweep},
                {"reference", cfg.reference}};
}

json scores_json(const Scores& s, const std::vector<std::string>& class_names) {
    json per = json::array();
    for (int c = 0; c < s.n_classes; ++c) {
        const auto& p = s.per_class[c];
        per.push_back(json{{"class", class_names.at(c)},
                           {"precision", p.precision},
                           {"recall", p.recall},
                           {"f1", p.f1},
                           {"support", p.support}});
    }
    json conf = json::array();
    for (int t = 0; t < s.n_classes; ++t) {
        json row = json::array();
        for (int p = 0; p < s.n_classes; ++p) row.push_back(s.confusion[t * s.n_classes + p]);
        conf.push_back(std::move(row));
    }
    return json{{"accuracy", s.accuracy},
                {"macro_f1", s.macro_f1},
                {"per_class", std::move(per)},
                {"confusion", std::move(conf)}};
}

LearnerSpec learner_of(const RunConfig& cfg) {
    LearnerSpec spec;
    spec.kind = LearnerKind::tree;
    spec.max_depth = cfg.depth;
    spec.min_leaf = cfg.min_leaf;
    return spec;
}

// One experiment: split, corrupt the train labels, normalize, fit, score
// the held-out side.
struct RunOutcome {
    Scores scores;
    double fit_ms = 0.0;
    double predict_ms = 0.0;
    std::size_t t_prime = 0;
    std::size_t subset_final = 0;
    std::string stop_reason;
    bool stopped_early = false;
    TrainedEnsemble ens;
};

RunOutcome execute_run(const Dataset& full, Algo algo, const LearnerSpec& spec,
                       const RunConfig& cfg, double noise_rate, std::uint64_t split_seed,
                       std::uint64_t noise_seed) {
    SplitResult sp = train_test_split(full, cfg.split, split_seed);
    inject_label_noise(sp.train, noise_rate, noise_seed);
    NormParams norm;
    if (cfg.normalize) {
        norm = fit_normalization(sp.train);
        apply_normalization(sp.train, norm);
        apply_normalization(sp.test, norm);
    }
    auto [ens, fit_ms] = timed([&] {
        switch (algo) {
            case Algo::samme:
                return samme_fit(sp.train, spec, cfg.iters);
            case Algo::rob_samme:
                return rob_samme_fit(sp.train, spec, cfg.iters, cfg.k);
            default:
                return gadaboost_sa_fit(sp.train, spec, cfg.iters);
        }
    });
    if (cfg.normalize) ens.norm = norm;
    auto [preds, predict_ms] = timed([&] { return predict_ensemble(ens, sp.test); });

    RunOutcome o;
    o.scores = score(preds, sp.test.labels, full.n_classes);
    o.fit_ms = fit_ms;
    o.predict_ms = predict_ms;
    o.t_prime = ens.members.size();
    o.subset_final = ens.final_subset_size;
    o.stop_reason = ens.stop_reason;
    o.stopped_early = ens.stop_reason != "cap reached";
    o.ens = std::move(ens);
    return o;
}

// ---------------------------------------------------------------- noisify

std::vector<std::string> split_fields_like_parser(const std::string& line) {
    std::vector<std::string> out;
    if (line.find(',') != std::string::npos) {
        std::size_t start = 0;
        while (true) {
            std::size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                out.push_back(trim(line.substr(start)));
                break;
            }
            out.push_back(trim(line.substr(start, pos - start)));
            start = pos + 1;
        }
    } else {
        std::istringstream iss(line);
        std::string tok;
        while (iss >> tok) out.push_back(tok);
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text, bool* trailing_nl) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find('\n', start);
        if (pos == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    *trailing_nl = !text.empty() && text.back() == '\n';
    if (*trailing_nl) lines.pop_back();
    return lines;
}

// Substitute the label cell of every flipped row, leaving all other lines
// byte-identical. Flipped lines are re-joined with their own delimiter, so
// their surrounding whitespace may normalize.
std::string rewrite_labels(const std::string& text, const RawLayout& layout,
                           const std::vector<std::size_t>& flipped,
                           const std::vector<int>& new_labels,
                           const std::vector<std::string>& class_names) {
    bool trailing_nl = false;
    std::vector<std::string> lines = split_lines(text, &trailing_nl);
    for (std::size_t i = 0; i < flipped.size(); ++i) {
        std::string& line = lines.at(layout.data_lines.at(flipped[i]));
        const bool had_cr = !line.empty() && line.back() == '\r';
        if (had_cr) line.pop_back();
        const char* delim = line.find(',') != std::string::npos ? "," : " ";
        std::vector<std::string> fields = split_fields_like_parser(line);
        fields.at(layout.label_field) = class_names.at(new_labels[i]);
        std::string joined;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c) joined += delim;
            joined += fields[c];
        }
        if (had_cr) joined += '\r';
        line = std::move(joined);
    }
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        out += lines[i];
        if (i + 1 < lines.size() || trailing_nl) out += '\n';
    }
    return out;
}

int cmd_noisify(const RunConfig& cfg) {
    const std::string& path = cfg.data.at(0);
    const std::string text = read_text(path);
    const Dataset base = parse_dataset(text, cfg.label_col, path);
    const RawLayout layout = scan_layout(text, cfg.label_col, path);

    std::vector<double> rates =
        cfg.sweep ? std::vector<double>{0.05, 0.10, 0.15, 0.20, 0.25, 0.30} : cfg.noise;
    const std::string out_dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(out_dir);
    const std::string stem = stem_of(path);
    const std::string ext = std::filesystem::path(path).extension().string();

    std::set<std::string> names;
    for (double rate : rates) {
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "%02ld", std::lround(rate * 100.0));
        const std::string name = stem + "_noise" + suffix;
        if (!names.insert(name).second)
            throw std::invalid_argument("noisify: rates " + fmt("%g", rate) +
                                        " collide on output name " + name);

        Dataset noisy = base;
        NoiseRecord rec = inject_label_noise(noisy, rate, cfg.noise_seed);

        const std::string data_path = (std::filesystem::path(out_dir) / (name + ext)).string();
        if (rec.flipped.empty()) {
            atomic_write_text(data_path, text);
        } else {
            std::vector<int> new_labels(rec.flipped.size());
            for (std::size_t i = 0; i < rec.flipped.size(); ++i)
                new_labels[i] = noisy.labels[rec.flipped[i]];
            atomic_write_text(data_path, rewrite_labels(text, layout, rec.flipped, new_labels,
                                                        base.class_names));
        }

        std::ostringstream side;
        side << "index,original_label,new_label,seed,rate\n";
        for (std::size_t i = 0; i < rec.flipped.size(); ++i) {
            const std::size_t row = rec.flipped[i];
            side << row << ',' << base.class_names.at(rec.original_labels[i]) << ','
                 << base.class_names.at(noisy.labels[row]) << ',' << cfg.noise_seed << ','
                 << fmt("%g", rate) << '\n';
        }
        const std::string side_path =
            (std::filesystem::path(out_dir) / (name + ".flips.csv")).string();
        atomic_write_text(side_path, side.str());

        std::cout << data_path << ": flipped " << rec.flipped.size() << " of " << base.n
                  << " labels (rate " << fmt("%g", rate) << ")\n";
    }
    return 0;
}

// -------------------------------------------------------------- granulate

int cmd_granulate(const RunConfig& cfg) {
    const std::string& path = cfg.data.at(0);
    Dataset d = load_dataset(path, cfg.label_col);
    if (cfg.normalize) apply_normalization(d, fit_normalization(d));

    auto [g, ms] = timed([&] { return granulate(d); });

    std::size_t retained = 0;
    double radius_sum = 0.0, radius_max = 0.0, mean_radius_sum = 0.0;
    bool all_pure = true;
    std::map<std::size_t, std::size_t> histogram;  // ball size -> count
    for (const auto& ball : g.balls) {
        ++histogram[ball.indices.size()];
        retained += ball.indices.size();
        radius_sum += ball.radius;
        radius_max = std::max(radius_max, ball.radius);
        mean_radius_sum += ball.mean_radius;
        if (purity_and_label(d, ball.indices).first < 1.0) all_pure = false;
    }
    json size_histogram = json::object();
    for (const auto& [size, count] : histogram) size_histogram[std::to_string(size)] = count;

    json report{{"command", "granulate"},
                {"config", config_json(cfg)},
                {"dataset", stem_of(path)},
                {"n", d.n},
                {"q", d.q},
                {"classes", d.n_classes},
                {"capacity", g.capacity},
                {"capacity_clamped", g.capacity_clamped},
                {"balls", g.balls.size()},
                {"retained", retained},
                {"discarded", g.discarded.size()},
                {"fallback_splits", g.fallback_splits},
                {"all_pure", all_pure},
                {"granulate_ms", ms},
                {"size_histogram", std::move(size_histogram)},
                {"ball_size_min", histogram.begin()->first},
                {"ball_size_max", histogram.rbegin()->first},
                {"ball_size_mean", static_cast<double>(retained) / g.balls.size()},
                {"radius_mean", radius_sum / g.balls.size()},
                {"radius_max", radius_max},
                {"mean_radius_mean", mean_radius_sum / g.balls.size()}};

    const std::string out_dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(out_dir);
    const std::string stem = stem_of(path);
    const std::string report_path =
        (std::filesystem::path(out_dir) / (stem + ".granulation.json")).string();
    atomic_write_text(report_path, report.dump(2) + "\n");

    if (cfg.dump) {
        std::ostringstream mem;
        mem << "ball_id,sample_index,radial_distance\n";
        for (std::size_t b = 0; b < g.balls.size(); ++b)
            for (std::size_t m = 0; m < g.balls[b].indices.size(); ++m)
                mem << b << ',' << g.balls[b].indices[m] << ','
                    << fmt("%.9g", g.balls[b].radial[m]) << '\n';
        const std::string mem_path =
            (std::filesystem::path(out_dir) / (stem + ".membership.csv")).string();
        atomic_write_text(mem_path, mem.str());
        std::cout << "membership: " << mem_path << "\n";
    }

    std::cout << stem << ": " << g.balls.size() << " balls (capacity " << g.capacity << "), "
              << retained << " retained, " << g.discarded.size() << " discarded in "
              << fmt("%.1f", ms) << " ms\n"
              << "report: " << report_path << "\n";
    return 0;
}

// ------------------------------------------------------------------ train

int cmd_train(const RunConfig& cfg) {
    if (cfg.algos.size() != 1)
        throw std::invalid_argument("train takes a single --algo (use bench to sweep)");
    if (cfg.noise.size() != 1)
        throw std::invalid_argument("train takes a single --noise rate (use bench to sweep)");
    const Algo algo = algo_from_name(cfg.algos[0]);
    const double rate = cfg.noise[0];
    const std::string& path = cfg.data.at(0);
    const Dataset full = load_dataset(path, cfg.label_col);
    const LearnerSpec spec = learner_of(cfg);

    std::vector<std::optional<RunOutcome>> outcomes(cfg.repeats);
    std::vector<std::string> failures(cfg.repeats);
    run_pool(cfg.repeats, cfg.workers, [&](std::size_t r) {
        try {
            outcomes[r] = execute_run(full, algo, spec, cfg, rate, cfg.split_seed + r,
                                      cfg.noise_seed + r);
        } catch (const std::exception& e) {
            failures[r] = "repeat=" + std::to_string(r) + ": " + e.what();
        }
    });

    const std::string out_dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(out_dir);
    const std::string stem = stem_of(path);
    const std::string base = stem + "_" + cfg.algos[0];

    json reps = json::array();
    json failed = json::array();
    double acc = 0, f1 = 0, fit = 0, pred = 0, tprime = 0;
    std::size_t ok = 0;
    long ensemble_repeat = -1;
    std::cout << "train " << stem << ": algo=" << cfg.algos[0] << " depth=" << cfg.depth
              << " T=" << cfg.iters << " noise=" << fmt("%g", rate) << "\n";
    for (int r = 0; r < cfg.repeats; ++r) {
        if (!outcomes[r]) {
            failed.push_back(failures[r]);
            std::cerr << "train: failed " << failures[r] << "\n";
            continue;
        }
        const RunOutcome& o = *outcomes[r];
        if (ensemble_repeat < 0) {
            save_ensemble((std::filesystem::path(out_dir) / (base + ".ensemble")).string(),
                          o.ens);
            ensemble_repeat = r;
        }
        json rep{{"repeat", r},
                 {"split_seed", cfg.split_seed + r},
                 {"noise_seed", cfg.noise_seed + r},
                 {"fit_ms", o.fit_ms},
                 {"predict_ms", o.predict_ms},
                 {"t_prime", o.t_prime},
                 {"stop_reason", o.stop_reason},
                 {"stopped_early", o.stopped_early}};
        rep["subset_final"] = algo == Algo::gadaboost_sa ? json(o.subset_final) : json();
        rep.update(scores_json(o.scores, full.class_names));
        reps.push_back(std::move(rep));
        acc += o.scores.accuracy;
        f1 += o.scores.macro_f1;
        fit += o.fit_ms;
        pred += o.predict_ms;
        tprime += static_cast<double>(o.t_prime);
        ++ok;
        std::cout << "  repeat " << r << ": accuracy " << fmt("%.4f", o.scores.accuracy)
                  << "  macro_f1 " << fmt("%.4f", o.scores.macro_f1) << "  fit "
                  << fmt("%.1f", o.fit_ms) << " ms  T' " << o.t_prime << "  stop '"
                  << o.stop_reason << "'\n";
    }
    if (ok == 0) throw std::runtime_error("train: every repeat failed");

    const double n = static_cast<double>(ok);
    json report{{"command", "train"},
                {"config", config_json(cfg)},
                {"dataset", stem},
                {"algorithm", cfg.algos[0]},
                {"classes", full.n_classes},
                {"ensemble_repeat", ensemble_repeat},
                {"repeats", std::move(reps)},
                {"failures", std::move(failed)},
                {"mean",
                 json{{"accuracy", acc / n},
                      {"macro_f1", f1 / n},
                      {"fit_ms", fit / n},
                      {"predict_ms", pred / n},
                      {"t_prime", tprime / n}}}};
    const std::string report_path =
        (std::filesystem::path(out_dir) / (base + ".report.json")).string();
    atomic_write_text(report_path, report.dump(2) + "\n");

    if (ok > 1)
        std::cout << "  mean over " << ok << " repeats: accuracy " << fmt("%.4f", acc / n)
                  << "  macro_f1 " << fmt("%.4f", f1 / n) << "  fit " << fmt("%.1f", fit / n)
                  << " ms\n";
    std::cout << "ensemble: "
              << (std::filesystem::path(out_dir) / (base + ".ensemble")).string() << "\n"
              << "report: " << report_path << "\n";

    const bool all_ok = ok == static_cast<std::size_t>(cfg.repeats);
    if (!all_ok) std::cerr << "train: " << cfg.repeats - ok << " repeat(s) failed\n";
    return all_ok ? 0 : 1;
}

// ------------------------------------------------------------------- eval

int cmd_eval(const RunConfig& cfg) {
    if (cfg.model.empty()) throw std::invalid_argument("eval requires --model");
    const TrainedEnsemble ens = load_ensemble(cfg.model);
    const std::string& path = cfg.data.at(0);
    Dataset d = load_dataset(path, cfg.label_col);
    if (d.q != ens.n_features)
        throw std::runtime_error("eval: dataset has " + std::to_string(d.q) +
                                 " features, model expects " + std::to_string(ens.n_features));
    if (d.n_classes != ens.n_classes)
        throw std::runtime_error(
            "eval: dataset has " + std::to_string(d.n_classes) + " classes, model expects " +
            std::to_string(ens.n_classes) +
            "; class ids follow sorted label order, so the label sets must match");
    if (!ens.norm.mins.empty()) apply_normalization(d, ens.norm);

    auto [preds, predict_ms] = timed([&] { return predict_ensemble(ens, d); });
    const Scores s = score(preds, d.labels, d.n_classes);

    json report{{"command", "eval"},
                {"config", config_json(cfg)},
                {"dataset", stem_of(path)},
                {"model", cfg.model},
                {"algorithm", algo_name(ens.algorithm)},
                {"predict_ms", predict_ms},
                {"t_prime", ens.members.size()},
                {"stop_reason", ens.stop_reason}};
    report["subset_final"] =
        ens.algorithm == Algo::gadaboost_sa ? json(ens.final_subset_size) : json();
    report.update(scores_json(s, d.class_names));

    const std::string out_dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(out_dir);
    const std::string report_path =
        (std::filesystem::path(out_dir) /
         (stem_of(path) + "_eval_" + algo_name(ens.algorithm) + ".json"))
            .string();
    atomic_write_text(report_path, report.dump(2) + "\n");

    std::cout << stem_of(path) << " vs " << cfg.model << ": accuracy "
              << fmt("%.4f", s.accuracy) << "  macro_f1 " << fmt("%.4f", s.macro_f1) << "  ("
              << d.n << " rows)\n"
              << "report: " << report_path << "\n";
    return 0;
}

// ------------------------------------------------------------------ bench

struct BenchJob {
    std::size_t ds = 0;
    std::string algo;
    double noise = 0.0;
    int repeat = 0;
};

int cmd_bench(const RunConfig& cfg) {
    std::vector<Dataset> sets;
    std::vector<std::string> stems;
    std::set<std::string> seen;
    for (const auto& p : cfg.data) {
        sets.push_back(load_dataset(p, cfg.label_col));
        stems.push_back(stem_of(p));
        if (!seen.insert(stems.back()).second)
            throw std::invalid_argument("bench: duplicate dataset stem '" + stems.back() + "'");
    }
    std::string reference = cfg.reference;
    if (std::find(cfg.algos.begin(), cfg.algos.end(), reference) == cfg.algos.end())
        reference = cfg.algos[0];
    const LearnerSpec spec = learner_of(cfg);

    std::vector<BenchJob> jobs;
    for (std::size_t d = 0; d < sets.size(); ++d)
        for (const auto& a : cfg.algos)
            for (double nz : cfg.noise)
                for (int r = 0; r < cfg.repeats; ++r) jobs.push_back({d, a, nz, r});

    // One discarded warm-up per (dataset, algorithm) so the timed fits do
    // not pay first-touch costs.
    for (std::size_t d = 0; d < sets.size(); ++d)
        for (const auto& a : cfg.algos) {
            try {
                execute_run(sets[d], algo_from_name(a), spec, cfg, cfg.noise[0], cfg.split_seed,
                            cfg.noise_seed);
            } catch (const std::exception&) {
                // the matching timed run will report it
            }
        }

    std::vector<std::optional<RunRow>> results(jobs.size());
    std::vector<std::string> failures(jobs.size());
    run_pool(jobs.size(), cfg.workers, [&](std::size_t i) {
        const BenchJob& jb = jobs[i];
        try {
            RunOutcome o = execute_run(sets[jb.ds], algo_from_name(jb.algo), spec, cfg, jb.noise,
                                       cfg.split_seed + jb.repeat, cfg.noise_seed + jb.repeat);
            RunRow row;
            row.dataset = stems[jb.ds];
            row.algorithm = jb.algo;
            row.noise = jb.noise;
            row.seed = cfg.split_seed + jb.repeat;
            row.accuracy = o.scores.accuracy;
            row.macro_f1 = o.scores.macro_f1;
            row.fit_ms = o.fit_ms;
            row.t_prime = o.t_prime;
            row.subset_final = o.subset_final;
            results[i] = std::move(row);
        } catch (const std::exception& e) {
            failures[i] = "dataset=" + stems[jb.ds] + " algo=" + jb.algo + " noise=" +
                          fmt("%g", jb.noise) + " seed=" +
                          std::to_string(cfg.split_seed + jb.repeat) + ": " + e.what();
        }
    });

    std::vector<RunRow> rows;
    std::vector<std::string> failed;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (results[i])
            rows.push_back(*results[i]);
        else
            failed.push_back(failures[i]);
    }

    const std::string out_dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(out_dir);
    auto out_path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    std::ostringstream runs;
    runs << "dataset,algorithm,noise,seed,accuracy,macro_f1,fit_ms,Tprime,subset_final\n";
    for (const auto& r : rows)
        runs << r.dataset << ',' << r.algorithm << ',' << fmt("%g", r.noise) << ',' << r.seed
             << ',' << fmt("%.6f", r.accuracy) << ',' << fmt("%.6f", r.macro_f1) << ','
             << fmt("%.3f", r.fit_ms) << ',' << r.t_prime << ',' << r.subset_final << '\n';
    atomic_write_text(out_path("bench_runs.csv"), runs.str());

    // Aggregates per (noise, algorithm) and overall per algorithm; the
    // overall mean accuracy fixes the presentation order everywhere.
    struct Agg {
        double acc = 0, f1 = 0, fit = 0;
        std::size_t count = 0;
    };
    std::map<std::pair<double, std::string>, Agg> by_cell;
    std::map<std::string, Agg> by_algo;
    for (const auto& r : rows) {
        auto& c = by_cell[{r.noise, r.algorithm}];
        c.acc += r.accuracy;
        c.f1 += r.macro_f1;
        c.fit += r.fit_ms;
        ++c.count;
        auto& a = by_algo[r.algorithm];
        a.acc += r.accuracy;
        ++a.count;
    }
    std::vector<std::string> algo_order = cfg.algos;
    std::stable_sort(algo_order.begin(), algo_order.end(),
                     [&](const std::string& a, const std::string& b) {
                         const Agg& x = by_algo[a];
                         const Agg& y = by_algo[b];
                         const double ma = x.count ? x.acc / x.count : 0.0;
                         const double mb = y.count ? y.acc / y.count : 0.0;
                         return ma > mb;
                     });
    std::vector<double> noise_order = cfg.noise;
    std::sort(noise_order.begin(), noise_order.end());

    std::ostringstream summary;
    summary << "noise,algorithm,mean_accuracy,mean_macro_f1,mean_fit_ms\n";
    std::cout << "bench: " << rows.size() << " of " << jobs.size() << " runs\n";
    for (double nz : noise_order) {
        std::vector<std::string> cell_order = algo_order;
        std::stable_sort(cell_order.begin(), cell_order.end(),
                         [&](const std::string& a, const std::string& b) {
                             const Agg& x = by_cell[{nz, a}];
                             const Agg& y = by_cell[{nz, b}];
                             const double ma = x.count ? x.acc / x.count : 0.0;
                             const double mb = y.count ? y.acc / y.count : 0.0;
                             return ma > mb;
                         });
        for (const auto& a : cell_order) {
            const Agg& c = by_cell[{nz, a}];
            if (!c.count) continue;
            const double n = static_cast<double>(c.count);
            summary << fmt("%g", nz) << ',' << a << ',' << fmt("%.6f", c.acc / n) << ','
                    << fmt("%.6f", c.f1 / n) << ',' << fmt("%.3f", c.fit / n) << '\n';
            std::cout << "  noise " << fmt("%-5g", nz) << " " << a << ": accuracy "
                      << fmt("%.4f", c.acc / n) << "  macro_f1 " << fmt("%.4f", c.f1 / n)
                      << "  fit " << fmt("%.1f", c.fit / n) << " ms\n";
        }
    }
    atomic_write_text(out_path("bench_summary.csv"), summary.str());

    std::ostringstream plot;
    plot << "noise,algorithm,mean_accuracy\n";
    for (const auto& a : algo_order)
        for (double nz : noise_order) {
            const Agg& c = by_cell[{nz, a}];
            if (!c.count) continue;
            plot << fmt("%g", nz) << ',' << a << ','
                 << fmt("%.6f", c.acc / static_cast<double>(c.count)) << '\n';
        }
    atomic_write_text(out_path("bench_plot.csv"), plot.str());

    bool compared = false;
    if (failed.empty() && cfg.algos.size() >= 2) {
        const std::vector<CompareRow> table = compare(rows, reference);
        std::ostringstream cmp;
        cmp << "noise,rival,metric,win,loss,tie\n";
        for (double nz : noise_order)
            for (const auto& a : algo_order) {
                if (a == reference) continue;
                for (const char* metric : {"accuracy", "macro_f1"})
                    for (const auto& c : table)
                        if (c.noise == nz && c.rival == a && c.metric == metric)
                            cmp << fmt("%g", nz) << ',' << a << ',' << metric << ',' << c.win
                                << ',' << c.loss << ',' << c.tie << '\n';
            }
        atomic_write_text(out_path("bench_compare.csv"), cmp.str());
        compared = true;
        std::cout << "compare (reference " << reference << "): " << out_path("bench_compare.csv")
                  << "\n";
    } else if (!failed.empty()) {
        std::cerr << "bench: comparison skipped, " << failed.size() << " run(s) failed\n";
    }

    json report{{"command", "bench"},
                {"config", config_json(cfg)},
                {"datasets", stems},
                {"reference", reference},
                {"runs", rows.size()},
                {"failures", failed},
                {"files",
                 json::array({"bench_runs.csv", "bench_summary.csv", "bench_plot.csv"})}};
    if (compared) report["files"].push_back("bench_compare.csv");
    atomic_write_text(out_path("bench_report.json"), report.dump(2) + "\n");

    for (const auto& f : failed) std::cerr << "bench: failed " << f << "\n";
    std::cout << "tables in " << out_dir << "\n";
    return failed.empty() ? 0 : 1;
}

}  // namespace

// ------------------------------------------------------------- config file

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("config " + path + ":" + std::to_string(line_no) + ": " +
                                    what);
    };
    auto to_long = [&](const std::string& v) {
        try {
            std::size_t used = 0;
            long x = std::stol(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            fail("expected an integer, got '" + v + "'");
            return 0L;
        }
    };
    auto to_double = [&](const std::string& v) {
        try {
            std::size_t used = 0;
            double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            fail("expected a number, got '" + v + "'");
            return 0.0;
        }
    };
    auto to_bool = [&](const std::string& v) {
        if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
        if (v == "0" || v == "false" || v == "off" || v == "no") return false;
        fail("expected a boolean, got '" + v + "'");
        return false;
    };
    while (std::getline(f, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) fail("expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key == "data") {
            cfg.data = split_list(val);
        } else if (key == "label-col") {
            cfg.label_col = val;
        } else if (key == "model") {
            cfg.model = val;
        } else if (key == "algo") {
            cfg.algos = split_list(val);
        } else if (key == "depth") {
            cfg.depth = static_cast<int>(to_long(val));
        } else if (key == "min-leaf") {
            cfg.min_leaf = static_cast<std::size_t>(to_long(val));
        } else if (key == "iters") {
            cfg.iters = static_cast<int>(to_long(val));
        } else if (key == "k") {
            cfg.k = static_cast<std::size_t>(to_long(val));
        } else if (key == "noise") {
            cfg.noise.clear();
            for (const auto& item : split_list(val)) cfg.noise.push_back(to_double(item));
        } else if (key == "noise-seed") {
            cfg.noise_seed = static_cast<std::uint64_t>(to_long(val));
        } else if (key == "split") {
            cfg.split = to_double(val);
        } else if (key == "split-seed") {
            cfg.split_seed = static_cast<std::uint64_t>(to_long(val));
        } else if (key == "repeats") {
            cfg.repeats = static_cast<int>(to_long(val));
        } else if (key == "normalize") {
            cfg.normalize = to_bool(val);
        } else if (key == "out") {
            cfg.out = val;
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(to_long(val));
        } else if (key == "dump") {
            cfg.dump = to_bool(val);
        } else if (key == "sweep") {
            cfg.sweep = to_bool(val);
        } else if (key == "reference") {
            cfg.reference = val;
        } else {
            fail("unknown key '" + key + "'");
        }
    }
}

std::string resolve_out_dir(const RunConfig& cfg) {
    if (!cfg.out.empty()) return cfg.out;
    if (const char* env = std::getenv("GBBOOST_OUT"); env && *env) return env;
    return ".";
}

// ---------------------------------------------------------------- run_cli

namespace {

void validate_common(const RunConfig& cfg) {
    if (cfg.data.empty()) throw std::invalid_argument("--data is required");
    if (cfg.depth < 1) throw std::invalid_argument("--depth must be >= 1");
    if (cfg.min_leaf < 1) throw std::invalid_argument("--min-leaf must be >= 1");
    if (cfg.iters < 1) throw std::invalid_argument("--iters must be >= 1");
    if (cfg.k < 1) throw std::invalid_argument("--k must be >= 1");
    if (!(cfg.split > 0.0 && cfg.split < 1.0))
        throw std::invalid_argument("--split must be in (0,1)");
    if (cfg.repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
    if (cfg.workers < 1) throw std::invalid_argument("--workers must be >= 1");
    for (double nz : cfg.noise)
        if (!(nz >= 0.0 && nz <= 1.0))
            throw std::invalid_argument("--noise rates must be in [0,1]");
    for (const auto& a : cfg.algos) algo_from_name(a);  // throws on unknown names
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    RunConfig cfg;

    // --config is applied before flag parsing so flags override it.
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config" && i + 1 < argc)
                apply_config_file(cfg, argv[i + 1]);
            else if (arg.rfind("--config=", 0) == 0)
                apply_config_file(cfg, arg.substr(9));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"granular-ball multiclass boosting toolkit"};
    app.require_subcommand(1);

    enum class Cmd { none, noisify, granulate, train, eval, bench };
    Cmd which = Cmd::none;
    std::string config_path, data_single, model, reference;
    std::vector<std::string> data_multi, algos;
    std::vector<double> noise;
    bool no_norm = false;

    auto add_common = [&](CLI::App* s, bool multi_data) {
        s->add_option("--config", config_path, "key=value defaults, applied before flags");
        s->add_option("--label-col", cfg.label_col,
                      "label column: name or 0-based index (default: last)");
        s->add_option("--out", cfg.out, "output directory (default: $GBBOOST_OUT or .)");
        if (multi_data)
            s->add_option("--data", data_multi, "input dataset(s)")->delimiter(',');
        else
            s->add_option("--data", data_single, "input dataset");
    };
    auto add_learner = [&](CLI::App* s) {
        s->add_option("--algo", algos, "gsa | samme | rob_samme")->delimiter(',');
        s->add_option("--depth", cfg.depth, "tree depth cap");
        s->add_option("--min-leaf", cfg.min_leaf, "minimum rows per leaf");
        s->add_option("--iters", cfg.iters, "boosting iteration cap T");
        s->add_option("--k", cfg.k, "rob_samme neighbourhood size");
        s->add_option("--noise", noise, "train-side label noise rate(s)")->delimiter(',');
        s->add_option("--noise-seed", cfg.noise_seed, "label noise seed");
        s->add_option("--split", cfg.split, "test fraction");
        s->add_option("--split-seed", cfg.split_seed, "train/test split seed");
        s->add_option("--repeats", cfg.repeats, "seeded repetitions");
        s->add_flag("--no-normalize", no_norm, "skip per-feature min-max scaling");
        s->add_option("--workers", cfg.workers, "concurrent runs");
    };

    CLI::App* noisify = app.add_subcommand("noisify", "flip a fraction of labels to a file");
    add_common(noisify, false);
    noisify->add_option("--noise", noise, "flip rate(s)")->delimiter(',');
    noisify->add_option("--noise-seed", cfg.noise_seed, "flip seed");
    noisify->add_flag("--sweep", cfg.sweep, "emit the six standard rates 0.05..0.30");
    noisify->callback([&] { which = Cmd::noisify; });

    CLI::App* granulate = app.add_subcommand("granulate", "build granular balls and report");
    add_common(granulate, false);
    granulate->add_flag("--no-normalize", no_norm, "skip per-feature min-max scaling");
    granulate->add_flag("--dump", cfg.dump, "also write row->ball membership");
    granulate->callback([&] { which = Cmd::granulate; });

    CLI::App* train = app.add_subcommand("train", "fit one algorithm, save ensemble + report");
    add_common(train, false);
    add_learner(train);
    train->callback([&] { which = Cmd::train; });

    CLI::App* eval = app.add_subcommand("eval", "score a saved ensemble on a dataset");
    add_common(eval, false);
    eval->add_option("--model", model, "trained ensemble file");
    eval->callback([&] { which = Cmd::eval; });

    CLI::App* bench = app.add_subcommand("bench", "algorithms x noise x seeds sweep");
    add_common(bench, true);
    add_learner(bench);
    bench->add_option("--ref", reference, "comparison reference algorithm (default gsa)");
    bench->callback([&] { which = Cmd::bench; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (!data_single.empty()) cfg.data = {data_single};
    if (!data_multi.empty()) cfg.data = data_multi;
    if (!model.empty()) cfg.model = model;
    if (!algos.empty()) cfg.algos = algos;
    const bool noise_given = !noise.empty() || !cfg.noise.empty();
    if (!noise.empty()) cfg.noise = noise;
    if (!reference.empty()) cfg.reference = reference;
    if (no_norm) cfg.normalize = false;

    try {
        const bool is_bench = which == Cmd::bench;
        if (cfg.repeats == 0) cfg.repeats = is_bench ? 5 : 1;
        if (cfg.algos.empty())
            cfg.algos = is_bench ? std::vector<std::string>{"gsa", "samme", "rob_samme"}
                                 : std::vector<std::string>{"gsa"};
        if (cfg.noise.empty())
            cfg.noise = is_bench ? std::vector<double>{0.05, 0.10, 0.15, 0.20, 0.25, 0.30}
                                 : std::vector<double>{0.0};
        validate_common(cfg);
        switch (which) {
            case Cmd::noisify:
                if (cfg.sweep && noise_given)
                    throw std::invalid_argument("noisify: use --noise or --sweep, not both");
                return cmd_noisify(cfg);
            case Cmd::granulate:
                return cmd_granulate(cfg);
            case Cmd::train:
                return cmd_train(cfg);
            case Cmd::eval:
                return cmd_eval(cfg);
            case Cmd::bench:
                algo_from_name(cfg.reference);  // typo guard before the in-list fallback
                return cmd_bench(cfg);
            case Cmd::none:
                break;
        }
        throw std::logic_error("no subcommand dispatched");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace gbb
