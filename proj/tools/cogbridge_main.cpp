// Command-line front door: ingest validates and canonicalizes corpus files,
// run trains the attentional bridge under cross-validation, featsel compares
// top-k feature selections, synth generates planted corpora, and report
// re-renders a run's outputs from its manifest.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cogbridge/corpus.hpp"
#include "cogbridge/harness.hpp"
#include "cogbridge/report.hpp"
#include "cogbridge/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cogbridge;

namespace {

constexpr const char* kArtifactVersion = "1.0.0";

struct CorpusPaths {
    std::string signals, annotations, common_words, connectors;
};

CorpusPaths corpus_paths(const std::string& dir) {
    CorpusPaths p;
    p.signals = (fs::path(dir) / "signals.tsv").string();
    p.annotations = (fs::path(dir) / "annotations.jsonl").string();
    p.common_words = (fs::path(dir) / "common_words.txt").string();
    p.connectors = (fs::path(dir) / "connectors.txt").string();
    return p;
}

json input_digests(const CorpusPaths& p) {
    json d;
    for (const std::string& path : {p.signals, p.annotations, p.common_words, p.connectors})
        d[fs::path(path).filename().string()] = hex64(fnv1a_file(path));
    return d;
}

void check_digests(const json& recorded, const std::string& corpus_dir) {
    const CorpusPaths p = corpus_paths(corpus_dir);
    const json now = input_digests(p);
    for (auto it = recorded.begin(); it != recorded.end(); ++it) {
        if (!now.contains(it.key()) || now[it.key()] != it.value())
            throw InputError("report: input file " + it.key() +
                             " changed since the manifest was written");
    }
}

struct RunArgs {
    std::string corpus_dir;
    std::string out_dir = "out";
    std::string task;
    std::string signal = "eye";
    std::uint64_t seed = 0;
    int folds = 5;
    int hidden = 20;
    bool no_encoder = false;
    std::string loss;  // "", "cross-entropy", "focal"
    double focal_gamma = 2.0;
    bool masking = false;
    bool mask_retrain = false;
    int jobs = 1;
};

struct FeatselArgs {
    std::string corpus_dir;
    std::string out_dir = "out";
    std::string task;
    std::string signal = "eye";
    std::uint64_t seed = 0;
    int folds = 5;
    int hidden = 20;
    std::vector<std::string> methods;
    std::vector<int> k_sweep;
    int jobs = 1;
};

struct SynthArgs {
    std::string out_dir;
    int d = 17;
    int planted = 0;
    double effect = 2.0;
    double noise = 1.0;
    int m = 600;
    int len_lo = 5;
    int len_hi = 15;
    std::string kind = "three-class";
    std::uint64_t seed = 0;
};

ExperimentConfig experiment_from(const RunArgs& a) {
    ExperimentConfig cfg;
    cfg.task = a.task;
    cfg.signal = parse_signal_type(a.signal);
    cfg.k_folds = a.folds;
    cfg.seed = a.seed;
    cfg.model = default_model_config(a.task);
    cfg.model.hidden = a.hidden;
    cfg.model.use_encoder = !a.no_encoder;
    if (a.loss == "cross-entropy")
        cfg.model.focal = false;
    else if (a.loss == "focal")
        cfg.model.focal = true;
    else if (!a.loss.empty())
        throw InputError("run: loss must be cross-entropy or focal, got '" + a.loss + "'");
    cfg.model.focal_gamma = a.focal_gamma;
    cfg.masking = a.masking;
    cfg.mask_retrain = a.mask_retrain;
    cfg.jobs = a.jobs;
    return cfg;
}

std::string run_dir_name(const std::string& task, const std::string& signal,
                         std::uint64_t seed) {
    return task + "_" + signal + "_seed" + std::to_string(seed);
}

int do_ingest(const std::string& signals, const std::string& annotations,
              const std::string& out_dir) {
    Corpus corpus = load_corpus(signals, annotations);
    fs::create_directories(out_dir);
    const CorpusPaths p = corpus_paths(out_dir);
    save_corpus(corpus, p.signals, p.annotations);

    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["command"] = "ingest";
    manifest["inputs"] = {{"signals", hex64(fnv1a_file(signals))},
                          {"annotations", hex64(fnv1a_file(annotations))}};
    manifest["archive"] = {{"signals.tsv", hex64(fnv1a_file(p.signals))},
                           {"annotations.jsonl", hex64(fnv1a_file(p.annotations))}};
    manifest["sentences"] = corpus.size();
    manifest["written"] = iso8601_now();
    write_atomic((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cerr << "ingested " << corpus.size() << " sentences -> " << out_dir << "\n";
    return 0;
}

int do_run(const RunArgs& a, const std::vector<std::string>& argv) {
    const std::string started = iso8601_now();
    const CorpusPaths p = corpus_paths(a.corpus_dir);
    Corpus corpus = load_corpus(p.signals, p.annotations);
    Resources res = load_resources(p.common_words, p.connectors);
    ExperimentConfig cfg = experiment_from(a);

    CvResult cv = run_cv(corpus, res, cfg);
    for (const FoldResult& fr : cv.folds)
        if (fr.flagged)
            std::cerr << "warning: fold " << fr.fold << " flagged (" << fr.flag_reason
                      << "), excluded from averages\n";

    const fs::path run_dir = fs::path(a.out_dir) / run_dir_name(a.task, a.signal, a.seed);
    fs::create_directories(run_dir);
    write_fold_metrics((run_dir / "fold_metrics.csv").string(), cv);
    write_per_class((run_dir / "per_class.csv").string(), cv);

    std::vector<std::string> outputs = {"fold_metrics.csv", "per_class.csv"};
    if (!cv.attention_scores.empty()) {
        const std::string grid_path =
            (fs::path(a.out_dir) / ("attention_grid_" + a.signal + ".csv")).string();
        AttentionGrid grid = load_attention_grid(grid_path, cfg.signal);
        set_grid_column(grid, a.task, cv.attention_scores);
        save_attention_grid(grid, grid_path);
    }
    if (cfg.masking) {
        MaskReport mask = mask_eval(cv, corpus);
        write_mask_curve((run_dir / "mask_curve.csv").string(), mask, cfg.signal);
        outputs.push_back("mask_curve.csv");
    }

    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["command"] = "run";
    manifest["argv"] = argv;
    manifest["corpus_dir"] = a.corpus_dir;
    manifest["out_dir"] = a.out_dir;
    manifest["seed"] = a.seed;
    manifest["config"] = {{"task", a.task},          {"signal", a.signal},
                          {"folds", a.folds},        {"hidden", a.hidden},
                          {"no_encoder", a.no_encoder},
                          {"loss", cfg.model.focal ? "focal" : "cross-entropy"},
                          {"focal_gamma", a.focal_gamma},
                          {"masking", a.masking},    {"mask_retrain", a.mask_retrain},
                          {"jobs", a.jobs}};
    manifest["inputs"] = input_digests(p);
    manifest["outputs"] = outputs;
    json fps = json::array();
    for (std::uint64_t fp : cv.fingerprints) fps.push_back(hex64(fp));
    manifest["normalization_fingerprints"] = fps;
    manifest["mean_macro_f1"] = cv.mean_f1;
    manifest["started"] = started;
    manifest["finished"] = iso8601_now();
    write_atomic((run_dir / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cerr << "task " << a.task << " (" << a.signal << "): mean macro-F1 "
              << cv.mean_f1 << " over " << cfg.k_folds << " folds -> " << run_dir.string()
              << "\n";
    return 0;
}

int do_featsel(const FeatselArgs& a, const std::vector<std::string>& argv) {
    const std::string started = iso8601_now();
    for (const std::string& m : a.methods)
        if (m != "attention" && m != "mi" && m != "rfe" && m != "rf")
            throw InputError("featsel: unknown method '" + m +
                             "' (choose from attention, mi, rfe, rf)");

    const CorpusPaths p = corpus_paths(a.corpus_dir);
    Corpus corpus = load_corpus(p.signals, p.annotations);
    Resources res = load_resources(p.common_words, p.connectors);

    ExperimentConfig cfg;
    cfg.task = a.task;
    cfg.signal = parse_signal_type(a.signal);
    cfg.k_folds = a.folds;
    cfg.seed = a.seed;
    cfg.model = default_model_config(a.task);
    cfg.model.hidden = a.hidden;
    cfg.jobs = a.jobs;
    cfg.featsel_methods = a.methods;
    const int d = SignalSchema::of(cfg.signal).d();
    cfg.k_sweep = a.k_sweep;
    if (cfg.k_sweep.empty())
        for (int k = 1; k <= d; ++k) cfg.k_sweep.push_back(k);

    std::vector<double> attention_scores;
    bool wants_attention = false;
    for (const std::string& m : a.methods) wants_attention |= m == "attention";
    const std::string grid_path =
        (fs::path(a.out_dir) / ("attention_grid_" + a.signal + ".csv")).string();
    if (wants_attention) {
        AttentionGrid grid = load_attention_grid(grid_path, cfg.signal);
        for (std::size_t t = 0; t < grid.tasks.size(); ++t)
            if (grid.tasks[t] == a.task) attention_scores = grid.columns[t];
        if (attention_scores.empty())
            throw InputError("featsel: no attention scores for task " + a.task + " in " +
                             grid_path + "; run `cogbridge run --task " + a.task +
                             " --signals " + a.signal + "` first");
    }

    FeatselGrid grid = featsel_compare(corpus, res, cfg, attention_scores);

    const fs::path run_dir =
        fs::path(a.out_dir) / ("featsel_" + run_dir_name(a.task, a.signal, a.seed));
    fs::create_directories(run_dir);
    write_featsel_grid((run_dir / "featsel_grid.csv").string(), grid);
    write_featsel_series((run_dir / "featsel_series.csv").string(), grid);

    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["command"] = "featsel";
    manifest["argv"] = argv;
    manifest["corpus_dir"] = a.corpus_dir;
    manifest["out_dir"] = a.out_dir;
    manifest["seed"] = a.seed;
    manifest["config"] = {{"task", a.task},   {"signal", a.signal}, {"folds", a.folds},
                          {"hidden", a.hidden}, {"methods", a.methods},
                          {"k_sweep", cfg.k_sweep}, {"jobs", a.jobs}};
    manifest["inputs"] = input_digests(p);
    manifest["outputs"] = {"featsel_grid.csv", "featsel_series.csv"};
    manifest["started"] = started;
    manifest["finished"] = iso8601_now();
    write_atomic((run_dir / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cerr << "featsel " << a.task << " (" << a.signal << "): " << grid.cells.size()
              << " cells -> " << run_dir.string() << "\n";
    return 0;
}

int do_synth(const SynthArgs& a, const std::vector<std::string>& argv) {
    PlantSpec spec;
    spec.d = a.d;
    spec.planted = a.planted;
    spec.effect = a.effect;
    spec.noise = a.noise;
    spec.m = a.m;
    spec.len_lo = a.len_lo;
    spec.len_hi = a.len_hi;
    spec.seed = a.seed;
    if (a.kind == "three-class")
        spec.kind = TaskKind::ThreeClass;
    else if (a.kind == "binary")
        spec.kind = TaskKind::Binary;
    else if (a.kind == "sequence")
        spec.kind = TaskKind::Sequence;
    else
        throw InputError("synth: kind must be three-class, binary, or sequence, got '" +
                         a.kind + "'");

    Corpus corpus = generate(spec);
    fs::create_directories(a.out_dir);
    const CorpusPaths p = corpus_paths(a.out_dir);
    save_corpus(corpus, p.signals, p.annotations);
    save_synth_resources(p.common_words, p.connectors);

    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["command"] = "synth";
    manifest["argv"] = argv;
    manifest["out_dir"] = a.out_dir;
    manifest["seed"] = a.seed;
    manifest["config"] = {{"d", a.d},         {"planted", a.planted}, {"effect", a.effect},
                          {"noise", a.noise}, {"m", a.m},             {"len_lo", a.len_lo},
                          {"len_hi", a.len_hi}, {"kind", a.kind}};
    manifest["outputs"] = input_digests(p);
    manifest["surrogate_task"] = surrogate_task(spec.kind);
    manifest["written"] = iso8601_now();
    write_atomic((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cerr << "synthesized " << a.m << " sentences (planted feature " << a.planted
              << ") -> " << a.out_dir << "\n";
    return 0;
}

int do_report(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw InputError(manifest_path + ": cannot read manifest");
    json manifest = json::parse(in, nullptr, /*allow_exceptions=*/true);

    const std::string command = manifest.value("command", "");
    if (command == "run") {
        RunArgs a;
        a.corpus_dir = manifest.at("corpus_dir").get<std::string>();
        a.out_dir = manifest.at("out_dir").get<std::string>();
        a.seed = manifest.at("seed").get<std::uint64_t>();
        const json& c = manifest.at("config");
        a.task = c.at("task").get<std::string>();
        a.signal = c.at("signal").get<std::string>();
        a.folds = c.at("folds").get<int>();
        a.hidden = c.at("hidden").get<int>();
        a.no_encoder = c.at("no_encoder").get<bool>();
        a.loss = c.at("loss").get<std::string>();
        a.focal_gamma = c.at("focal_gamma").get<double>();
        a.masking = c.at("masking").get<bool>();
        a.mask_retrain = c.at("mask_retrain").get<bool>();
        a.jobs = c.at("jobs").get<int>();
        check_digests(manifest.at("inputs"), a.corpus_dir);
        return do_run(a, {"report", manifest_path});
    }
    if (command == "featsel") {
        FeatselArgs a;
        a.corpus_dir = manifest.at("corpus_dir").get<std::string>();
        a.out_dir = manifest.at("out_dir").get<std::string>();
        a.seed = manifest.at("seed").get<std::uint64_t>();
        const json& c = manifest.at("config");
        a.task = c.at("task").get<std::string>();
        a.signal = c.at("signal").get<std::string>();
        a.folds = c.at("folds").get<int>();
        a.hidden = c.at("hidden").get<int>();
        a.methods = c.at("methods").get<std::vector<std::string>>();
        a.k_sweep = c.at("k_sweep").get<std::vector<int>>();
        a.jobs = c.at("jobs").get<int>();
        check_digests(manifest.at("inputs"), a.corpus_dir);
        return do_featsel(a, {"report", manifest_path});
    }
    throw InputError("report: manifest command '" + command + "' is not re-renderable");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bridge word-level cognitive signals to linguistic features"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value defaults; explicit flags win");

    std::string ingest_signals, ingest_annotations, ingest_out;
    CLI::App* ingest = app.add_subcommand("ingest", "validate and archive a corpus");
    ingest->add_option("--signals", ingest_signals, "signals TSV")->required();
    ingest->add_option("--annotations", ingest_annotations, "annotations JSONL")->required();
    ingest->add_option("--out", ingest_out, "archive directory")->required();

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "train and evaluate one task under CV");
    run->add_option("--corpus", run_args.corpus_dir, "corpus directory")->required();
    run->add_option("--out", run_args.out_dir, "output directory");
    run->add_option("--task", run_args.task, "task name")->required();
    run->add_option("--signals", run_args.signal, "eye or eeg");
    run->add_option("--seed", run_args.seed, "master seed")->required();
    run->add_option("--folds", run_args.folds, "cross-validation folds");
    run->add_option("--hidden", run_args.hidden, "LSTM hidden size");
    run->add_flag("--no-encoder", run_args.no_encoder, "bypass the Bi-LSTM encoder");
    run->add_option("--loss", run_args.loss, "cross-entropy or focal");
    run->add_option("--focal-gamma", run_args.focal_gamma, "focal loss gamma");
    run->add_flag("--masking", run_args.masking, "run the signal-masking validation");
    run->add_flag("--mask-retrain", run_args.mask_retrain,
                  "retrain per masked feature instead of frozen re-evaluation");
    run->add_option("--jobs", run_args.jobs, "concurrent fold workers");

    FeatselArgs fs_args;
    CLI::App* featsel = app.add_subcommand("featsel", "top-k feature-selection comparison");
    featsel->add_option("--corpus", fs_args.corpus_dir, "corpus directory")->required();
    featsel->add_option("--out", fs_args.out_dir, "output directory");
    featsel->add_option("--task", fs_args.task, "task name")->required();
    featsel->add_option("--signals", fs_args.signal, "eye or eeg");
    featsel->add_option("--seed", fs_args.seed, "master seed")->required();
    featsel->add_option("--folds", fs_args.folds, "cross-validation folds");
    featsel->add_option("--hidden", fs_args.hidden, "LSTM hidden size");
    featsel->add_option("--methods", fs_args.methods, "attention, mi, rfe, rf")
        ->required()
        ->delimiter(',');
    featsel->add_option("--k", fs_args.k_sweep, "k values (default 1..d)")->delimiter(',');
    featsel->add_option("--jobs", fs_args.jobs, "concurrent fold workers");

    SynthArgs sy_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a planted synthetic corpus");
    synth->add_option("--out", sy_args.out_dir, "corpus directory to write")->required();
    synth->add_option("--d", sy_args.d, "signal dimension: 17 (eye) or 8 (eeg)");
    synth->add_option("--planted", sy_args.planted, "planted feature index");
    synth->add_option("--effect", sy_args.effect, "mean shift per class, in noise units");
    synth->add_option("--noise", sy_args.noise, "signal noise std");
    synth->add_option("--m", sy_args.m, "corpus size");
    synth->add_option("--len-lo", sy_args.len_lo, "minimum sentence length");
    synth->add_option("--len-hi", sy_args.len_hi, "maximum sentence length");
    synth->add_option("--kind", sy_args.kind, "three-class, binary, or sequence");
    synth->add_option("--seed", sy_args.seed, "master seed")->required();

    std::string report_manifest;
    CLI::App* report = app.add_subcommand("report", "re-render outputs from a manifest");
    report->add_option("--manifest", report_manifest, "manifest.json of a prior run")
        ->required();

    std::vector<std::string> argv_copy(argv, argv + argc);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest) return do_ingest(ingest_signals, ingest_annotations, ingest_out);
        if (*run) return do_run(run_args, argv_copy);
        if (*featsel) return do_featsel(fs_args, argv_copy);
        if (*synth) return do_synth(sy_args, argv_copy);
        if (*report) return do_report(report_manifest);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
