#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "casc/cascade.hpp"
#include "casc/community.hpp"
#include "casc/csvio.hpp"
#include "casc/errors.hpp"
#include "casc/events.hpp"
#include "casc/features.hpp"
#include "casc/graph.hpp"
#include "casc/learn.hpp"
#include "casc/manifest.hpp"
#include "casc/synth.hpp"

namespace {

using namespace casc;

constexpr std::int64_t kTsMin = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kTsMax = std::numeric_limits<std::int64_t>::max();

struct Global {
    std::uint64_t seed = 0;
    int threads = 0;
};

int apply_threads(const Global& g) {
    if (g.threads > 0) omp_set_num_threads(g.threads);
    return g.threads > 0 ? g.threads : omp_get_max_threads();
}

bool windowed(std::int64_t s, std::int64_t e) { return s != kTsMin || e != kTsMax; }

ordered_json window_json(std::int64_t s, std::int64_t e) {
    ordered_json w;
    w["start"] = s == kTsMin ? ordered_json() : ordered_json(s);
    w["end"] = e == kTsMax ? ordered_json() : ordered_json(e);
    return w;
}

std::vector<RepostEvent> load_events(const std::string& path, double max_error_rate,
                                     std::uint64_t* total = nullptr,
                                     std::uint64_t* malformed = nullptr) {
    ParseOptions popts;
    popts.max_error_rate = max_error_rate;
    auto res = parse_events_file(path, popts);
    for (const auto& d : res.diagnostics) std::cerr << path << ": " << d << '\n';
    if (res.malformed_lines > res.diagnostics.size())
        std::cerr << path << ": " << (res.malformed_lines - res.diagnostics.size())
                  << " further malformed lines not shown\n";
    if (total) *total = res.total_lines;
    if (malformed) *malformed = res.malformed_lines;
    return std::move(res.events);
}

std::string default_manifest_path(const std::string& primary_output) {
    return primary_output + ".manifest.json";
}

void emit_manifest(const std::string& explicit_path, const std::string& primary_output,
                   const ordered_json& m) {
    write_manifest_file(explicit_path.empty() ? default_manifest_path(primary_output)
                                              : explicit_path,
                        m);
}

std::vector<std::size_t> resolved_sizes(FeatureGroup group, std::vector<std::size_t> sizes) {
    if (sizes.empty())
        sizes = group == FeatureGroup::A ? std::vector<std::size_t>{30, 50}
                                         : std::vector<std::size_t>{50};
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    return sizes;
}

ordered_json hyper_json(const ForestHyper& hp) {
    ordered_json j;
    j["trees"] = hp.n_trees;
    j["max_depth"] = hp.max_depth;
    j["min_leaf"] = hp.min_leaf;
    j["features_per_split"] = hp.features_per_split;
    return j;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string input, output, manifest;
    std::int64_t wstart = kTsMin, wend = kTsMax;
    double max_error_rate = 0.01;
};

void run_ingest(const Global& g, const IngestArgs& a) {
    const int threads = apply_threads(g);
    std::uint64_t total = 0, malformed = 0;
    auto events = load_events(a.input, a.max_error_rate, &total, &malformed);
    const std::uint64_t parsed = events.size();
    if (windowed(a.wstart, a.wend)) events = filter_window(events, {a.wstart, a.wend});
    serialize_events_file(a.output, events);

    ordered_json m = manifest_skeleton("ingest", g.seed, threads);
    m["config"]["input"] = a.input;
    m["config"]["output"] = a.output;
    m["config"]["window"] = window_json(a.wstart, a.wend);
    m["config"]["max_error_rate"] = a.max_error_rate;
    m["stats"]["total_lines"] = total;
    m["stats"]["malformed_lines"] = malformed;
    m["stats"]["events_parsed"] = parsed;
    m["stats"]["events_kept"] = events.size();
    manifest_add_file(m, "inputs", a.input);
    manifest_add_file(m, "outputs", a.output);
    emit_manifest(a.manifest, a.output, m);
}

// ---- graph build / stats ---------------------------------------------------

struct GraphBuildArgs {
    std::string input, output, manifest;
    EdgeSource source = EdgeSource::parent;
    std::int64_t wstart = kTsMin, wend = kTsMax;
    bool allow_rootless = false;
    double max_error_rate = 0.01;
};

void run_graph_build(const Global& g, const GraphBuildArgs& a) {
    const int threads = apply_threads(g);
    auto events = load_events(a.input, a.max_error_rate);
    if (windowed(a.wstart, a.wend)) events = filter_window(events, {a.wstart, a.wend});
    GroupOptions gopts;
    gopts.allow_rootless = a.allow_rootless;
    auto grouped = group_cascades(events, gopts);
    BuildGraphStats bstats;
    auto graph = build_graph(grouped.groups, a.source, &bstats);
    save_graph(graph, a.output);

    ordered_json m = manifest_skeleton("graph build", g.seed, threads);
    m["config"]["input"] = a.input;
    m["config"]["output"] = a.output;
    m["config"]["edge_source"] = a.source == EdgeSource::parent ? "parent" : "root";
    m["config"]["window"] = window_json(a.wstart, a.wend);
    m["config"]["allow_rootless"] = a.allow_rootless;
    m["config"]["max_error_rate"] = a.max_error_rate;
    m["stats"]["events"] = events.size();
    m["stats"]["cascades"] = grouped.groups.size();
    m["stats"]["rootless_excluded"] = grouped.stats.rootless_excluded;
    m["stats"]["duplicate_adopters_dropped"] = grouped.stats.duplicate_adopters_dropped;
    m["stats"]["pre_root_dropped"] = grouped.stats.pre_root_dropped;
    m["stats"]["edges_resolved"] = bstats.edges_resolved;
    m["stats"]["self_loops_dropped"] = bstats.self_loops_dropped;
    m["stats"]["unresolved_reposts"] = bstats.unresolved_reposts;
    m["stats"]["nodes"] = graph.node_count();
    m["stats"]["edges"] = graph.edge_count();
    manifest_add_file(m, "inputs", a.input);
    manifest_add_file(m, "outputs", a.output);
    emit_manifest(a.manifest, a.output, m);
}

struct GraphStatsArgs {
    std::string graph, output, hist, manifest;
};

void run_graph_stats(const Global& g, const GraphStatsArgs& a) {
    const int threads = apply_threads(g);
    auto graph = load_graph(a.graph);
    auto report = graph_stats(graph);
    write_stats_report_file(a.output, report);
    if (!a.hist.empty()) write_degree_hist_csv_file(a.hist, report);

    ordered_json m = manifest_skeleton("graph stats", g.seed, threads);
    m["config"]["graph"] = a.graph;
    m["config"]["output"] = a.output;
    m["config"]["hist"] = a.hist;
    m["stats"]["nodes"] = report.nodes;
    m["stats"]["edges"] = report.edges;
    m["stats"]["wcc_count"] = report.wcc_count;
    m["stats"]["avg_clustering"] = report.avg_clustering;
    m["stats"]["avg_clustering_all_nodes"] = report.avg_clustering_all_nodes;
    manifest_add_file(m, "inputs", a.graph);
    manifest_add_file(m, "outputs", a.output);
    if (!a.hist.empty()) manifest_add_file(m, "outputs", a.hist);
    emit_manifest(a.manifest, a.output, m);
}

// ---- communities detect -----------------------------------------------------

struct DetectArgs {
    std::string graph, output, manifest;
    double resolution = 1.0;
    std::uint32_t max_passes = 32;
};

void run_detect(const Global& g, const DetectArgs& a) {
    const int threads = apply_threads(g);
    auto graph = load_graph(a.graph);
    LouvainOptions lopts;
    lopts.seed = g.seed;
    lopts.resolution = a.resolution;
    lopts.max_passes = a.max_passes;
    auto part = louvain(graph, lopts);
    save_partition(part, graph, a.output);

    ordered_json m = manifest_skeleton("communities detect", g.seed, threads);
    m["config"]["graph"] = a.graph;
    m["config"]["output"] = a.output;
    m["config"]["resolution"] = a.resolution;
    m["config"]["max_passes"] = a.max_passes;
    m["stats"]["communities"] = part.k;
    m["stats"]["modularity"] = part.modularity;
    m["stats"]["pass_q"] = part.pass_q;
    manifest_add_file(m, "inputs", a.graph);
    manifest_add_file(m, "outputs", a.output);
    emit_manifest(a.manifest, a.output, m);
}

// ---- features extract / report ----------------------------------------------

struct FeatureIoArgs {
    std::string events, graph, partition, output, manifest;
    std::vector<std::size_t> sizes;
    std::int64_t lambda = 1800;
    LambdaMode mode = LambdaMode::recency;
    std::uint64_t th = 500;
    std::int64_t wstart = kTsMin, wend = kTsMax;
    bool allow_rootless = false;
    double max_error_rate = 0.01;
};

struct ExtractArgs : FeatureIoArgs {
    FeatureGroup group = FeatureGroup::A;
    std::string dump;
    bool dump_members = false;
};

struct LoadedCorpus {
    std::vector<RepostEvent> events;
    GroupResult grouped;
    InfluenceGraph graph;
    CommunityPartition partition;
};

LoadedCorpus load_corpus(const FeatureIoArgs& a) {
    LoadedCorpus c{.events = {}, .grouped = {}, .graph = load_graph(a.graph), .partition = {}};
    c.partition = load_partition(a.partition, c.graph);
    c.events = load_events(a.events, a.max_error_rate);
    if (windowed(a.wstart, a.wend)) c.events = filter_window(c.events, {a.wstart, a.wend});
    GroupOptions gopts;
    gopts.allow_rootless = a.allow_rootless;
    c.grouped = group_cascades(c.events, gopts);
    return c;
}

void fill_feature_config(ordered_json& m, const FeatureIoArgs& a,
                         std::span<const std::size_t> sizes) {
    m["config"]["events"] = a.events;
    m["config"]["graph"] = a.graph;
    m["config"]["partition"] = a.partition;
    m["config"]["output"] = a.output;
    m["config"]["sizes"] = std::vector<std::size_t>(sizes.begin(), sizes.end());
    m["config"]["lambda"] = a.lambda;
    m["config"]["lambda_mode"] = a.mode == LambdaMode::recency ? "recency" : "absolute";
    m["config"]["viral_threshold"] = a.th;
    m["config"]["window"] = window_json(a.wstart, a.wend);
    m["config"]["allow_rootless"] = a.allow_rootless;
    m["config"]["max_error_rate"] = a.max_error_rate;
}

void dump_snapshots(const std::string& path, bool members, const LoadedCorpus& c,
                    std::span<const std::size_t> sizes, const SnapshotOptions& sopts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << "mid,m,adopters,frontier,lambda_frontier,lambda_nonadopter";
    if (members) out << ",adopter_uids,lambda_frontier_uids,lambda_nonadopter_uids";
    out << '\n';
    SnapshotScratch scratch;
    auto joined = [&](std::span<const NodeId> nodes) {
        std::string s;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (i) s.push_back(';');
            s += c.graph.uid_of(nodes[i]);
        }
        return csv_field(s);
    };
    for (const auto& group : c.grouped.groups) {
        Cascade casc = build_cascade(group, c.graph, true);
        for (const auto& s : snapshot_series(casc, c.graph, sizes, sopts, &scratch)) {
            out << csv_field(s.mid) << ',' << s.m << ',' << s.adopters.size() << ','
                << s.lambda_frontiers.size() + s.lambda_nonadopters.size() << ','
                << s.lambda_frontiers.size() << ',' << s.lambda_nonadopters.size();
            if (members)
                out << ',' << joined(s.adopters) << ',' << joined(s.lambda_frontiers) << ','
                    << joined(s.lambda_nonadopters);
            out << '\n';
        }
    }
    out.flush();
    if (!out) throw io_error("write failed: " + path);
}

void run_extract(const Global& g, const ExtractArgs& a) {
    const int threads = apply_threads(g);
    auto corpus = load_corpus(a);
    ExtractOptions opts;
    opts.group = a.group;
    opts.sizes = resolved_sizes(a.group, a.sizes);
    opts.snapshot.lambda = a.lambda;
    opts.snapshot.mode = a.mode;
    auto fm = extract_features(corpus.grouped.groups, corpus.graph, corpus.partition, opts);
    write_features_csv_file(a.output, fm, a.th);
    if (!a.dump.empty()) dump_snapshots(a.dump, a.dump_members, corpus, opts.sizes, opts.snapshot);

    ordered_json m = manifest_skeleton("features extract", g.seed, threads);
    fill_feature_config(m, a, opts.sizes);
    m["config"]["group"] = a.group == FeatureGroup::A ? "A" : "C";
    m["config"]["snapshot_dump"] = a.dump;
    m["config"]["dump_members"] = a.dump_members;
    m["stats"]["cascades"] = corpus.grouped.groups.size();
    m["stats"]["rows"] = fm.rows();
    m["stats"]["columns"] = fm.names.size();
    m["stats"]["excluded_cascades"] = fm.excluded_cascades;
    manifest_add_file(m, "inputs", a.events);
    manifest_add_file(m, "inputs", a.graph);
    manifest_add_file(m, "inputs", a.partition);
    manifest_add_file(m, "outputs", a.output);
    if (!a.dump.empty()) manifest_add_file(m, "outputs", a.dump);
    emit_manifest(a.manifest, a.output, m);
}

void run_report(const Global& g, const FeatureIoArgs& a) {
    const int threads = apply_threads(g);
    auto corpus = load_corpus(a);
    std::vector<std::size_t> sizes = a.sizes;
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    SnapshotOptions sopts;
    sopts.lambda = a.lambda;
    sopts.mode = a.mode;
    auto rows =
        measurement_report(corpus.grouped.groups, corpus.graph, corpus.partition, sizes, sopts, a.th);
    write_report_csv_file(a.output, rows);

    ordered_json m = manifest_skeleton("features report", g.seed, threads);
    fill_feature_config(m, a, sizes);
    m["stats"]["cascades"] = corpus.grouped.groups.size();
    m["stats"]["rows"] = rows.size();
    manifest_add_file(m, "inputs", a.events);
    manifest_add_file(m, "inputs", a.graph);
    manifest_add_file(m, "inputs", a.partition);
    manifest_add_file(m, "outputs", a.output);
    emit_manifest(a.manifest, a.output, m);
}

// ---- learn train / cv / sweep / weights --------------------------------------

struct TrainArgs {
    std::string features, output, manifest;
    std::uint64_t th = 500;
    ForestHyper hp;
};

ordered_json model_json(const ForestModel& model, std::span<const std::string> names,
                        std::uint64_t threshold) {
    ordered_json j;
    j["kind"] = "random_forest";
    j["arity"] = model.arity;
    j["seed"] = model.seed;
    j["viral_threshold"] = threshold;
    j["hyper"] = hyper_json(model.hp);
    j["feature_names"] = std::vector<std::string>(names.begin(), names.end());
    ordered_json trees = ordered_json::array();
    for (const auto& tree : model.trees) {
        ordered_json nodes = ordered_json::array();
        for (const auto& n : tree)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.n_nonviral, n.n_viral});
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

void run_train(const Global& g, const TrainArgs& a) {
    const int threads = apply_threads(g);
    auto fm = read_features_csv_file(a.features);
    auto ds = label_dataset(fm, a.th);
    auto model = train_forest(ds.values, ds.labels, ds.cols(), a.hp, g.seed);
    write_manifest_file(a.output, model_json(model, ds.names, a.th));

    auto pred = predict(model, ds.values);
    std::uint64_t correct = 0, pos = 0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        correct += pred.labels[i] == ds.labels[i];
        pos += ds.labels[i];
    }

    ordered_json m = manifest_skeleton("learn train", g.seed, threads);
    m["config"]["features"] = a.features;
    m["config"]["output"] = a.output;
    m["config"]["viral_threshold"] = a.th;
    m["config"]["hyper"] = hyper_json(a.hp);
    m["stats"]["rows"] = ds.rows();
    m["stats"]["viral_rows"] = pos;
    m["stats"]["train_accuracy"] = ds.rows() ? double(correct) / double(ds.rows()) : 0.0;
    manifest_add_file(m, "inputs", a.features);
    manifest_add_file(m, "outputs", a.output);
    emit_manifest(a.manifest, a.output, m);
}

struct CvArgs {
    std::string features, output, manifest;
    std::vector<std::uint64_t> th_tr{500}, th_ts{500};
    std::size_t folds = 10, repeats = 10, smote_k = 5;
    ForestHyper hp;
};

void fill_cv_config(ordered_json& m, const CvArgs& a) {
    m["config"]["features"] = a.features;
    m["config"]["output"] = a.output;
    m["config"]["th_tr"] = a.th_tr;
    m["config"]["th_ts"] = a.th_ts;
    m["config"]["folds"] = a.folds;
    m["config"]["repeats"] = a.repeats;
    m["config"]["smote_k"] = a.smote_k;
    m["config"]["hyper"] = hyper_json(a.hp);
}

CvOptions cv_options(const Global& g, const CvArgs& a) {
    CvOptions opts;
    opts.folds = a.folds;
    opts.repeats = a.repeats;
    opts.forest = a.hp;
    opts.smote_k = a.smote_k;
    opts.seed = g.seed;
    return opts;
}

void run_cv(const Global& g, const CvArgs& a) {
    const int threads = apply_threads(g);
    if (a.th_tr.size() != 1 || a.th_ts.size() != 1)
        throw param_error("learn cv takes a single th-tr and th-ts; use learn sweep for lists");
    auto fm = read_features_csv_file(a.features);
    auto report = cross_validate(fm, a.th_tr[0], a.th_ts[0], cv_options(g, a));
    write_metrics_csv_file(a.output, {&report, 1});

    ordered_json m = manifest_skeleton("learn cv", g.seed, threads);
    fill_cv_config(m, a);
    m["stats"]["rows"] = fm.rows();
    m["stats"]["precision_mean"] = report.precision_mean;
    m["stats"]["recall_mean"] = report.recall_mean;
    m["stats"]["f1_mean"] = report.f1_mean;
    manifest_add_file(m, "inputs", a.features);
    manifest_add_file(m, "outputs", a.output);
    emit_manifest(a.manifest, a.output, m);
}

void run_sweep(const Global& g, const CvArgs& a) {
    const int threads = apply_threads(g);
    auto fm = read_features_csv_file(a.features);
    auto rows = sweep_thresholds(fm, a.th_tr, a.th_ts, cv_options(g, a));
    std::vector<MetricsReport> ok;
    ordered_json failures = ordered_json::array();
    for (const auto& row : rows) {
        if (row.ok) {
            ok.push_back(row.report);
        } else {
            std::cerr << "th_tr=" << row.th_tr << " th_ts=" << row.th_ts << ": " << row.error
                      << '\n';
            failures.push_back({{"th_tr", row.th_tr}, {"th_ts", row.th_ts}, {"error", row.error}});
        }
    }
    if (ok.empty()) throw data_error("every sweep combination failed");
    write_metrics_csv_file(a.output, ok);

    ordered_json m = manifest_skeleton("learn sweep", g.seed, threads);
    fill_cv_config(m, a);
    m["stats"]["rows"] = fm.rows();
    m["stats"]["combinations"] = rows.size();
    m["stats"]["failed"] = failures.size();
    m["stats"]["failures"] = std::move(failures);
    manifest_add_file(m, "inputs", a.features);
    manifest_add_file(m, "outputs", a.output);
    emit_manifest(a.manifest, a.output, m);
}

struct WeightsArgs {
    std::string features, output, manifest;
    std::uint64_t th = 500;
    StabilityOptions opts;
};

void run_weights(const Global& g, const WeightsArgs& a) {
    const int threads = apply_threads(g);
    auto fm = read_features_csv_file(a.features);
    auto ds = label_dataset(fm, a.th);
    StabilityOptions opts = a.opts;
    opts.seed = g.seed;
    auto w = stability_weights(ds, opts);
    write_weights_csv_file(a.output, w);

    ordered_json m = manifest_skeleton("learn weights", g.seed, threads);
    m["config"]["features"] = a.features;
    m["config"]["output"] = a.output;
    m["config"]["viral_threshold"] = a.th;
    m["config"]["runs"] = opts.runs;
    m["config"]["subsample"] = opts.subsample;
    m["config"]["scale_low"] = opts.scale_low;
    m["config"]["l1"] = opts.l1;
    m["config"]["select_threshold"] = opts.threshold;
    m["config"]["max_iter"] = opts.max_iter;
    m["config"]["tol"] = opts.tol;
    std::size_t selected = 0;
    for (auto s : w.selected) selected += s;
    m["stats"]["rows"] = ds.rows();
    m["stats"]["discarded_runs"] = w.discarded_runs;
    m["stats"]["selected_features"] = selected;
    manifest_add_file(m, "inputs", a.features);
    manifest_add_file(m, "outputs", a.output);
    emit_manifest(a.manifest, a.output, m);
}

// ---- synth generate -----------------------------------------------------------

struct SynthArgs {
    std::string output, truth, manifest;
    SynthConfig cfg;
};

void fill_synth_config(ordered_json& m, const SynthConfig& cfg) {
    m["config"]["communities"] = cfg.communities;
    m["config"]["nodes_per_community"] = cfg.nodes_per_community;
    m["config"]["p_in"] = cfg.p_in;
    m["config"]["p_out"] = cfg.p_out;
    m["config"]["cascades"] = cfg.cascades;
    m["config"]["beta"] = cfg.beta;
    m["config"]["gamma"] = cfg.gamma;
    m["config"]["viral_fraction"] = cfg.viral_fraction;
    m["config"]["tau"] = cfg.tau;
}

void add_synth_flags(CLI::App* cmd, SynthConfig& cfg) {
    cmd->add_option("--communities", cfg.communities, "planted community count")
        ->capture_default_str();
    cmd->add_option("--nodes-per-community", cfg.nodes_per_community, "nodes per community")
        ->capture_default_str();
    cmd->add_option("--p-in", cfg.p_in, "within-community edge probability")
        ->capture_default_str();
    cmd->add_option("--p-out", cfg.p_out, "cross-community edge probability")
        ->capture_default_str();
    cmd->add_option("--cascades", cfg.cascades, "number of cascades")->capture_default_str();
    cmd->add_option("--beta", cfg.beta, "per-edge transmission probability")
        ->capture_default_str();
    cmd->add_option("--gamma", cfg.gamma,
                    "max cross-community boost for planted cascades (drawn from [1,gamma])")
        ->capture_default_str();
    cmd->add_option("--viral-fraction", cfg.viral_fraction, "fraction of planted cascades")
        ->capture_default_str();
    cmd->add_option("--tau", cfg.tau, "mean adoption delay, seconds")->capture_default_str();
}

void run_synth(const Global& g, const SynthArgs& a) {
    const int threads = apply_threads(g);
    SynthConfig cfg = a.cfg;
    cfg.seed = g.seed;
    auto sbm = gen_sbm(cfg);
    auto sim = simulate_cascades(sbm.graph, sbm.communities, cfg);
    serialize_events_file(a.output, sim.events);
    write_truth_csv_file(a.truth, sim.truth);

    ordered_json m = manifest_skeleton("synth generate", g.seed, threads);
    m["config"]["output"] = a.output;
    m["config"]["truth"] = a.truth;
    fill_synth_config(m, cfg);
    std::uint64_t planted = 0;
    for (const auto& t : sim.truth) planted += t.planted;
    m["stats"]["nodes"] = sbm.graph.node_count();
    m["stats"]["edges"] = sbm.graph.edge_count();
    m["stats"]["events"] = sim.events.size();
    m["stats"]["planted"] = planted;
    manifest_add_file(m, "outputs", a.output);
    manifest_add_file(m, "outputs", a.truth);
    emit_manifest(a.manifest, a.output, m);
}

// ---- pipeline run ---------------------------------------------------------------

struct PipelineArgs {
    std::string input, outdir;
    bool synth = false;
    SynthConfig cfg;
    double max_error_rate = 0.01;
    EdgeSource source = EdgeSource::parent;
    std::int64_t gw_start = kTsMin, gw_end = kTsMax; // graph window
    std::int64_t cw_start = kTsMin, cw_end = kTsMax; // cascade window
    bool allow_rootless = false;
    double resolution = 1.0;
    std::uint32_t max_passes = 32;
    FeatureGroup group = FeatureGroup::A;
    std::vector<std::size_t> sizes;
    std::int64_t lambda = 1800;
    LambdaMode mode = LambdaMode::recency;
    std::vector<std::size_t> report_sizes{10, 30, 50, 100, 200};
    std::uint64_t th = 500;
    std::vector<std::uint64_t> th_tr{500}, th_ts{500};
    std::size_t folds = 10, repeats = 10, smote_k = 5;
    ForestHyper hp;
    StabilityOptions stab;
};

void run_pipeline(const Global& g, const PipelineArgs& a) {
    const int threads = apply_threads(g);
    namespace fs = std::filesystem;
    fs::create_directories(a.outdir);
    auto at = [&](const char* name) { return (fs::path(a.outdir) / name).string(); };

    ordered_json m = manifest_skeleton("pipeline run", g.seed, threads);

    std::vector<RepostEvent> events;
    if (a.synth) {
        SynthConfig cfg = a.cfg;
        cfg.seed = g.seed;
        auto sbm = gen_sbm(cfg);
        auto sim = simulate_cascades(sbm.graph, sbm.communities, cfg);
        events = std::move(sim.events);
        serialize_events_file(at("events.tsv"), events);
        write_truth_csv_file(at("truth.csv"), sim.truth);
        fill_synth_config(m, cfg);
    } else {
        events = load_events(a.input, a.max_error_rate);
        manifest_add_file(m, "inputs", a.input);
    }

    m["config"]["input"] = a.synth ? at("events.tsv") : a.input;
    m["config"]["outdir"] = a.outdir;
    m["config"]["synth"] = a.synth;
    m["config"]["edge_source"] = a.source == EdgeSource::parent ? "parent" : "root";
    m["config"]["graph_window"] = window_json(a.gw_start, a.gw_end);
    m["config"]["cascade_window"] = window_json(a.cw_start, a.cw_end);
    m["config"]["allow_rootless"] = a.allow_rootless;
    m["config"]["resolution"] = a.resolution;
    m["config"]["max_passes"] = a.max_passes;
    m["config"]["group"] = a.group == FeatureGroup::A ? "A" : "C";
    const auto sizes = resolved_sizes(a.group, a.sizes);
    m["config"]["sizes"] = sizes;
    m["config"]["lambda"] = a.lambda;
    m["config"]["lambda_mode"] = a.mode == LambdaMode::recency ? "recency" : "absolute";
    auto rsizes = a.report_sizes;
    std::sort(rsizes.begin(), rsizes.end());
    rsizes.erase(std::unique(rsizes.begin(), rsizes.end()), rsizes.end());
    m["config"]["report_sizes"] = rsizes;
    m["config"]["viral_threshold"] = a.th;
    m["config"]["th_tr"] = a.th_tr;
    m["config"]["th_ts"] = a.th_ts;
    m["config"]["folds"] = a.folds;
    m["config"]["repeats"] = a.repeats;
    m["config"]["smote_k"] = a.smote_k;
    m["config"]["hyper"] = hyper_json(a.hp);
    m["config"]["stability_runs"] = a.stab.runs;
    m["config"]["stability_subsample"] = a.stab.subsample;
    m["config"]["stability_l1"] = a.stab.l1;

    GroupOptions gopts;
    gopts.allow_rootless = a.allow_rootless;

    // influence graph from the graph window
    auto graph_events = windowed(a.gw_start, a.gw_end)
                            ? filter_window(events, {a.gw_start, a.gw_end})
                            : events;
    auto graph_grouped = group_cascades(graph_events, gopts);
    BuildGraphStats bstats;
    auto graph = build_graph(graph_grouped.groups, a.source, &bstats);
    save_graph(graph, at("graph.cfg1"));
    m["stats"]["nodes"] = graph.node_count();
    m["stats"]["edges"] = graph.edge_count();

    LouvainOptions lopts;
    lopts.seed = g.seed;
    lopts.resolution = a.resolution;
    lopts.max_passes = a.max_passes;
    auto part = louvain(graph, lopts);
    save_partition(part, graph, at("partition.tsv"));
    m["stats"]["communities"] = part.k;
    m["stats"]["modularity"] = part.modularity;

    // cascades from the cascade window
    auto casc_events = windowed(a.cw_start, a.cw_end)
                           ? filter_window(events, {a.cw_start, a.cw_end})
                           : std::move(events);
    auto grouped = group_cascades(casc_events, gopts);

    ExtractOptions eopts;
    eopts.group = a.group;
    eopts.sizes = sizes;
    eopts.snapshot.lambda = a.lambda;
    eopts.snapshot.mode = a.mode;
    auto fm = extract_features(grouped.groups, graph, part, eopts);
    write_features_csv_file(at("features.csv"), fm, a.th);
    m["stats"]["feature_rows"] = fm.rows();
    m["stats"]["excluded_cascades"] = fm.excluded_cascades;

    auto report_rows =
        measurement_report(grouped.groups, graph, part, rsizes, eopts.snapshot, a.th);
    write_report_csv_file(at("report.csv"), report_rows);

    CvOptions cvo;
    cvo.folds = a.folds;
    cvo.repeats = a.repeats;
    cvo.forest = a.hp;
    cvo.smote_k = a.smote_k;
    cvo.seed = g.seed;
    if (a.th_tr.size() == 1 && a.th_ts.size() == 1) {
        auto rep = cross_validate(fm, a.th_tr[0], a.th_ts[0], cvo);
        write_metrics_csv_file(at("metrics.csv"), {&rep, 1});
        m["stats"]["precision_mean"] = rep.precision_mean;
        m["stats"]["recall_mean"] = rep.recall_mean;
        m["stats"]["f1_mean"] = rep.f1_mean;
    } else {
        auto rows = sweep_thresholds(fm, a.th_tr, a.th_ts, cvo);
        std::vector<MetricsReport> ok;
        ordered_json failures = ordered_json::array();
        for (const auto& row : rows) {
            if (row.ok) {
                ok.push_back(row.report);
            } else {
                std::cerr << "th_tr=" << row.th_tr << " th_ts=" << row.th_ts << ": " << row.error
                          << '\n';
                failures.push_back(
                    {{"th_tr", row.th_tr}, {"th_ts", row.th_ts}, {"error", row.error}});
            }
        }
        if (ok.empty()) throw data_error("every sweep combination failed");
        write_metrics_csv_file(at("metrics.csv"), ok);
        m["stats"]["sweep_failures"] = std::move(failures);
    }

    StabilityOptions sopts = a.stab;
    sopts.seed = g.seed;
    auto ds = label_dataset(fm, a.th);
    auto weights = stability_weights(ds, sopts);
    write_weights_csv_file(at("weights.csv"), weights);
    m["stats"]["discarded_stability_runs"] = weights.discarded_runs;

    if (a.synth) {
        manifest_add_file(m, "outputs", at("events.tsv"));
        manifest_add_file(m, "outputs", at("truth.csv"));
    }
    manifest_add_file(m, "outputs", at("graph.cfg1"));
    manifest_add_file(m, "outputs", at("partition.tsv"));
    manifest_add_file(m, "outputs", at("features.csv"));
    manifest_add_file(m, "outputs", at("report.csv"));
    manifest_add_file(m, "outputs", at("metrics.csv"));
    manifest_add_file(m, "outputs", at("weights.csv"));
    write_manifest_file(at("manifest.json"), m);
}

// ---- wiring ------------------------------------------------------------------

void add_window_flags(CLI::App* cmd, std::int64_t& start, std::int64_t& end) {
    cmd->add_option("--window-start", start, "keep events with ts >= this (unix seconds)");
    cmd->add_option("--window-end", end, "keep events with ts < this (unix seconds)");
}

void add_hyper_flags(CLI::App* cmd, ForestHyper& hp) {
    cmd->add_option("--trees", hp.n_trees, "forest size")->capture_default_str();
    cmd->add_option("--max-depth", hp.max_depth, "tree depth cap, 0 = unlimited")
        ->capture_default_str();
    cmd->add_option("--min-leaf", hp.min_leaf, "minimum rows per leaf")->capture_default_str();
    cmd->add_option("--features-per-split", hp.features_per_split,
                    "features sampled per split, 0 = ceil(sqrt(d))")
        ->capture_default_str();
}

void add_lambda_flags(CLI::App* cmd, std::int64_t& lambda, LambdaMode& mode) {
    cmd->add_option("--lambda", lambda, "exposure freshness horizon, seconds")
        ->capture_default_str();
    cmd->add_option("--lambda-mode", mode, "recency | absolute")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, LambdaMode>{{"recency", LambdaMode::recency},
                                              {"absolute", LambdaMode::absolute}}))
        ->default_str("recency");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cascade analytics toolkit: repost logs to influence graphs, communities,\n"
                 "structural-diversity features, and imbalanced viral prediction"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(casc::kToolName) + " " + casc::kToolVersion);
    app.set_config("--config", "", "key=value file overlaid onto the flags");

    auto g = std::make_shared<Global>();
    app.add_option("--seed", g->seed, "master seed; all randomness derives from it")
        ->capture_default_str();
    app.add_option("--threads", g->threads, "worker thread cap, 0 = library default")
        ->capture_default_str();

    const std::map<std::string, EdgeSource> edge_sources{{"parent", EdgeSource::parent},
                                                         {"root", EdgeSource::root}};
    const std::map<std::string, FeatureGroup> groups{{"A", FeatureGroup::A},
                                                     {"C", FeatureGroup::C}};

    // ingest
    {
        auto a = std::make_shared<IngestArgs>();
        auto* cmd = app.add_subcommand("ingest", "parse, window, and canonicalize an events TSV");
        cmd->add_option("--input", a->input, "events TSV")->required();
        cmd->add_option("--output", a->output, "canonical events TSV")->required();
        cmd->add_option("--manifest", a->manifest, "manifest path (default <output>.manifest.json)");
        add_window_flags(cmd, a->wstart, a->wend);
        cmd->add_option("--max-error-rate", a->max_error_rate,
                        "abort when malformed/total exceeds this")
            ->capture_default_str();
        cmd->callback([g, a] { run_ingest(*g, *a); });
    }

    // graph build | stats
    {
        auto* graph = app.add_subcommand("graph", "influence graph construction and statistics");
        graph->require_subcommand(1);

        auto b = std::make_shared<GraphBuildArgs>();
        auto* build = graph->add_subcommand("build", "build the influence graph from events");
        build->add_option("--input", b->input, "events TSV")->required();
        build->add_option("--output", b->output, "graph binary (CFG1)")->required();
        build->add_option("--manifest", b->manifest, "manifest path");
        build->add_option("--edge-source", b->source, "parent | root")
            ->transform(CLI::CheckedTransformer(edge_sources))
            ->default_str("parent");
        add_window_flags(build, b->wstart, b->wend);
        build->add_flag("--allow-rootless", b->allow_rootless,
                        "keep cascades with no original post");
        build->add_option("--max-error-rate", b->max_error_rate, "parser error budget")
            ->capture_default_str();
        build->callback([g, b] { run_graph_build(*g, *b); });

        auto s = std::make_shared<GraphStatsArgs>();
        auto* stats = graph->add_subcommand("stats", "key=value stats and degree histograms");
        stats->add_option("--graph", s->graph, "graph binary")->required();
        stats->add_option("--output", s->output, "key=value report path")->required();
        stats->add_option("--hist", s->hist, "degree histogram CSV path");
        stats->add_option("--manifest", s->manifest, "manifest path");
        stats->callback([g, s] { run_graph_stats(*g, *s); });
    }

    // communities detect
    {
        auto* communities = app.add_subcommand("communities", "community detection");
        communities->require_subcommand(1);
        auto a = std::make_shared<DetectArgs>();
        auto* detect = communities->add_subcommand("detect", "Louvain on the influence graph");
        detect->add_option("--graph", a->graph, "graph binary")->required();
        detect->add_option("--output", a->output, "partition TSV (uid<TAB>community)")->required();
        detect->add_option("--manifest", a->manifest, "manifest path");
        detect->add_option("--resolution", a->resolution, "modularity resolution")
            ->capture_default_str();
        detect->add_option("--max-passes", a->max_passes, "pass cap")->capture_default_str();
        detect->callback([g, a] { run_detect(*g, *a); });
    }

    // features extract | report
    {
        auto* features = app.add_subcommand("features", "snapshot measures and reports");
        features->require_subcommand(1);

        auto add_common = [&](CLI::App* cmd, FeatureIoArgs& a) {
            cmd->add_option("--events", a.events, "events TSV")->required();
            cmd->add_option("--graph", a.graph, "graph binary")->required();
            cmd->add_option("--partition", a.partition, "partition TSV")->required();
            cmd->add_option("--output", a.output, "output CSV")->required();
            cmd->add_option("--manifest", a.manifest, "manifest path");
            add_lambda_flags(cmd, a.lambda, a.mode);
            cmd->add_option("--th", a.th, "viral final-size threshold")->capture_default_str();
            add_window_flags(cmd, a.wstart, a.wend);
            cmd->add_flag("--allow-rootless", a.allow_rootless,
                          "keep cascades with no original post");
            cmd->add_option("--max-error-rate", a.max_error_rate, "parser error budget")
                ->capture_default_str();
        };

        auto e = std::make_shared<ExtractArgs>();
        auto* extract = features->add_subcommand("extract", "feature matrix CSV");
        add_common(extract, *e);
        extract->add_option("--group", e->group, "A | C")
            ->transform(CLI::CheckedTransformer(groups))
            ->default_str("A");
        extract->add_option("--sizes", e->sizes, "snapshot sizes (default A: 30,50; C: 50)")
            ->delimiter(',');
        extract->add_option("--snapshot-dump", e->dump, "debug CSV of per-snapshot set sizes");
        extract->add_flag("--dump-members", e->dump_members,
                          "include member uid lists in the snapshot dump");
        extract->callback([g, e] { run_extract(*g, *e); });

        auto r = std::make_shared<FeatureIoArgs>();
        r->sizes = {10, 30, 50, 100, 200};
        auto* report = features->add_subcommand("report", "per-measure quartile table CSV");
        add_common(report, *r);
        report->add_option("--sizes", r->sizes, "snapshot sizes")
            ->delimiter(',')
            ->capture_default_str();
        report->callback([g, r] { run_report(*g, *r); });
    }

    // learn train | cv | sweep | weights
    {
        auto* learn = app.add_subcommand("learn", "imbalanced viral prediction protocol");
        learn->require_subcommand(1);

        auto t = std::make_shared<TrainArgs>();
        auto* train = learn->add_subcommand("train", "fit a forest on the full feature CSV");
        train->add_option("--features", t->features, "feature CSV")->required();
        train->add_option("--output", t->output, "model JSON")->required();
        train->add_option("--manifest", t->manifest, "manifest path");
        train->add_option("--th", t->th, "viral final-size threshold")->capture_default_str();
        add_hyper_flags(train, t->hp);
        train->callback([g, t] { run_train(*g, *t); });

        auto make_cv = [&](const char* name, const char* desc) {
            auto a = std::make_shared<CvArgs>();
            auto* cmd = learn->add_subcommand(name, desc);
            cmd->add_option("--features", a->features, "feature CSV")->required();
            cmd->add_option("--output", a->output, "metrics CSV")->required();
            cmd->add_option("--manifest", a->manifest, "manifest path");
            cmd->add_option("--th-tr", a->th_tr, "training threshold(s)")
                ->delimiter(',')
                ->capture_default_str();
            cmd->add_option("--th-ts", a->th_ts, "testing threshold(s)")
                ->delimiter(',')
                ->capture_default_str();
            cmd->add_option("--folds", a->folds, "stratified folds")->capture_default_str();
            cmd->add_option("--repeats", a->repeats, "shuffled repeats")->capture_default_str();
            cmd->add_option("--smote-k", a->smote_k, "SMOTE neighbor count")
                ->capture_default_str();
            add_hyper_flags(cmd, a->hp);
            return std::pair{cmd, a};
        };
        auto [cv_cmd, cv_args] = make_cv("cv", "stratified cross-validation at one threshold pair");
        cv_cmd->callback([g, a = cv_args] { run_cv(*g, *a); });
        auto [sweep_cmd, sweep_args] = make_cv("sweep", "cross-validation over threshold lists");
        sweep_cmd->callback([g, a = sweep_args] { run_sweep(*g, *a); });

        auto w = std::make_shared<WeightsArgs>();
        auto* weights = learn->add_subcommand("weights", "stability-selection feature weights");
        weights->add_option("--features", w->features, "feature CSV")->required();
        weights->add_option("--output", w->output, "weights CSV")->required();
        weights->add_option("--manifest", w->manifest, "manifest path");
        weights->add_option("--th", w->th, "viral final-size threshold")->capture_default_str();
        weights->add_option("--runs", w->opts.runs, "randomized fits")->capture_default_str();
        weights->add_option("--subsample", w->opts.subsample, "row fraction per run")
            ->capture_default_str();
        weights->add_option("--scale-low", w->opts.scale_low, "per-feature scale lower bound")
            ->capture_default_str();
        weights->add_option("--l1", w->opts.l1, "penalty as a fraction of lambda_max")
            ->capture_default_str();
        weights->add_option("--select-threshold", w->opts.threshold, "selection cutoff")
            ->capture_default_str();
        weights->add_option("--max-iter", w->opts.max_iter, "solver iteration cap")
            ->capture_default_str();
        weights->add_option("--tol", w->opts.tol, "solver convergence tolerance")
            ->capture_default_str();
        weights->callback([g, w] { run_weights(*g, *w); });
    }

    // synth generate
    {
        auto* synth = app.add_subcommand("synth", "synthetic corpus generation");
        synth->require_subcommand(1);
        auto a = std::make_shared<SynthArgs>();
        auto* gen = synth->add_subcommand("generate", "SBM graph + planted-viral cascades");
        gen->add_option("--output", a->output, "events TSV")->required();
        gen->add_option("--truth", a->truth, "truth sidecar CSV")->required();
        gen->add_option("--manifest", a->manifest, "manifest path");
        add_synth_flags(gen, a->cfg);
        gen->callback([g, a] { run_synth(*g, *a); });
    }

    // pipeline run
    {
        auto* pipeline = app.add_subcommand("pipeline", "end-to-end flow");
        pipeline->require_subcommand(1);
        auto a = std::make_shared<PipelineArgs>();
        auto* run = pipeline->add_subcommand(
            "run", "events -> graph -> communities -> features -> metrics/weights/report");
        auto* input = run->add_option("--input", a->input, "events TSV");
        auto* synth_flag =
            run->add_flag("--synth", a->synth, "generate the corpus instead of reading one");
        input->excludes(synth_flag);
        run->add_option("--outdir", a->outdir, "output directory")->required();
        add_synth_flags(run, a->cfg);
        run->add_option("--max-error-rate", a->max_error_rate, "parser error budget")
            ->capture_default_str();
        run->add_option("--edge-source", a->source, "parent | root")
            ->transform(CLI::CheckedTransformer(edge_sources))
            ->default_str("parent");
        run->add_option("--graph-window-start", a->gw_start, "graph window start (unix seconds)");
        run->add_option("--graph-window-end", a->gw_end, "graph window end, exclusive");
        run->add_option("--cascade-window-start", a->cw_start,
                        "cascade window start (unix seconds)");
        run->add_option("--cascade-window-end", a->cw_end, "cascade window end, exclusive");
        run->add_flag("--allow-rootless", a->allow_rootless,
                      "keep cascades with no original post");
        run->add_option("--resolution", a->resolution, "modularity resolution")
            ->capture_default_str();
        run->add_option("--max-passes", a->max_passes, "Louvain pass cap")->capture_default_str();
        run->add_option("--group", a->group, "feature group, A | C")
            ->transform(CLI::CheckedTransformer(groups))
            ->default_str("A");
        run->add_option("--sizes", a->sizes, "snapshot sizes (default by group)")->delimiter(',');
        add_lambda_flags(run, a->lambda, a->mode);
        run->add_option("--report-sizes", a->report_sizes, "measurement report sizes")
            ->delimiter(',')
            ->capture_default_str();
        run->add_option("--th", a->th, "viral threshold for labels, report, weights")
            ->capture_default_str();
        run->add_option("--th-tr", a->th_tr, "training threshold(s)")
            ->delimiter(',')
            ->capture_default_str();
        run->add_option("--th-ts", a->th_ts, "testing threshold(s)")
            ->delimiter(',')
            ->capture_default_str();
        run->add_option("--folds", a->folds, "stratified folds")->capture_default_str();
        run->add_option("--repeats", a->repeats, "shuffled repeats")->capture_default_str();
        run->add_option("--smote-k", a->smote_k, "SMOTE neighbor count")->capture_default_str();
        add_hyper_flags(run, a->hp);
        run->add_option("--stability-runs", a->stab.runs, "stability-selection fits")
            ->capture_default_str();
        run->add_option("--stability-subsample", a->stab.subsample, "row fraction per fit")
            ->capture_default_str();
        run->add_option("--stability-l1", a->stab.l1, "penalty as a fraction of lambda_max")
            ->capture_default_str();
        run->callback([g, a] {
            if (!a->synth && a->input.empty())
                throw CLI::RequiredError("--input (or --synth)");
            run_pipeline(*g, *a);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const casc::error& e) {
        std::cerr << "[" << e.category() << "] " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "[internal] " << e.what() << '\n';
        return 1;
    }
    return 0;
}
