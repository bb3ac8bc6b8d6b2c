#include "blockctm/cli.hpp"

#include <cstdlib>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "blockctm/classifiers.hpp"
#include "blockctm/ctm.hpp"
#include "blockctm/error.hpp"
#include "blockctm/evaluation.hpp"
#include "blockctm/feature_io.hpp"
#include "blockctm/http_server.hpp"
#include "blockctm/image_io.hpp"
#include "blockctm/job_config.hpp"
#include "blockctm/manifest.hpp"
#include "blockctm/model.hpp"
#include "blockctm/report.hpp"
#include "blockctm/segmentation.hpp"
#include "blockctm/service.hpp"
#include "blockctm/synth.hpp"

namespace blockctm::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raw flag values; converted into a JobConfig after parsing.
struct Flags {
    std::string image, seeds, mask, manifest, model, out, model_dir, static_dir;
    double sigma_c = 0.0;
    bool with_fusion = false;
    bool train_equals_test = false;
    bool no_cache = false;
    unsigned threads = 0;
};

std::optional<fs::path> path_flag(const std::string& v) {
    if (v.empty()) return std::nullopt;
    return fs::path(v);
}

graphcut::SegmentParams segment_params(const JobConfig& c) {
    graphcut::SegmentParams p;
    p.lambda = c.lambda;
    p.sigma_c = c.sigma_c;
    p.bins = c.bins;
    p.max_rounds = c.max_rounds;
    return p;
}

/// Mask from --mask, else a segmentation of --seeds, else the whole frame.
SegMask mask_for(const JobConfig& c, const color::ChromaImage& chroma) {
    if (c.mask) return io::read_seg_mask(*c.mask);
    if (c.seeds) return graphcut::segment_iterated(chroma, io::read_seed_mask(*c.seeds), segment_params(c)).mask;
    return SegMask::full(chroma.width(), chroma.height());
}

void emit(const JobConfig& c, const std::string& text, std::ostream& out) {
    if (c.out) {
        io::write_text_file(*c.out, text);
    } else {
        out << text;
    }
}

int cmd_segment(const JobConfig& c, std::ostream& out) {
    const color::ChromaImage chroma = color::transform_image(io::read_rgb_image(*c.image));
    const graphcut::SegmentResult r =
        graphcut::segment_iterated(chroma, io::read_seed_mask(*c.seeds), segment_params(c));
    io::write_file(*c.out, io::encode_seg_mask(r.mask));
    const json sidecar{{"energy", r.mask.energy},
                       {"rounds", r.rounds},
                       {"sigma_c", r.sigma_c},
                       {"foreground", r.mask.foreground_count()},
                       {"width", r.mask.width()},
                       {"height", r.mask.height()}};
    io::write_text_file(c.out->string() + ".json", sidecar.dump() + "\n");
    out << sidecar.dump() << "\n";
    return kExitOk;
}

int cmd_extract(const JobConfig& c, std::ostream& out) {
    const int g = grid_side_for_blocks(c.schemes.front());
    std::vector<ctm::FeatureRecord> records;
    if (c.manifest) {
        const eval::DatasetManifest m = eval::load_manifest(*c.manifest);
        const int sides[] = {g};
        for (const auto& e : m.entries) {
            records.push_back({e.id, e.class_name, eval::extract_entry_features(e, sides, segment_params(c)).front()});
        }
    } else {
        const color::ChromaImage chroma = color::transform_image(io::read_rgb_image(*c.image));
        const SegMask mask = mask_for(c, chroma);
        records.push_back({c.image->filename().string(), "",
                           ctm::extract_block_features(chroma, mask, ctm::BlockScheme(g))});
    }
    if (c.out && c.out->extension() == ".ctmf") {
        io::write_file(*c.out, ctm::write_feature_binary(records));
    } else {
        emit(c, ctm::write_feature_table(records), out);
    }
    return kExitOk;
}

int cmd_train(const JobConfig& c, std::ostream& out) {
    const int g = grid_side_for_blocks(c.schemes.front());
    const eval::DatasetManifest m = eval::load_manifest(*c.manifest);
    classify::LabeledDataset data;
    data.class_names = m.class_names;
    const int sides[] = {g};
    for (const auto& e : m.entries) {
        data.features.push_back(eval::extract_entry_features(e, sides, segment_params(c)).front().values);
        data.labels.push_back(e.class_index);
    }
    classify::TrainOptions opts;
    opts.kind = classify::parse_classifier_kind(c.classifier);
    opts.k = c.k;
    opts.sigma = c.sigma;
    opts.fusion = classify::parse_fusion_rule(c.fusion);
    const classify::TrainedModel model = classify::train_model(data, g, opts);
    io::write_file(*c.out, classify::save_model(model));
    out << json{{"model", c.out->string()},
                {"classifier", c.classifier},
                {"blocks", g * g},
                {"classes", m.class_names.size()},
                {"samples", data.size()}}
               .dump()
        << "\n";
    return kExitOk;
}

int cmd_classify(const JobConfig& c, std::ostream& out) {
    const classify::TrainedModel model = classify::load_model(io::read_file(*c.model));
    const color::ChromaImage chroma = color::transform_image(io::read_rgb_image(*c.image));
    const SegMask mask = mask_for(c, chroma);
    const ctm::FeatureVector f = ctm::extract_block_features(chroma, mask, ctm::BlockScheme(model.grid_side));
    const classify::Prediction p = classify::predict(model, f.values);
    json j{{"label", p.label}, {"class", model.class_names.at(static_cast<std::size_t>(p.label))}};
    if (p.knn) j["knn"] = {{"label", p.knn->label}, {"nearest_distance", p.knn->nearest_distance}};
    if (p.pnn) j["pnn"] = {{"label", p.pnn->label}, {"log_densities", p.pnn->log_densities}};
    emit(c, j.dump() + "\n", out);
    return kExitOk;
}

int cmd_evaluate(const JobConfig& c, const Flags& f, std::ostream& out) {
    eval::ExperimentConfig x;
    x.grid_sides.clear();
    for (int b : c.schemes) x.grid_sides.push_back(grid_side_for_blocks(b));
    x.split.fractions = c.fractions;
    x.split.repetitions = c.runs;
    x.split.seed = c.seed;
    x.methods.clear();
    if (c.classifier != "knn") x.methods.push_back(eval::Method::Pnn);
    if (c.classifier != "pnn") x.methods.push_back(eval::Method::Knn);
    if (f.with_fusion) x.methods.push_back(eval::Method::Fusion);
    x.sigma.fixed = c.sigma;
    x.sigma.grid = c.sigma_grid;
    x.fusion = classify::parse_fusion_rule(c.fusion);
    x.k = c.k;
    x.train_equals_test = f.train_equals_test;
    x.cache_features = !f.no_cache;
    x.segmentation = segment_params(c);
    x.threads = f.threads;
    x.validate();
    const eval::DatasetManifest m = eval::load_manifest(*c.manifest);
    const eval::EvalReport report = eval::run_experiment(m, x);
    emit(c, eval::render_report(report, eval::parse_report_format(c.format)), out);
    return kExitOk;
}

int cmd_synth(const JobConfig& c, std::ostream& out) {
    if (c.demo) {
        const synth::SynthItem d = synth::two_tone_demo(c.size < 64 ? 64 : c.size);
        fs::create_directories(*c.out);
        io::write_rgb_png(*c.out / "two_tone.png", d.image);
        io::write_file(*c.out / "two_tone_seeds.png", io::encode_seed_mask(d.seeds));
        io::write_file(*c.out / "two_tone_truth.png", io::encode_seg_mask(d.truth));
        out << json{{"image", (*c.out / "two_tone.png").string()}}.dump() << "\n";
        return kExitOk;
    }
    synth::BlobSpec spec;
    spec.classes = c.classes;
    spec.per_class = c.per_class;
    spec.width = spec.height = c.size;
    spec.seed = c.seed;
    const fs::path manifest = synth::write_blob_dataset(*c.out, spec);
    out << json{{"manifest", manifest.string()}, {"images", spec.classes * spec.per_class}}.dump() << "\n";
    return kExitOk;
}

int cmd_serve(const JobConfig& c, std::ostream& out) {
    service::ApiHandler handler(static_cast<std::size_t>(c.session_capacity), c.model_dir);
    service::ServerOptions opts;
    opts.host = c.host;
    opts.port = c.port;
    opts.static_dir = c.static_dir;
    service::HttpServer server(handler, opts);
    const int port = server.bind();
    out << json{{"listening", c.host + ":" + std::to_string(port)}, {"models", c.model_dir.string()}}.dump()
        << std::endl;
    server.run();
    return kExitOk;
}

}  // namespace

std::string resolve_model_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("BLOCKCTM_MODEL_DIR"); env != nullptr && *env != '\0') return env;
    return "models";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Block-based color texture moment classification toolkit", "blockctm"};
    app.require_subcommand(1);
    JobConfig c;
    Flags f;

    auto seg_opts = [&](CLI::App* s) {
        s->add_option("--lambda", c.lambda, "smoothness weight");
        s->add_option("--sigma-c", f.sigma_c, "contrast scale (default: per-image mean)");
        s->add_option("--bins", c.bins, "histogram bins per channel");
        s->add_option("--max-rounds", c.max_rounds, "band expansion rounds");
    };
    auto scheme_opt = [&](CLI::App* s) {
        s->add_option("--scheme", c.schemes, "block count B in {1,4,16,64}")->delimiter(',');
    };
    auto clf_opts = [&](CLI::App* s) {
        s->add_option("--classifier", c.classifier, "knn, pnn or both");
        s->add_option("--sigma", c.sigma, "PNN kernel width");
        s->add_option("--k", c.k, "neighbors for KNN");
        s->add_option("--fusion", c.fusion, "knn-priority or majority-with-knn-tiebreak");
    };

    CLI::App* segment = app.add_subcommand("segment", "seeded graph-cut segmentation");
    segment->add_option("--image", f.image, "input image (PNG or PPM)");
    segment->add_option("--seeds", f.seeds, "seed mask PNG (0 unknown, 1 fg, 2 bg)");
    segment->add_option("--out", f.out, "output mask PNG; a .json sidecar is written next to it");
    seg_opts(segment);

    CLI::App* extract = app.add_subcommand("extract", "CTM feature extraction");
    extract->add_option("--image", f.image, "input image");
    extract->add_option("--mask", f.mask, "segmentation mask PNG");
    extract->add_option("--seeds", f.seeds, "seed mask to segment when no mask is given");
    extract->add_option("--manifest", f.manifest, "extract every manifest entry instead of one image");
    extract->add_option("--out", f.out, "feature table (.tsv) or binary (.ctmf); stdout when absent");
    scheme_opt(extract);
    seg_opts(extract);

    CLI::App* train = app.add_subcommand("train", "train a classifier from a manifest");
    train->add_option("--manifest", f.manifest, "data set manifest");
    train->add_option("--out", f.out, "model file");
    scheme_opt(train);
    clf_opts(train);
    seg_opts(train);

    CLI::App* cls = app.add_subcommand("classify", "classify one image");
    cls->add_option("--model", f.model, "model file");
    cls->add_option("--image", f.image, "input image");
    cls->add_option("--mask", f.mask, "segmentation mask PNG");
    cls->add_option("--seeds", f.seeds, "seed mask to segment when no mask is given");
    cls->add_option("--out", f.out, "result JSON; stdout when absent");
    seg_opts(cls);

    CLI::App* evaluate = app.add_subcommand("evaluate", "repeated random-split evaluation");
    evaluate->add_option("--manifest", f.manifest, "data set manifest");
    evaluate->add_option("--fractions", c.fractions, "training fractions")->delimiter(',');
    evaluate->add_option("--runs", c.runs, "repetitions per fraction");
    evaluate->add_option("--seed", c.seed, "master seed");
    evaluate->add_flag("--sigma-grid", c.sigma_grid, "pick sigma by internal validation");
    evaluate->add_flag("--with-fusion", f.with_fusion, "add a fusion column");
    evaluate->add_flag("--train-equals-test", f.train_equals_test, "diagnostic: test on the training set");
    evaluate->add_flag("--no-cache", f.no_cache, "recompute features in every run");
    evaluate->add_option("--threads", f.threads, "extraction threads (0 = all cores)");
    evaluate->add_option("--format", c.format, "table or csv");
    evaluate->add_option("--out", f.out, "report file; stdout when absent");
    scheme_opt(evaluate);
    clf_opts(evaluate);
    seg_opts(evaluate);

    CLI::App* syn = app.add_subcommand("synth", "generate a synthetic data set");
    syn->add_option("--out", f.out, "output directory");
    syn->add_option("--classes", c.classes, "class count");
    syn->add_option("--per-class", c.per_class, "images per class");
    syn->add_option("--size", c.size, "image side in pixels");
    syn->add_option("--seed", c.seed, "generator seed");
    syn->add_flag("--demo", c.demo, "write the two-tone segmentation demo instead");

    CLI::App* serve = app.add_subcommand("serve", "HTTP session API");
    serve->add_option("--host", c.host, "bind address");
    serve->add_option("--port", c.port, "port (0 = any free port)");
    serve->add_option("--capacity", c.session_capacity, "maximum live sessions");
    serve->add_option("--model-dir", f.model_dir, "directory of <name>.ctmm models");
    serve->add_option("--static", f.static_dir, "directory served under /");

    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    c.command = app.get_subcommands().front()->get_name();
    c.image = path_flag(f.image);
    c.seeds = path_flag(f.seeds);
    c.mask = path_flag(f.mask);
    c.manifest = path_flag(f.manifest);
    c.model = path_flag(f.model);
    c.out = path_flag(f.out);
    c.static_dir = path_flag(f.static_dir);
    c.model_dir = resolve_model_dir(f.model_dir);
    for (CLI::App* s : app.get_subcommands()) {
        if (s->get_option_no_throw("--sigma-c") != nullptr && s->count("--sigma-c") > 0) c.sigma_c = f.sigma_c;
    }

    try {
        c.validate();
        if (c.command == "segment") return cmd_segment(c, out);
        if (c.command == "extract") return cmd_extract(c, out);
        if (c.command == "train") return cmd_train(c, out);
        if (c.command == "classify") return cmd_classify(c, out);
        if (c.command == "evaluate") return cmd_evaluate(c, f, out);
        if (c.command == "synth") return cmd_synth(c, out);
        if (c.command == "serve") return cmd_serve(c, out);
        return kExitUsage;
    } catch (const Error& e) {
        err << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return kExitRuntime;
    }
}

}  // namespace blockctm::app
