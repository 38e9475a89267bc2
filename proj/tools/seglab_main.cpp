#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seglab/corruption.hpp"
#include "seglab/errors.hpp"
#include "seglab/experiment.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    bool force = false;
    bool paper_scale = false;
    int jobs = 1;
    long long seed = -1;
    std::string detector;
    std::string pipeline;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_out = true) {
    cmd->add_option("--config", o.config_path, "experiment config JSON");
    if (needs_out) cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_flag("--force", o.force, "overwrite a non-empty output directory");
    cmd->add_flag("--paper-scale", o.paper_scale, "500 samples / 100 epochs instead of desk scale");
    cmd->add_option("--jobs", o.jobs, "run independent experiment arms concurrently")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "override every seed (dataset/split/corruption/train)");
    cmd->add_option("--detector", o.detector, "vog|loss")
        ->check(CLI::IsMember({"vog", "loss"}));
    cmd->add_option("--pipeline", o.pipeline, "baseline|refurb")
        ->check(CLI::IsMember({"baseline", "refurb", "refurbished"}));
}

seglab::ExperimentConfig make_config(const CommonOpts& o) {
    seglab::ExperimentConfig cfg =
        o.config_path.empty() ? seglab::ExperimentConfig{} : seglab::load_config(o.config_path);
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.paper_scale) seglab::apply_paper_scale(cfg);
    if (o.seed >= 0) {
        const auto s = static_cast<uint64_t>(o.seed);
        cfg.dataset.seed = s;
        cfg.dataset.split_seed = s + 1;
        cfg.corruption.seed = s + 2;
        cfg.train.seed = s + 3;
    }
    if (!o.detector.empty()) cfg.detector = seglab::detector_from_name(o.detector);
    if (!o.pipeline.empty()) cfg.pipeline = seglab::pipeline_from_name(o.pipeline);
    cfg.jobs = o.jobs;
    cfg.validate();
    return cfg;
}

int run_corrupt(const CommonOpts& o, const std::string& in_dir, const std::string& kind,
                const std::string& mode, double proportion, long long seed) {
    seglab::Dataset ds = seglab::read_dataset(in_dir);
    seglab::CorruptionSpec spec;
    if (!o.config_path.empty()) spec = seglab::load_config(o.config_path).corruption;
    if (!kind.empty()) spec.kind = seglab::corruption_kind_from_name(kind);
    if (!mode.empty()) spec.mode = seglab::corruption_mode_from_name(mode);
    if (proportion >= 0.0) spec.proportion = proportion;
    if (seed >= 0) spec.seed = static_cast<uint64_t>(seed);
    spec.validate();

    const auto outcome = seglab::corrupt_dataset(ds, spec);
    if (outcome.zero_sample_warning)
        std::fprintf(stderr, "warning: proportion %g rounds to zero samples\n", spec.proportion);
    seglab::prepare_out_dir(o.out_dir, o.force);
    seglab::write_dataset(ds, o.out_dir);
    std::printf("corrupted %zu samples (kind %s, mode %s)\ndigest: %s\n",
                outcome.corrupted_ids.size(), seglab::corruption_kind_name(spec.kind),
                seglab::corruption_mode_name(spec.mode), seglab::dataset_digest(ds).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"segmentation label-quality toolkit: phantom data, label corruption, "
                 "VOG-based error detection and pseudo-label refurbishment"};
    app.require_subcommand(1);

    CommonOpts gen_o, cor_o, train_o, e1_o, e2_o, e3_o;
    std::string corrupt_in, corrupt_kind, corrupt_mode, report_dir;
    double corrupt_proportion = -1.0;
    long long corrupt_seed = -1;

    auto* gen = app.add_subcommand("generate", "write a phantom dataset (PGM + manifest)");
    add_common(gen, gen_o);

    auto* cor = app.add_subcommand("corrupt", "inject label errors into a dataset on disk");
    cor->add_option("--in", corrupt_in, "input dataset directory")->required();
    cor->add_option("--kind", corrupt_kind, "incomplete|boundary|merged");
    cor->add_option("--mode", corrupt_mode, "random|systematic");
    cor->add_option("--proportion", corrupt_proportion, "fraction of train+val to corrupt");
    cor->add_option("--corruption-seed", corrupt_seed, "corruption seed");
    add_common(cor, cor_o);

    auto* tr = app.add_subcommand("train", "train one pipeline and evaluate on the test split");
    add_common(tr, train_o);

    auto* e1 = app.add_subcommand("exp1", "detector comparison across the three error types");
    add_common(e1, e1_o);
    auto* e2 = app.add_subcommand("exp2", "label Dice before/after refurbishment sweep");
    add_common(e2, e2_o);
    auto* e3 = app.add_subcommand("exp3", "baseline vs refurbished pipeline over proportions");
    add_common(e3, e3_o);

    auto* rep = app.add_subcommand("report", "print a summary of a saved report.json");
    rep->add_option("--in", report_dir, "report directory or report.json path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const json r = seglab::run_generate(make_config(gen_o), gen_o.force);
            std::printf("digest: %s\n", r["digest"].get<std::string>().c_str());
        } else if (cor->parsed()) {
            return run_corrupt(cor_o, corrupt_in, corrupt_kind, corrupt_mode, corrupt_proportion,
                               corrupt_seed);
        } else if (tr->parsed()) {
            const json r = seglab::run_train(make_config(train_o), train_o.force);
            std::fputs(seglab::render_report(r).c_str(), stdout);
        } else if (e1->parsed()) {
            const json r = seglab::run_experiment1(make_config(e1_o), e1_o.force);
            std::fputs(seglab::render_report(r).c_str(), stdout);
        } else if (e2->parsed()) {
            const json r = seglab::run_experiment2(make_config(e2_o), e2_o.force);
            std::fputs(seglab::render_report(r).c_str(), stdout);
        } else if (e3->parsed()) {
            const json r = seglab::run_experiment3(make_config(e3_o), e3_o.force);
            std::fputs(seglab::render_report(r).c_str(), stdout);
        } else if (rep->parsed()) {
            fs::path p = report_dir;
            if (fs::is_directory(p)) p /= "report.json";
            std::ifstream is(p);
            if (!is) throw seglab::DataError("cannot open report: " + p.string());
            json r;
            try {
                is >> r;
            } catch (const json::exception& e) {
                throw seglab::DataError("malformed report " + p.string() + ": " + e.what());
            }
            std::fputs(seglab::render_report(r).c_str(), stdout);
        }
    } catch (const seglab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const seglab::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 4;
    } catch (const seglab::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
