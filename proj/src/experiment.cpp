#include "seglab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seglab/errors.hpp"
#include "seglab/metrics.hpp"
#include "seglab/parallel.hpp"
#include "seglab/phantom.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace seglab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << content;
}

json trace_log_json(const std::vector<EpochStats>& log) {
    json arr = json::array();
    for (const auto& e : log)
        arr.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_loss", e.val_loss},
                       {"train_fg_dice", e.train_fg_dice},
                       {"val_fg_dice", e.val_fg_dice}});
    return arr;
}

json detection_summary_json(const DetectionReport& r) {
    size_t n_flagged = 0;
    for (const auto& row : r.rows) n_flagged += row.flagged;
    return {{"detector", r.detector},       {"epoch", r.epoch},
            {"threshold", r.threshold},     {"accuracy", r.accuracy},
            {"sensitivity", r.sensitivity}, {"specificity", r.specificity},
            {"pooled", r.pooled},           {"pool_factor", r.pool_factor},
            {"n_flagged", n_flagged}};
}

json events_json(const std::vector<RefurbishmentEvent>& events) {
    json arr = json::array();
    for (const auto& ev : events) {
        double before = 0.0, after = 0.0;
        for (const auto& rec : ev.records) {
            before += rec.dice_before;
            after += rec.dice_after;
        }
        const double n = ev.records.empty() ? 1.0 : static_cast<double>(ev.records.size());
        json recs = json::array();
        for (const auto& rec : ev.records)
            recs.push_back({{"id", rec.id},
                            {"dice_before", rec.dice_before},
                            {"dice_after", rec.dice_after}});
        arr.push_back({{"epoch", ev.epoch},
                       {"n_refurbished", ev.records.size()},
                       {"mean_dice_before", before / n},
                       {"mean_dice_after", after / n},
                       {"records", recs}});
    }
    return arr;
}

json summary_json(const SummaryStats& s) {
    return {{"mean", s.mean}, {"stddev", s.stddev}, {"q1", s.q1},   {"median", s.median},
            {"q3", s.q3},     {"min", s.min},       {"max", s.max}};
}

json eval_json(const EvaluationResult& e) {
    return {{"n", e.ids.size()},
            {"lv", summary_json(e.per_class_summary[0])},
            {"lvm", summary_json(e.per_class_summary[1])},
            {"la", summary_json(e.per_class_summary[2])},
            {"foreground", summary_json(e.foreground_summary)}};
}

std::string detection_rows_csv(const DetectionReport& r) {
    std::ostringstream os;
    os << "id,score,flagged,truly_corrupted\n";
    for (const auto& row : r.rows)
        os << row.id << "," << fmt(row.score) << "," << (row.flagged ? 1 : 0) << ","
           << (row.truly_corrupted ? 1 : 0) << "\n";
    return os.str();
}

std::vector<const LabeledSample*> split_ptrs(const Dataset& ds, Split s) {
    std::vector<const LabeledSample*> out;
    for (const auto& smp : ds.samples)
        if (smp.split == s) out.push_back(&smp);
    return out;
}

void write_report(const std::string& out_dir, const json& report) {
    write_text(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
}

const char* vog_window_name(VogWindow w) { return w == VogWindow::last_t ? "last_t" : "literal"; }

VogWindow vog_window_from_name(const std::string& s) {
    if (s == "last_t") return VogWindow::last_t;
    if (s == "literal") return VogWindow::literal;
    throw ConfigError("unknown vog_window: " + s + " (expected last_t|literal)");
}

json arm_report(const Dataset& ds, const PipelineResult& pr) {
    json arm;
    arm["digest"] = dataset_digest(ds);
    arm["trace_log"] = trace_log_json(pr.log);
    arm["best_epoch"] = pr.best.epoch;
    arm["best_val_fg_dice"] = pr.best.val_fg_dice;
    json dets = json::array();
    for (const auto& d : pr.detections) dets.push_back(detection_summary_json(d));
    arm["detections"] = dets;
    arm["events"] = events_json(pr.events);
    arm["n_corrupted_train"] = pr.corrupted_train_ids.size();
    return arm;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (dataset.n < 10) throw ConfigError("dataset.n must be >= 10");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    schedule.validate();
    corruption.validate();
    train.validate();
    model.validate();
    for (double p : exp2_proportions)
        if (p <= 0.0 || p > 1.0) throw ConfigError("exp2 proportions must lie in (0,1]");
    for (double p : exp3_proportions)
        if (p < 0.0 || p > 1.0) throw ConfigError("exp3 proportions must lie in [0,1]");
}

PipelineConfig ExperimentConfig::pipeline_config() const {
    PipelineConfig pc;
    pc.model = model;
    pc.detector = detector;
    pc.pipeline = pipeline;
    pc.schedule = schedule;
    pc.vog_window = vog_window;
    pc.pool_cap = pool_cap;
    return pc;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        if (j.contains("dataset")) {
            const auto& d = j["dataset"];
            cfg.dataset.n = d.value("n", cfg.dataset.n);
            cfg.dataset.height = d.value("height", cfg.dataset.height);
            cfg.dataset.width = d.value("width", cfg.dataset.width);
            cfg.dataset.seed = d.value("seed", cfg.dataset.seed);
            cfg.dataset.split_seed = d.value("split_seed", cfg.dataset.split_seed);
            if (d.contains("fractions")) {
                if (!d["fractions"].is_array() || d["fractions"].size() != 3)
                    throw ConfigError("dataset.fractions must be an array of 3 numbers");
                for (int i = 0; i < 3; ++i) cfg.dataset.fractions[i] = d["fractions"][i].get<double>();
            }
            cfg.dataset.phantom.speckle_sigma =
                d.value("speckle_sigma", cfg.dataset.phantom.speckle_sigma);
        }
        if (j.contains("corruption")) {
            const auto& c = j["corruption"];
            cfg.corruption.kind =
                corruption_kind_from_name(c.value("kind", std::string("incomplete")));
            cfg.corruption.mode = corruption_mode_from_name(c.value("mode", std::string("random")));
            cfg.corruption.proportion = c.value("proportion", cfg.corruption.proportion);
            cfg.corruption.seed = c.value("seed", cfg.corruption.seed);
            cfg.corruption.removal_fraction_min =
                c.value("removal_fraction_min", cfg.corruption.removal_fraction_min);
            cfg.corruption.removal_fraction_max =
                c.value("removal_fraction_max", cfg.corruption.removal_fraction_max);
            cfg.corruption.removal_fraction_fixed =
                c.value("removal_fraction_fixed", cfg.corruption.removal_fraction_fixed);
            cfg.corruption.radius_min = c.value("radius_min", cfg.corruption.radius_min);
            cfg.corruption.radius_max = c.value("radius_max", cfg.corruption.radius_max);
            cfg.corruption.radius_fixed = c.value("radius_fixed", cfg.corruption.radius_fixed);
        }
        if (j.contains("train")) {
            const auto& t = j["train"];
            cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
            cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
            cfg.train.epochs = t.value("epochs", cfg.train.epochs);
            cfg.train.seed = t.value("seed", cfg.train.seed);
            cfg.train.adam_beta1 = t.value("adam_beta1", cfg.train.adam_beta1);
            cfg.train.adam_beta2 = t.value("adam_beta2", cfg.train.adam_beta2);
            cfg.train.adam_eps = t.value("adam_eps", cfg.train.adam_eps);
        }
        if (j.contains("model")) {
            const auto& m = j["model"];
            cfg.model.levels = m.value("levels", cfg.model.levels);
            cfg.model.base_channels = m.value("base_channels", cfg.model.base_channels);
            cfg.model.num_classes = m.value("num_classes", cfg.model.num_classes);
        }
        if (j.contains("schedule")) {
            const auto& s = j["schedule"];
            cfg.schedule.warm_up = s.value("warm_up", cfg.schedule.warm_up);
            cfg.schedule.interval = s.value("interval", cfg.schedule.interval);
            cfg.schedule.window_t = s.value("window_t", cfg.schedule.window_t);
        }
        cfg.detector = detector_from_name(j.value("detector", std::string("vog")));
        cfg.pipeline = pipeline_from_name(j.value("pipeline", std::string("baseline")));
        cfg.vog_window = vog_window_from_name(j.value("vog_window", std::string("last_t")));
        cfg.pool_cap = j.value("pool_cap", cfg.pool_cap);
        cfg.out_dir = j.value("out_dir", std::string());
        if (j.contains("exp2_proportions"))
            cfg.exp2_proportions = j["exp2_proportions"].get<std::vector<double>>();
        if (j.contains("exp3_proportions"))
            cfg.exp3_proportions = j["exp3_proportions"].get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    return {
        {"dataset",
         {{"n", cfg.dataset.n},
          {"height", cfg.dataset.height},
          {"width", cfg.dataset.width},
          {"seed", cfg.dataset.seed},
          {"split_seed", cfg.dataset.split_seed},
          {"fractions",
           {cfg.dataset.fractions[0], cfg.dataset.fractions[1], cfg.dataset.fractions[2]}},
          {"speckle_sigma", cfg.dataset.phantom.speckle_sigma}}},
        {"corruption",
         {{"kind", corruption_kind_name(cfg.corruption.kind)},
          {"mode", corruption_mode_name(cfg.corruption.mode)},
          {"proportion", cfg.corruption.proportion},
          {"seed", cfg.corruption.seed},
          {"removal_fraction_min", cfg.corruption.removal_fraction_min},
          {"removal_fraction_max", cfg.corruption.removal_fraction_max},
          {"removal_fraction_fixed", cfg.corruption.removal_fraction_fixed},
          {"radius_min", cfg.corruption.radius_min},
          {"radius_max", cfg.corruption.radius_max},
          {"radius_fixed", cfg.corruption.radius_fixed}}},
        {"train",
         {{"learning_rate", cfg.train.learning_rate},
          {"batch_size", cfg.train.batch_size},
          {"epochs", cfg.train.epochs},
          {"seed", cfg.train.seed},
          {"adam_beta1", cfg.train.adam_beta1},
          {"adam_beta2", cfg.train.adam_beta2},
          {"adam_eps", cfg.train.adam_eps}}},
        {"model",
         {{"levels", cfg.model.levels},
          {"base_channels", cfg.model.base_channels},
          {"num_classes", cfg.model.num_classes}}},
        {"schedule",
         {{"warm_up", cfg.schedule.warm_up},
          {"interval", cfg.schedule.interval},
          {"window_t", cfg.schedule.window_t}}},
        {"detector", detector_name(cfg.detector)},
        {"pipeline", pipeline_name(cfg.pipeline)},
        {"vog_window", vog_window_name(cfg.vog_window)},
        {"pool_cap", cfg.pool_cap},
        {"exp2_proportions", cfg.exp2_proportions},
        {"exp3_proportions", cfg.exp3_proportions},
    };
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void apply_paper_scale(ExperimentConfig& cfg) {
    cfg.dataset.n = 500;
    cfg.train.epochs = 100;
}

Dataset build_dataset(const ExperimentConfig& cfg, bool corrupt, CorruptionOutcome* outcome) {
    Dataset ds = generate_phantom(cfg.dataset.n, cfg.dataset.height, cfg.dataset.width,
                                  cfg.dataset.seed, cfg.dataset.phantom);
    split_dataset(ds, cfg.dataset.fractions, cfg.dataset.split_seed);
    if (corrupt && cfg.corruption.proportion > 0.0) {
        CorruptionOutcome oc = corrupt_dataset(ds, cfg.corruption);
        if (oc.zero_sample_warning)
            std::fprintf(stderr,
                         "warning: corruption proportion %g rounds to zero samples; nothing was "
                         "corrupted\n",
                         cfg.corruption.proportion);
        if (outcome) *outcome = std::move(oc);
    }
    return ds;
}

void prepare_out_dir(const std::string& dir, bool force) {
    if (dir.empty()) throw ConfigError("no output directory given (use --out or out_dir)");
    if (fs::exists(dir) && fs::is_directory(dir) && !fs::is_empty(dir) && !force)
        throw ConfigError("output directory " + dir +
                          " exists and is not empty (use --force to overwrite)");
    fs::create_directories(dir);
}

json run_generate(const ExperimentConfig& cfg, bool force) {
    Stopwatch sw;
    prepare_out_dir(cfg.out_dir, force);
    Dataset ds = build_dataset(cfg, /*corrupt=*/false);
    write_dataset(ds, cfg.out_dir);
    json report = {{"command", "generate"},
                   {"config", config_to_json(cfg)},
                   {"digest", dataset_digest(ds)},
                   {"n", ds.samples.size()}};
    report["wall_clock_seconds"] = sw.seconds();
    return report;
}

json run_train(const ExperimentConfig& cfg, bool force) {
    Stopwatch sw;
    prepare_out_dir(cfg.out_dir, force);

    CorruptionOutcome oc;
    Dataset ds = build_dataset(cfg, /*corrupt=*/true, &oc);
    const std::string digest = dataset_digest(ds);

    PipelineResult pr = run_pipeline(ds, cfg.train, cfg.pipeline_config());

    save_checkpoint(pr.best, (fs::path(cfg.out_dir) / "best.ckpt").string());
    save_checkpoint(Checkpoint{pr.final_params, cfg.train.epochs, 0.0},
                    (fs::path(cfg.out_dir) / "final.ckpt").string());

    const auto test = split_ptrs(ds, Split::test);
    const EvaluationResult ev = evaluate_model(pr.best.params, test);

    std::ostringstream csv;
    csv << "id,dice_lv,dice_lvm,dice_la,dice_fg\n";
    for (size_t i = 0; i < ev.ids.size(); ++i)
        csv << ev.ids[i] << "," << fmt(ev.per_sample[i].per_class[0]) << ","
            << fmt(ev.per_sample[i].per_class[1]) << "," << fmt(ev.per_sample[i].per_class[2])
            << "," << fmt(ev.per_sample[i].foreground_mean) << "\n";
    write_text(fs::path(cfg.out_dir) / "test_dice.csv", csv.str());

    if (!pr.detections.empty()) {
        const int headline = pr.detections.front().epoch;
        for (const auto& d : pr.detections)
            if (d.epoch == headline)
                write_text(fs::path(cfg.out_dir) / ("detection_" + d.detector + ".csv"),
                           detection_rows_csv(d));
    }
    if (!pr.events.empty()) {
        std::ostringstream lines;
        for (const auto& e : events_json(pr.events)) lines << e.dump() << "\n";
        write_text(fs::path(cfg.out_dir) / "refurbishment_events.jsonl", lines.str());
    }

    json report = {{"command", "train"},   {"config", config_to_json(cfg)},
                   {"digest", digest},     {"corrupted_ids", oc.corrupted_ids},
                   {"arm", arm_report(ds, pr)}, {"test_eval", eval_json(ev)}};
    report["wall_clock_seconds"] = sw.seconds();
    write_report(cfg.out_dir, report);
    return report;
}

json run_experiment1(const ExperimentConfig& cfg, bool force) {
    Stopwatch sw;
    prepare_out_dir(cfg.out_dir, force);

    const CorruptionKind kinds[3] = {CorruptionKind::incomplete, CorruptionKind::boundary,
                                     CorruptionKind::merged};

    struct ArmProduct {
        json arm;
        std::string table_rows, per_epoch_rows;
        std::vector<std::pair<std::string, std::string>> row_files;  // (file name, content)
    };
    std::vector<ArmProduct> products(3);

    parallel_for(
        3,
        [&](size_t ai) {
            ExperimentConfig arm_cfg = cfg;
            arm_cfg.corruption.kind = kinds[ai];
            arm_cfg.pipeline = PipelineKind::baseline;  // detection only, shared trajectory

            CorruptionOutcome oc;
            Dataset ds = build_dataset(arm_cfg, /*corrupt=*/true, &oc);
            PipelineResult pr = run_pipeline(ds, arm_cfg.train, arm_cfg.pipeline_config());
            if (pr.detections.empty())
                throw ConfigError(
                    "experiment 1 produced no detection epochs; raise train.epochs above warm_up "
                    "so at least one event epoch runs");

            const int headline = pr.detections.front().epoch;
            const std::string kname = corruption_kind_name(kinds[ai]);
            std::ostringstream table, per_epoch;
            for (const auto& d : pr.detections) {
                per_epoch << kname << "," << d.detector << "," << d.epoch << ","
                          << fmt(d.threshold) << "," << fmt(d.accuracy) << ","
                          << fmt(d.sensitivity) << "," << fmt(d.specificity) << "\n";
                if (d.epoch == headline) {
                    table << kname << "," << d.detector << "," << d.epoch << "," << fmt(d.accuracy)
                          << "," << fmt(d.sensitivity) << "," << fmt(d.specificity) << "\n";
                    products[ai].row_files.emplace_back(
                        "detection_" + kname + "_" + d.detector + ".csv", detection_rows_csv(d));
                }
            }
            ArmProduct& p = products[ai];
            p.table_rows = table.str();
            p.per_epoch_rows = per_epoch.str();
            p.arm = arm_report(ds, pr);
            p.arm["error_kind"] = kname;
            p.arm["headline_epoch"] = headline;
            p.arm["corrupted_ids"] = oc.corrupted_ids;
        },
        static_cast<unsigned>(cfg.jobs));

    std::ostringstream table, per_epoch;
    table << "error_kind,detector,epoch,accuracy,sensitivity,specificity\n";
    per_epoch << "error_kind,detector,epoch,threshold,accuracy,sensitivity,specificity\n";
    json arms = json::array();
    for (auto& p : products) {
        table << p.table_rows;
        per_epoch << p.per_epoch_rows;
        for (const auto& [name, content] : p.row_files)
            write_text(fs::path(cfg.out_dir) / name, content);
        arms.push_back(std::move(p.arm));
    }
    write_text(fs::path(cfg.out_dir) / "exp1_table.csv", table.str());
    write_text(fs::path(cfg.out_dir) / "exp1_per_epoch.csv", per_epoch.str());

    json report = {{"command", "exp1"}, {"config", config_to_json(cfg)}, {"arms", arms}};
    report["wall_clock_seconds"] = sw.seconds();
    write_report(cfg.out_dir, report);
    return report;
}

json run_experiment2(const ExperimentConfig& cfg, bool force) {
    Stopwatch sw;
    prepare_out_dir(cfg.out_dir, force);

    const CorruptionKind kinds[3] = {CorruptionKind::incomplete, CorruptionKind::boundary,
                                     CorruptionKind::merged};
    const CorruptionMode modes[2] = {CorruptionMode::random, CorruptionMode::systematic};

    struct Task {
        CorruptionMode mode;
        double proportion;
        CorruptionKind kind;
    };
    std::vector<Task> tasks;
    for (const auto mode : modes)
        for (const double prop : cfg.exp2_proportions)
            for (const auto kind : kinds) tasks.push_back({mode, prop, kind});

    struct ArmProduct {
        json arm;
        std::string table_row;
    };
    std::vector<ArmProduct> products(tasks.size());

    parallel_for(
        tasks.size(),
        [&](size_t ti) {
            const Task& task = tasks[ti];
            ExperimentConfig arm_cfg = cfg;
            arm_cfg.corruption.kind = task.kind;
            arm_cfg.corruption.mode = task.mode;
            arm_cfg.corruption.proportion = task.proportion;
            arm_cfg.pipeline = PipelineKind::refurbished;

            CorruptionOutcome oc;
            Dataset ds = build_dataset(arm_cfg, /*corrupt=*/true, &oc);

            // label quality of the corrupted train subset before any training
            std::vector<std::string> corrupted_train;
            std::vector<double> before;
            for (const auto& s : ds.samples)
                if (s.split == Split::train && s.corrupted) {
                    corrupted_train.push_back(s.id);
                    before.push_back(foreground_dice(s.mask, s.clean_mask));
                }

            PipelineResult pr = run_pipeline(ds, arm_cfg.train, arm_cfg.pipeline_config());

            std::vector<double> after;
            for (const auto& s : ds.samples)
                if (s.split == Split::train && s.corrupted)
                    after.push_back(foreground_dice(s.mask, s.clean_mask));

            const SummaryStats sb = summarize(before);
            const SummaryStats sa = summarize(after);
            std::ostringstream row;
            row << corruption_mode_name(task.mode) << "," << fmt(task.proportion) << ","
                << corruption_kind_name(task.kind) << "," << before.size() << "," << fmt(sb.mean)
                << "," << fmt(sb.stddev) << "," << fmt(sa.mean) << "," << fmt(sa.stddev) << "\n";

            ArmProduct& p = products[ti];
            p.table_row = row.str();
            p.arm = arm_report(ds, pr);
            p.arm["mode"] = corruption_mode_name(task.mode);
            p.arm["proportion"] = task.proportion;
            p.arm["error_kind"] = corruption_kind_name(task.kind);
            p.arm["corrupted_train_ids"] = corrupted_train;
            p.arm["before"] = {{"mean", sb.mean}, {"stddev", sb.stddev}};
            p.arm["after"] = {{"mean", sa.mean}, {"stddev", sa.stddev}};
        },
        static_cast<unsigned>(cfg.jobs));

    std::ostringstream table;
    table << "mode,proportion,error_kind,n_corrupted_train,before_mean,before_std,after_mean,"
             "after_std\n";
    json arms = json::array();
    for (auto& p : products) {
        table << p.table_row;
        arms.push_back(std::move(p.arm));
    }
    write_text(fs::path(cfg.out_dir) / "exp2_table.csv", table.str());

    json report = {{"command", "exp2"}, {"config", config_to_json(cfg)}, {"arms", arms}};
    report["wall_clock_seconds"] = sw.seconds();
    write_report(cfg.out_dir, report);
    return report;
}

json run_experiment3(const ExperimentConfig& cfg, bool force) {
    Stopwatch sw;
    prepare_out_dir(cfg.out_dir, force);

    struct ArmProduct {
        json arm;
        std::string box_rows, summary_rows;
    };
    std::vector<ArmProduct> products(cfg.exp3_proportions.size());
    const char* metric_names[4] = {"lv", "lvm", "la", "foreground"};

    parallel_for(
        cfg.exp3_proportions.size(),
        [&](size_t pi) {
            const double prop = cfg.exp3_proportions[pi];
            ExperimentConfig arm_cfg = cfg;
            arm_cfg.corruption.proportion = prop;

            CorruptionOutcome oc;
            Dataset base_ds = build_dataset(arm_cfg, /*corrupt=*/prop > 0.0, &oc);
            Dataset refurb_ds = base_ds;  // bit-identical corrupted data for both arms
            const std::string digest = dataset_digest(base_ds);

            arm_cfg.pipeline = PipelineKind::baseline;
            PipelineResult base_pr = run_pipeline(base_ds, arm_cfg.train, arm_cfg.pipeline_config());
            arm_cfg.pipeline = PipelineKind::refurbished;
            PipelineResult ref_pr = run_pipeline(refurb_ds, arm_cfg.train, arm_cfg.pipeline_config());

            const auto test = split_ptrs(base_ds, Split::test);
            const EvaluationResult base_ev = evaluate_model(base_pr.best.params, test);
            const EvaluationResult ref_ev = evaluate_model(ref_pr.best.params, test);

            const std::string mname = corruption_mode_name(cfg.corruption.mode);
            const std::string kname = corruption_kind_name(cfg.corruption.kind);
            std::ostringstream box, summary;
            auto box_rows = [&](const EvaluationResult& ev, const char* arm_name) {
                for (size_t i = 0; i < ev.ids.size(); ++i) {
                    const auto& d = ev.per_sample[i];
                    box << mname << "," << kname << "," << fmt(prop) << "," << arm_name << ","
                        << ev.ids[i] << "," << fmt(d.per_class[0]) << "," << fmt(d.per_class[1])
                        << "," << fmt(d.per_class[2]) << "," << fmt(d.foreground_mean) << "\n";
                }
            };
            box_rows(base_ev, "baseline");
            box_rows(ref_ev, "refurbished");

            json tests = json::array();
            for (int m = 0; m < 4; ++m) {
                std::vector<double> diffs(base_ev.ids.size()), bvals(base_ev.ids.size()),
                    rvals(base_ev.ids.size());
                for (size_t i = 0; i < base_ev.ids.size(); ++i) {
                    bvals[i] = m < 3 ? base_ev.per_sample[i].per_class[m]
                                     : base_ev.per_sample[i].foreground_mean;
                    rvals[i] = m < 3 ? ref_ev.per_sample[i].per_class[m]
                                     : ref_ev.per_sample[i].foreground_mean;
                    diffs[i] = rvals[i] - bvals[i];
                }
                const PairedTestResult w = wilcoxon_signed_rank(diffs);
                const SummaryStats sb = summarize(bvals);
                const SummaryStats sr = summarize(rvals);
                const bool star = w.significant_at_0_05 && sr.mean > sb.mean;
                summary << mname << "," << kname << "," << fmt(prop) << "," << metric_names[m]
                        << "," << fmt(sb.mean) << "," << fmt(sb.stddev) << "," << fmt(sr.mean)
                        << "," << fmt(sr.stddev) << "," << fmt(w.w_statistic) << ","
                        << w.n_effective << "," << fmt(w.p_value) << "," << (star ? 1 : 0) << "\n";
                tests.push_back({{"metric", metric_names[m]},
                                 {"baseline_mean", sb.mean},
                                 {"refurbished_mean", sr.mean},
                                 {"w", w.w_statistic},
                                 {"n_effective", w.n_effective},
                                 {"p_value", w.p_value},
                                 {"exact", w.exact},
                                 {"underpowered", w.underpowered},
                                 {"significant_improvement", star}});
            }

            ArmProduct& p = products[pi];
            p.box_rows = box.str();
            p.summary_rows = summary.str();
            p.arm["proportion"] = prop;
            p.arm["digest"] = digest;
            p.arm["corrupted_ids"] = oc.corrupted_ids;
            p.arm["baseline"] = arm_report(base_ds, base_pr);
            p.arm["baseline"]["test_eval"] = eval_json(base_ev);
            p.arm["refurbished"] = arm_report(refurb_ds, ref_pr);
            p.arm["refurbished"]["test_eval"] = eval_json(ref_ev);
            p.arm["wilcoxon"] = tests;
        },
        static_cast<unsigned>(cfg.jobs));

    std::ostringstream box, summary;
    box << "mode,error_kind,proportion,arm,id,dice_lv,dice_lvm,dice_la,dice_fg\n";
    summary << "mode,error_kind,proportion,metric,baseline_mean,baseline_std,refurbished_mean,"
               "refurbished_std,wilcoxon_w,n_effective,p_value,significant_improvement\n";
    json arms = json::array();
    for (auto& p : products) {
        box << p.box_rows;
        summary << p.summary_rows;
        arms.push_back(std::move(p.arm));
    }
    write_text(fs::path(cfg.out_dir) / "exp3_boxplot.csv", box.str());
    write_text(fs::path(cfg.out_dir) / "exp3_summary.csv", summary.str());

    json report = {{"command", "exp3"}, {"config", config_to_json(cfg)}, {"arms", arms}};
    report["wall_clock_seconds"] = sw.seconds();
    write_report(cfg.out_dir, report);
    return report;
}

std::string render_report(const json& report) {
    std::ostringstream os;
    const std::string cmd = report.value("command", std::string("?"));
    os << "command: " << cmd << "\n";
    if (report.contains("digest"))
        os << "dataset digest: " << report["digest"].get<std::string>() << "\n";
    if (report.contains("wall_clock_seconds"))
        os << "wall clock: " << fmt(report["wall_clock_seconds"].get<double>()) << " s\n";

    auto print_detections = [&](const json& arm, const std::string& prefix) {
        if (!arm.contains("detections")) return;
        for (const auto& d : arm["detections"])
            os << prefix << "epoch " << d["epoch"].get<int>() << " "
               << d["detector"].get<std::string>() << ": acc " << fmt(d["accuracy"].get<double>())
               << ", sens " << fmt(d["sensitivity"].get<double>()) << ", spec "
               << fmt(d["specificity"].get<double>()) << "\n";
    };

    if (cmd == "train" && report.contains("arm")) {
        const auto& arm = report["arm"];
        os << "best epoch: " << arm["best_epoch"].get<int>() << " (val fg Dice "
           << fmt(arm["best_val_fg_dice"].get<double>()) << ")\n";
        print_detections(arm, "  ");
        if (report.contains("test_eval"))
            os << "test foreground Dice: "
               << fmt(report["test_eval"]["foreground"]["mean"].get<double>()) << " +/- "
               << fmt(report["test_eval"]["foreground"]["stddev"].get<double>()) << "\n";
    } else if (report.contains("arms")) {
        for (const auto& arm : report["arms"]) {
            os << "arm";
            for (const char* key : {"error_kind", "mode"})
                if (arm.contains(key)) os << " " << key << "=" << arm[key].get<std::string>();
            if (arm.contains("proportion"))
                os << " proportion=" << fmt(arm["proportion"].get<double>());
            os << "\n";
            if (arm.contains("before"))
                os << "  label Dice before " << fmt(arm["before"]["mean"].get<double>())
                   << " -> after " << fmt(arm["after"]["mean"].get<double>()) << "\n";
            print_detections(arm, "  ");
            if (arm.contains("wilcoxon"))
                for (const auto& t : arm["wilcoxon"])
                    os << "  " << t["metric"].get<std::string>() << ": baseline "
                       << fmt(t["baseline_mean"].get<double>()) << " vs refurbished "
                       << fmt(t["refurbished_mean"].get<double>()) << " (p "
                       << fmt(t["p_value"].get<double>())
                       << (t["significant_improvement"].get<bool>() ? ", *" : "") << ")\n";
        }
    }
    return os.str();
}

}  // namespace seglab
