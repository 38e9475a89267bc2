#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "seglab/corruption.hpp"
#include "seglab/dataset.hpp"
#include "seglab/refurbish.hpp"
#include "seglab/trainer.hpp"

namespace seglab {

struct DatasetConfig {
    int n = 200;
    int height = 64;
    int width = 64;
    uint64_t seed = 1;
    uint64_t split_seed = 2;
    double fractions[3] = {0.8, 0.1, 0.1};
    PhantomParams phantom;
};

// One self-contained experiment description; a config file fully determines
// every report byte except wall-clock fields.
struct ExperimentConfig {
    DatasetConfig dataset;
    CorruptionSpec corruption;        // seed default 3
    TrainConfig train;                // seed default 4
    UNetDescriptor model;
    Schedule schedule;
    DetectorKind detector = DetectorKind::vog;
    PipelineKind pipeline = PipelineKind::baseline;
    VogWindow vog_window = VogWindow::last_t;
    size_t pool_cap = size_t(1) << 22;
    std::string out_dir;
    int jobs = 1;  // independent arms run concurrently when > 1; not part of the config echo
    std::vector<double> exp2_proportions = {0.125, 0.25, 0.5};
    std::vector<double> exp3_proportions = {0.0, 0.125, 0.25, 0.5};

    void validate() const;
    PipelineConfig pipeline_config() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

// Desk defaults scale the paper protocol down; this restores 500 samples and
// 100 epochs.
void apply_paper_scale(ExperimentConfig& cfg);

// Generates, splits and (optionally) corrupts the configured dataset.
Dataset build_dataset(const ExperimentConfig& cfg, bool corrupt, CorruptionOutcome* outcome = nullptr);

// Prepares an output directory. Refuses existing non-empty directories unless
// force is set.
void prepare_out_dir(const std::string& dir, bool force);

// Experiment drivers. Each writes CSV artifacts plus report.json under
// cfg.out_dir and returns the report.
nlohmann::json run_generate(const ExperimentConfig& cfg, bool force);
nlohmann::json run_train(const ExperimentConfig& cfg, bool force);
nlohmann::json run_experiment1(const ExperimentConfig& cfg, bool force);
nlohmann::json run_experiment2(const ExperimentConfig& cfg, bool force);
nlohmann::json run_experiment3(const ExperimentConfig& cfg, bool force);

// Renders a saved report.json into a short human-readable summary.
std::string render_report(const nlohmann::json& report);

}  // namespace seglab
