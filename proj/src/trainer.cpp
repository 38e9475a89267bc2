#include "seglab/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "seglab/errors.hpp"
#include "seglab/metrics.hpp"
#include "seglab/ops.hpp"
#include "seglab/parallel.hpp"
#include "seglab/rng.hpp"

namespace seglab {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
}

const char* detector_name(DetectorKind d) { return d == DetectorKind::vog ? "vog" : "loss"; }

DetectorKind detector_from_name(const std::string& s) {
    if (s == "vog") return DetectorKind::vog;
    if (s == "loss") return DetectorKind::loss;
    throw ConfigError("unknown detector: " + s + " (expected vog|loss)");
}

const char* pipeline_name(PipelineKind p) {
    return p == PipelineKind::baseline ? "baseline" : "refurbished";
}

PipelineKind pipeline_from_name(const std::string& s) {
    if (s == "baseline") return PipelineKind::baseline;
    if (s == "refurbished" || s == "refurb") return PipelineKind::refurbished;
    throw ConfigError("unknown pipeline: " + s + " (expected baseline|refurb)");
}

namespace {

struct EvalOut {
    double loss = 0.0;
    double fg_dice = 0.0;
    Tensor logit_grad;
    Tensor probs;
};

EvalOut eval_sample(const ModelParams& params, const LabeledSample& s, bool keep_maps) {
    EvalOut out;
    const Tensor logits = unet_forward(params, s.image);
    CeResult ce = softmax_cross_entropy(logits, s.mask);
    if (!std::isfinite(ce.loss)) throw NumericError("non-finite loss for sample " + s.id);
    out.loss = ce.loss;
    out.fg_dice = foreground_dice(argmax_mask(ce.probs), s.mask);
    if (keep_maps) {
        out.logit_grad = std::move(ce.logit_grad);
        out.probs = std::move(ce.probs);
    }
    return out;
}

double checkpoint_score(const ModelParams& params, const Dataset& ds,
                        const std::vector<size_t>& val_idx, double* val_loss) {
    std::vector<double> dices(val_idx.size()), losses(val_idx.size());
    parallel_for(val_idx.size(), [&](size_t i) {
        const EvalOut e = eval_sample(params, ds.samples[val_idx[i]], false);
        dices[i] = e.fg_dice;
        losses[i] = e.loss;
    });
    double dsum = 0.0, lsum = 0.0;
    for (size_t i = 0; i < val_idx.size(); ++i) {
        dsum += dices[i];
        lsum += losses[i];
    }
    if (val_loss) *val_loss = lsum / static_cast<double>(val_idx.size());
    return dsum / static_cast<double>(val_idx.size());
}

}  // namespace

TrainResult train(Dataset& ds, const UNetDescriptor& desc, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
    cfg.validate();
    const auto train_idx = ds.indices_of(Split::train);
    const auto val_idx = ds.indices_of(Split::val);
    if (train_idx.empty() || val_idx.empty())
        throw DataError("train: empty train or validation split");

    ModelParams params = init_model(desc, cfg.seed);
    AdamConfig acfg{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};
    AdamState astate;
    Rng shuffle_rng = Rng(cfg.seed).fork(0x5f01);

    TrainResult result;
    if (cfg.epochs == 0) {
        double vl = 0.0;
        const double vd = checkpoint_score(params, ds, val_idx, &vl);
        result.best = Checkpoint{params, 0, vd};
        result.final_params = std::move(params);
        return result;
    }

    Checkpoint best;
    bool have_best = false;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<size_t> order = train_idx;
        shuffle_rng.shuffle(order);

        for (size_t b0 = 0; b0 < order.size(); b0 += static_cast<size_t>(cfg.batch_size)) {
            const size_t bn = std::min(order.size() - b0, static_cast<size_t>(cfg.batch_size));
            std::vector<GradientBundle> bundles(bn);
            parallel_for(bn, [&](size_t k) {
                const LabeledSample& s = ds.samples[order[b0 + k]];
                ForwardTrace trace;
                const Tensor logits = unet_forward(params, s.image, &trace);
                CeResult ce = softmax_cross_entropy(logits, s.mask);
                if (!std::isfinite(ce.loss))
                    throw NumericError("non-finite training loss for sample " + s.id);
                bundles[k] = unet_backward(params, trace, ce.logit_grad);
            });
            // deterministic reduction in batch-slot order
            std::vector<NamedTensor> grads = std::move(bundles[0].param_grads);
            for (size_t k = 1; k < bn; ++k)
                for (size_t t = 0; t < grads.size(); ++t) {
                    const auto& add = bundles[k].param_grads[t].t;
                    auto& acc = grads[t].t;
                    for (size_t i = 0; i < acc.size(); ++i) acc.data[i] += add.data[i];
                }
            const float inv = 1.0f / static_cast<float>(bn);
            for (auto& g : grads)
                for (auto& v : g.t.data) v *= inv;
            adam_step(params, grads, astate, acfg);
        }

        // end-of-epoch snapshot over the train split, evaluation mode
        std::vector<EvalOut> snaps(train_idx.size());
        parallel_for(train_idx.size(),
                     [&](size_t i) { snaps[i] = eval_sample(params, ds.samples[train_idx[i]], true); });

        EpochStats st;
        st.epoch = epoch;
        double tl = 0.0, td = 0.0;
        for (const auto& e : snaps) {
            tl += e.loss;
            td += e.fg_dice;
        }
        st.train_loss = tl / static_cast<double>(snaps.size());
        st.train_fg_dice = td / static_cast<double>(snaps.size());

        if (hooks.on_epoch_snapshot) {
            std::vector<SampleSnapshot> view(snaps.size());
            for (size_t i = 0; i < snaps.size(); ++i)
                view[i] = {&ds.samples[train_idx[i]].id, snaps[i].loss, &snaps[i].logit_grad,
                           &snaps[i].probs};
            hooks.on_epoch_snapshot(epoch, view);
        }
        snaps.clear();

        st.val_fg_dice = checkpoint_score(params, ds, val_idx, &st.val_loss);
        result.log.push_back(st);

        if (!have_best || st.val_fg_dice > best.val_fg_dice) {
            best = Checkpoint{params, epoch, st.val_fg_dice};
            have_best = true;
        }

        if (hooks.on_epoch_end) hooks.on_epoch_end(epoch);
    }

    result.best = std::move(best);
    result.final_params = std::move(params);
    return result;
}

PipelineResult run_pipeline(Dataset& ds, const TrainConfig& cfg, const PipelineConfig& pcfg) {
    pcfg.schedule.validate();

    PipelineResult result;
    for (const auto& s : ds.samples)
        if (s.split == Split::train && s.corrupted) result.corrupted_train_ids.push_back(s.id);
    std::sort(result.corrupted_train_ids.begin(), result.corrupted_train_ids.end());

    TraceStore traces(pcfg.schedule.window_t);
    HistoryStore history(5, pcfg.pool_cap);
    int grad_pool_factor = 1;

    TrainHooks hooks;
    hooks.on_epoch_snapshot = [&](int epoch, const std::vector<SampleSnapshot>& snaps) {
        for (const auto& sn : snaps) {
            int f = 1;
            traces.record_epoch(*sn.id, epoch, flatten_pooled(*sn.logit_grad, pcfg.pool_cap, &f),
                                sn.loss);
            grad_pool_factor = f;
            history.record(*sn.id, epoch, *sn.probs);
        }
    };
    hooks.on_epoch_end = [&](int epoch) {
        if (!pcfg.schedule.is_event_epoch(epoch)) return;

        DetectionReport vog_rep =
            detect(vog_scores(traces, epoch, pcfg.vog_window), result.corrupted_train_ids, epoch,
                   "vog");
        DetectionReport loss_rep =
            detect(loss_scores(traces, epoch), result.corrupted_train_ids, epoch, "loss");
        vog_rep.pooled = grad_pool_factor > 1;
        vog_rep.pool_factor = grad_pool_factor;

        if (pcfg.pipeline == PipelineKind::refurbished) {
            const DetectionReport& gate =
                pcfg.detector == DetectorKind::vog ? vog_rep : loss_rep;
            std::vector<std::string> flagged;
            for (const auto& row : gate.rows)
                if (row.flagged) flagged.push_back(row.id);
            result.events.push_back(refurbish_step(ds, flagged, history, epoch, pcfg.schedule));
        }
        result.detections.push_back(std::move(vog_rep));
        result.detections.push_back(std::move(loss_rep));
    };

    TrainResult tr = train(ds, pcfg.model, cfg, hooks);
    result.best = std::move(tr.best);
    result.final_params = std::move(tr.final_params);
    result.log = std::move(tr.log);
    return result;
}

}  // namespace seglab
