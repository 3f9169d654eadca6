#include "holonet/experiments.hpp"

#include "holonet/error.hpp"
#include "holonet/image.hpp"
#include "holonet/metrics.hpp"
#include "holonet/peptide.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace holonet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream ids for Rng::derive, one per consumer.
constexpr std::uint64_t kModelInitStream = 1;
constexpr std::uint64_t kCorruptionStream = 2;
constexpr std::uint64_t kSplitStream = 3;
constexpr std::uint64_t kEvalStream = 4;
constexpr std::uint64_t kFssStream = 5;

fs::path ensure_dir(const std::string& dir) {
    const fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw DataError("cannot create output directory " + p.string() + ": " + ec.message());
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f << text;
    if (!f) throw DataError("failed writing " + path.string());
}

class JsonlWriter {
public:
    explicit JsonlWriter(const fs::path& path) : f_(path, std::ios::binary | std::ios::trunc) {
        if (!f_) throw DataError("cannot write " + path.string());
    }
    void write(const json& record) { f_ << record.dump() << '\n' << std::flush; }

private:
    std::ofstream f_;
};

TrainConfig train_config(const RunConfig& c, std::uint64_t seed) {
    TrainConfig t;
    t.epochs = c.epochs();
    t.batch_size = c.batch_size();
    t.learning_rate = c.learning_rate();
    t.seed = seed;
    return t;
}

LabeledDataset keep_per_class(const LabeledDataset& d, std::size_t limit) {
    if (limit == 0) return d;
    std::vector<std::size_t> counts(d.num_conditions(), 0);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (counts[d.conditions[i]]++ < limit) rows.push_back(i);
    }
    return d.subset(rows);
}

LabeledDataset load_raw(const RunConfig& c, std::optional<double> sigma) {
    const DataConfig& dc = c.data;
    switch (dc.source) {
        case DataSource::Crescents: {
            CrescentSpec spec;
            spec.n_per_class = dc.n_per_class;
            spec.radii = dc.radii;
            spec.noise_std = sigma.value_or(dc.noise_std);
            Rng rng(c.data_seed());
            return gen_crescents(spec, rng);
        }
        case DataSource::Idx:
            return keep_per_class(load_idx(dc.images, dc.labels), dc.per_class_limit);
        case DataSource::Csv: {
            CsvSchema schema;
            schema.condition_column = dc.condition_column;
            schema.target_column = dc.target_column;
            schema.sequence_column = dc.sequence_column;
            return keep_per_class(load_csv_matrix(dc.csv, schema), dc.per_class_limit);
        }
        case DataSource::SyntheticAffinity: {
            SyntheticAffinitySpec spec;
            spec.n = dc.n_examples;
            spec.n_alleles = dc.n_alleles;
            Rng rng(c.data_seed());
            return gen_synthetic_affinity(spec, rng);
        }
    }
    throw ConfigError("unsupported data source");
}

bool is_regression_data(const LabeledDataset& d) { return d.targets.has_value(); }

Matrix to_original_units(const PreparedData& data, const Matrix& model_space) {
    return data.scaling ? data.scaling->invert(model_space) : model_space;
}

HnaModel init_hgn(const RunConfig& c, const PreparedData& data, std::uint64_t seed) {
    const LabeledDataset& d = data.model_view;
    const HnaConfig hc = make_hna_config(c.model, HnaMode::Generative, d.dim(), d.dim(), d.num_conditions());
    Rng rng = Rng::derive(seed, kModelInitStream);
    return make_hna(hc, rng);
}

Checkpoint decorate(Checkpoint ck, const PreparedData& data) {
    ck.condition_names = data.model_view.condition_names;
    ck.scaling = data.scaling;
    ck.max_log = data.max_log;
    ck.image_rows = data.model_view.image_rows;
    ck.image_cols = data.model_view.image_cols;
    ck.provenance = data.original.provenance;
    return ck;
}

json resolved_config(const RunConfig& c) {
    json j = to_json(c);
    j["optimizer"]["epochs"] = c.epochs();
    j["optimizer"]["batch_size"] = c.batch_size();
    j["optimizer"]["learning_rate"] = c.learning_rate();
    return j;
}

Matrix hgn_reconstruct(const HnaModel& model, const PreparedData& data, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, kEvalStream);
    const Matrix out = hgn_forward(model, data.model_view.inputs, data.model_view.conditions, rng);
    return to_original_units(data, out);
}

json train_hgn(const RunConfig& c, const fs::path& out) {
    const PreparedData data = prepare_data(c);
    HnaModel model = init_hgn(c, data, c.seed);
    JsonlWriter metrics(out / "metrics.jsonl");
    JsonlWriter timing(out / "timing.jsonl");
    std::vector<EpochRecord> log;
    try {
        log = train(model, data.model_view, train_config(c, c.seed), [&](const EpochRecord& r) {
            metrics.write({{"epoch", r.epoch}, {"loss", r.loss}});
            timing.write({{"epoch", r.epoch}, {"seconds", r.seconds}});
        });
    } catch (const NumericalError&) {
        // train() has rolled the parameters back to the last finite epoch.
        save_checkpoint(out / "checkpoint.json", decorate(make_checkpoint(model), data));
        throw;
    }
    save_checkpoint(out / "checkpoint.json", decorate(make_checkpoint(model), data));
    json summary = {{"experiment", "train-hgn"}, {"epochs", log.size()}};
    if (!log.empty()) summary["final_loss"] = log.back().loss;
    if (c.data.source == DataSource::Crescents) {
        const Matrix rec = hgn_reconstruct(model, data, c.seed);
        summary["score_input"] = denoising_score(data.original.inputs, data.original.conditions, c.data.radii);
        summary["score_recon"] = denoising_score(rec, data.original.conditions, c.data.radii);
        summary["centroid_separation"] = min_pairwise_distance(
            class_centroids(rec, data.original.conditions, data.original.num_conditions()));
    }
    return summary;
}

json train_hrn(const RunConfig& c, const fs::path& out) {
    const PreparedData data = prepare_data(c);
    if (!data.max_log) throw DataError("regression training needs target values");
    const auto [train_set, test_set] = split_80_20(data.model_view, Rng::derive(c.data_seed(), kSplitStream).next_u64());
    const HnaConfig hc = make_hna_config(c.model, HnaMode::Regression, 0, 1, train_set.num_conditions());
    Rng init = Rng::derive(c.seed, kModelInitStream);
    HnaModel model = make_hna(hc, init);
    JsonlWriter metrics(out / "metrics.jsonl");
    JsonlWriter timing(out / "timing.jsonl");
    std::vector<EpochRecord> log;
    try {
        log = train(model, train_set, train_config(c, c.seed), [&](const EpochRecord& r) {
            metrics.write({{"epoch", r.epoch}, {"loss", r.loss}});
            timing.write({{"epoch", r.epoch}, {"seconds", r.seconds}});
        });
    } catch (const NumericalError&) {
        save_checkpoint(out / "checkpoint.json", decorate(make_checkpoint(model), data));
        throw;
    }
    save_checkpoint(out / "checkpoint.json", decorate(make_checkpoint(model), data));

    Rng rng = Rng::derive(c.seed, kEvalStream);
    auto score = [&](const LabeledDataset& d) {
        const std::vector<std::size_t> all = [&] {
            std::vector<std::size_t> r(d.size());
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
            return r;
        }();
        const auto pred = hrn_predict(model, make_batch(model, d, all), rng);
        return pearson(pred, *d.targets);
    };
    json summary = {{"experiment", "train-hrn"},
                    {"epochs", log.size()},
                    {"n_train", train_set.size()},
                    {"n_test", test_set.size()},
                    {"train_pcc", score(train_set)},
                    {"test_pcc", score(test_set)}};
    if (!log.empty()) summary["final_loss"] = log.back().loss;
    write_text(out / "eval.json", summary.dump(2) + "\n");
    return summary;
}

AeConfig ae_config(const BaselineConfig& b, std::size_t dim) {
    AeConfig a;
    a.input_dim = dim;
    a.width = b.width;
    a.depth = b.depth;
    a.bottleneck = b.bottleneck;
    a.noise_std = b.kind == BaselineKind::Dae ? b.noise_std : 0.0;
    return a;
}

VaeConfig vae_config(const BaselineConfig& b, std::size_t dim) {
    VaeConfig v;
    v.input_dim = dim;
    v.width = b.width;
    v.depth = b.depth;
    v.latent_dim = b.latent_dim;
    return v;
}

json train_baseline(const RunConfig& c, const fs::path& out) {
    const PreparedData data = prepare_data(c);
    JsonlWriter metrics(out / "metrics.jsonl");
    JsonlWriter timing(out / "timing.jsonl");
    Rng init = Rng::derive(c.seed, kModelInitStream);
    json summary = {{"experiment", "train-baseline"}, {"kind", to_string(c.baseline.kind)}};
    if (c.baseline.kind == BaselineKind::Vae) {
        VaeModel model = make_vae(vae_config(c.baseline, data.model_view.dim()), init);
        const auto log = train_vae(model, data.model_view, train_config(c, c.seed), [&](const VaeEpochRecord& r) {
            metrics.write({{"epoch", r.epoch}, {"loss", r.negative_elbo}, {"kl", r.kl}, {"min_step_kl", r.min_step_kl}});
            timing.write({{"epoch", r.epoch}, {"seconds", r.seconds}});
        });
        save_checkpoint(out / "checkpoint.json", decorate(make_checkpoint(model), data));
        summary["epochs"] = log.size();
        if (!log.empty()) summary["final_loss"] = log.back().negative_elbo;
    } else {
        AeModel model = make_ae(ae_config(c.baseline, data.model_view.dim()), init);
        const auto log = train_ae(model, data.model_view, train_config(c, c.seed), [&](const EpochRecord& r) {
            metrics.write({{"epoch", r.epoch}, {"loss", r.loss}});
            timing.write({{"epoch", r.epoch}, {"seconds", r.seconds}});
        });
        save_checkpoint(out / "checkpoint.json", decorate(make_checkpoint(model), data));
        summary["epochs"] = log.size();
        if (!log.empty()) summary["final_loss"] = log.back().loss;
    }
    return summary;
}

std::string csv_number(double v) {
    json j = v;
    return j.dump();
}

}  // namespace

std::size_t study_threads() {
    if (const char* env = std::getenv("HOLONET_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1) throw ConfigError("HOLONET_THREADS must be a positive integer");
        return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void run_parallel(const std::vector<std::function<void()>>& tasks, std::size_t threads) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, tasks.size()));
    if (threads == 1) {
        for (const auto& t : tasks) t();
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            std::size_t i = 0;
            {
                const std::lock_guard lock(mu);
                if (next >= tasks.size() || first_error) return;
                i = next++;
            }
            try {
                tasks[i]();
            } catch (...) {
                const std::lock_guard lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::size_t find_condition(const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw DataError("unknown condition '" + name + "' (known: " + known + ")");
}

PreparedData prepare_data(const RunConfig& c, std::optional<double> sigma_override) {
    PreparedData p;
    p.original = load_raw(c, sigma_override);
    const bool images = c.data.source != DataSource::Crescents && !is_regression_data(p.original);
    const std::optional<double> corruption = images && sigma_override ? sigma_override : c.data.corruption_sigma;
    if (corruption && c.data.source != DataSource::Crescents) {
        p.original = corrupt(p.original, *corruption, Rng::derive(c.data_seed(), kCorruptionStream).next_u64());
    }
    p.original.validate();
    p.model_view = p.original;
    if (is_regression_data(p.original)) {
        const NormalizedValues nv = normalize_affinity(*p.original.targets);
        p.model_view.targets = nv.values;
        p.max_log = nv.max_log;
    } else if (c.data.scale_to_unit()) {
        p.scaling = fit_unit_scaling(p.original.inputs);
        p.model_view.inputs = p.scaling->apply(p.original.inputs);
    }
    return p;
}

json cmd_train(const RunConfig& c) {
    const fs::path out = ensure_dir(c.output_dir);
    write_text(out / "config.json", resolved_config(c).dump(2) + "\n");
    switch (c.experiment) {
        case ExperimentKind::TrainHgn: return train_hgn(c, out);
        case ExperimentKind::TrainHrn: return train_hrn(c, out);
        case ExperimentKind::TrainBaseline: return train_baseline(c, out);
        default: throw ConfigError("cmd_train needs a train-* experiment");
    }
}

json cmd_fss(const RunConfig& c) {
    if (c.fss.checkpoint.empty()) throw ConfigError("fss needs 'fss.checkpoint'");
    const Checkpoint ck = load_checkpoint(c.fss.checkpoint);
    if (ck.kind != "hgn") throw DataError("fss needs an hgn checkpoint, got '" + ck.kind + "'");
    const HnaModel model = hna_from_checkpoint(ck);
    const std::string cond_name = c.fss.condition.empty() ? ck.condition_names.at(0) : c.fss.condition;
    const std::size_t cond = find_condition(ck.condition_names, cond_name);
    Rng rng = Rng::derive(c.seed, kFssStream);
    const FssResult r = fss_sample(model, cond, c.fss.n, rng);
    const fs::path out = ensure_dir(c.output_dir);
    json summary = {{"experiment", "fss"}, {"condition", cond_name}, {"n", c.fss.n}};
    if (ck.image_rows > 0) {
        const std::size_t per_row = c.fss.per_row == 0 ? c.fss.n : c.fss.per_row;
        const Matrix grid = tile_grid(r.outputs, ck.image_rows, ck.image_cols, per_row);
        write_pgm(out / "fss.pgm", grid);
        summary["image"] = (out / "fss.pgm").string();
        summary["width"] = grid.cols();
        summary["height"] = grid.rows();
    } else {
        const Matrix pts = ck.scaling ? ck.scaling->invert(r.outputs) : r.outputs;
        std::string csv = "observer";
        for (std::size_t j = 0; j < pts.cols(); ++j) csv += ",x" + std::to_string(j + 1);
        csv += "\n";
        for (std::size_t i = 0; i < pts.rows(); ++i) {
            csv += csv_number(r.skip_values[i]);
            for (std::size_t j = 0; j < pts.cols(); ++j) csv += "," + csv_number(pts(i, j));
            csv += "\n";
        }
        write_text(out / "fss.csv", csv);
        summary["table"] = (out / "fss.csv").string();
    }
    return summary;
}

json cmd_denoise_eval(const RunConfig& c) {
    const fs::path out = ensure_dir(c.output_dir);
    write_text(out / "config.json", resolved_config(c).dump(2) + "\n");
    const bool crescents = c.data.source == DataSource::Crescents;

    struct Task {
        double sigma;
        std::string model;
        std::uint64_t seed;
        json record;
        Matrix reconstruction;
        std::vector<std::size_t> classes;
    };
    std::vector<Task> tasks;
    std::uint64_t index = 0;
    for (double s : c.denoise.sigmas) {
        for (const auto& m : c.denoise.models) tasks.push_back({s, m, c.seed + index++, {}, {}, {}});
    }

    std::vector<std::function<void()>> jobs;
    for (auto& t : tasks) {
        jobs.emplace_back([&c, &t, crescents] {
            const PreparedData data = prepare_data(c, t.sigma);
            const TrainConfig tc = train_config(c, t.seed);
            Rng init = Rng::derive(t.seed, kModelInitStream);
            Matrix rec;
            if (t.model == "hgn") {
                HnaModel model = init_hgn(c, data, t.seed);
                train(model, data.model_view, tc);
                rec = hgn_reconstruct(model, data, t.seed);
            } else if (t.model == "vae") {
                // The Bernoulli likelihood needs [0, 1] inputs; crescents are scaled by prepare_data.
                VaeModel model = make_vae(vae_config(c.baseline, data.model_view.dim()), init);
                train_vae(model, data.model_view, tc);
                Rng rng = Rng::derive(t.seed, kEvalStream);
                rec = to_original_units(data, vae_forward(model, data.model_view.inputs, rng).reconstruction);
            } else {
                BaselineConfig b = c.baseline;
                b.kind = t.model == "dae" ? BaselineKind::Dae : BaselineKind::Ae;
                AeModel model = make_ae(ae_config(b, data.model_view.dim()), init);
                train_ae(model, data.model_view, tc);
                rec = to_original_units(data, ae_forward(model, data.model_view.inputs));
            }
            t.record = {{"model", t.model}, {"sigma", t.sigma}};
            if (crescents) {
                const auto& cls = data.original.conditions;
                t.record["score_input"] = denoising_score(data.original.inputs, cls, c.data.radii);
                t.record["score_recon"] = denoising_score(rec, cls, c.data.radii);
                t.record["centroid_separation"] =
                    min_pairwise_distance(class_centroids(rec, cls, data.original.num_conditions()));
            } else {
                t.record["mse_to_input"] = mse_loss(rec, data.original.inputs);
            }
            t.reconstruction = std::move(rec);
            t.classes = data.original.conditions;
        });
    }
    run_parallel(jobs, study_threads());

    json report = json::array();
    for (const auto& t : tasks) report.push_back(t.record);
    write_text(out / "report.json", report.dump(2) + "\n");
    if (crescents) {
        std::string csv = "model,sigma,class,x,y\n";
        for (const auto& t : tasks) {
            for (std::size_t i = 0; i < t.reconstruction.rows(); ++i) {
                csv += t.model + "," + csv_number(t.sigma) + "," + std::to_string(t.classes[i]) + "," +
                       csv_number(t.reconstruction(i, 0)) + "," + csv_number(t.reconstruction(i, 1)) + "\n";
            }
        }
        write_text(out / "reconstructions.csv", csv);
    }
    return {{"experiment", "denoise-eval"}, {"records", report}};
}

json cmd_activation_study(const RunConfig& c) {
    const fs::path out = ensure_dir(c.output_dir);
    write_text(out / "config.json", resolved_config(c).dump(2) + "\n");
    const PreparedData data = prepare_data(c);

    struct Run {
        ActivationKind activation;
        std::uint64_t seed;
        std::vector<EpochRecord> log;
    };
    std::vector<Run> runs;
    for (std::size_t r = 0; r < c.study.repeats; ++r) {
        for (auto a : c.study.activations) runs.push_back({a, c.seed + r, {}});
    }
    std::vector<std::function<void()>> jobs;
    for (auto& run : runs) {
        jobs.emplace_back([&c, &data, &run] {
            RunConfig rc = c;
            rc.model.activation = run.activation;
            HnaModel model = init_hgn(rc, data, run.seed);
            run.log = train(model, data.model_view, train_config(rc, run.seed));
        });
    }
    run_parallel(jobs, study_threads());

    std::string csv = "activation,seed,epoch,loss\n";
    std::map<std::string, std::vector<double>> finals;
    for (const auto& run : runs) {
        const std::string name(to_string(run.activation));
        for (const auto& e : run.log) {
            csv += name + "," + std::to_string(run.seed) + "," + std::to_string(e.epoch) + "," + csv_number(e.loss) + "\n";
        }
        if (!run.log.empty()) finals[name].push_back(run.log.back().loss);
    }
    write_text(out / "curves.csv", csv);

    std::vector<std::pair<double, std::string>> ranking;
    json per_activation = json::object();
    for (auto& [name, losses] : finals) {
        const double median = quantile(losses, 0.5);
        per_activation[name] = {{"final_losses", losses}, {"median_final_loss", median}};
        ranking.emplace_back(median, name);
    }
    std::sort(ranking.begin(), ranking.end());
    json order = json::array();
    for (const auto& [loss, name] : ranking) order.push_back(name);
    const json summary = {{"experiment", "activation-study"},
                          {"epochs", c.epochs()},
                          {"activations", per_activation},
                          {"ranking", order}};
    write_text(out / "summary.json", summary.dump(2) + "\n");
    return summary;
}

json cmd_pca_eval(const RunConfig& c) {
    if (c.pca.checkpoint.empty()) throw ConfigError("pca-eval needs 'pca.checkpoint'");
    const Checkpoint ck = load_checkpoint(c.pca.checkpoint);
    if (ck.kind != "hgn") throw DataError("pca-eval needs an hgn checkpoint, got '" + ck.kind + "'");
    const HnaModel model = hna_from_checkpoint(ck);
    const PreparedData data = prepare_data(c);
    if (data.original.dim() != model.config.output_dim) {
        throw DataError("dataset width does not match the checkpoint");
    }
    const fs::path out = ensure_dir(c.output_dir);
    Rng rng = Rng::derive(c.seed, kFssStream);

    const std::size_t k = std::min(c.pca.n_components, data.original.dim());
    std::string csv = "condition,row_kind,observer";
    for (std::size_t j = 0; j < k; ++j) csv += ",pc" + std::to_string(j + 1);
    csv += "\n";
    json per_condition = json::array();
    for (std::size_t cond = 0; cond < data.original.num_conditions(); ++cond) {
        const auto rows = data.original.rows_with_condition(cond);
        if (rows.size() < 2) {
            throw DataError("condition '" + data.original.condition_names[cond] + "' has fewer than 2 rows");
        }
        const std::string& name = data.original.condition_names[cond];
        const std::size_t model_cond = find_condition(ck.condition_names, name);
        const Matrix training = data.original.inputs.gather_rows(rows);
        const PcaTransform t = pca_fit(training, std::min(k, rows.size()));
        require_fit_on(t, training);

        const FssResult gen = fss_sample(model, model_cond, c.pca.n_generated, rng);
        const Matrix generated = ck.scaling ? ck.scaling->invert(gen.outputs) : gen.outputs;
        const Matrix train_scores = pca_project(t, training);
        const Matrix gen_scores = pca_project(t, generated);
        const OverlapStat overlap = quantile_overlap(train_scores, gen_scores);

        auto emit = [&](const Matrix& scores, const char* kind, const std::vector<double>* observer) {
            for (std::size_t i = 0; i < scores.rows(); ++i) {
                csv += name + "," + kind + "," + (observer ? csv_number((*observer)[i]) : "");
                for (std::size_t j = 0; j < scores.cols(); ++j) csv += "," + csv_number(scores(i, j));
                csv += "\n";
            }
        };
        emit(train_scores, "training", nullptr);
        emit(gen_scores, "generated", &gen.skip_values);
        per_condition.push_back({{"condition", name},
                                 {"n_training", rows.size()},
                                 {"explained_ratio", t.explained_ratio},
                                 {"fit_hash", t.fit_hash},
                                 {"overlap", overlap.ratio},
                                 {"generated_in_band", overlap.generated_fraction}});
    }
    write_text(out / "projections.csv", csv);
    const json summary = {{"experiment", "pca-eval"}, {"n_components", k}, {"conditions", per_condition}};
    write_text(out / "summary.json", summary.dump(2) + "\n");
    return summary;
}

json cmd_predict(const RunConfig& c) {
    if (c.predict.checkpoint.empty()) throw ConfigError("predict needs 'predict.checkpoint'");
    const Checkpoint ck = load_checkpoint(c.predict.checkpoint);
    if (ck.kind != "hrn") throw DataError("predict needs an hrn checkpoint, got '" + ck.kind + "'");
    if (!ck.max_log) throw DataError("checkpoint lacks the normalization maximum");
    const HnaModel model = hna_from_checkpoint(ck);
    const std::size_t allele = find_condition(ck.condition_names, c.predict.allele);
    const auto idx = encode_peptide(c.predict.peptide, model.config.peptide_slots);
    Rng rng = Rng::derive(c.seed, kEvalStream);
    const double x = hrn_predict(model, idx, allele, rng);
    return {{"peptide", c.predict.peptide},
            {"allele", c.predict.allele},
            {"normalized", x},
            {"value", denormalize_affinity(x, *ck.max_log)}};
}

json run_experiment(const RunConfig& c) {
    switch (c.experiment) {
        case ExperimentKind::TrainHgn:
        case ExperimentKind::TrainHrn:
        case ExperimentKind::TrainBaseline: return cmd_train(c);
        case ExperimentKind::Fss: return cmd_fss(c);
        case ExperimentKind::DenoiseEval: return cmd_denoise_eval(c);
        case ExperimentKind::ActivationStudy: return cmd_activation_study(c);
        case ExperimentKind::PcaEval: return cmd_pca_eval(c);
        case ExperimentKind::Predict: return cmd_predict(c);
    }
    throw ConfigError("unknown experiment");
}

}  // namespace holonet
