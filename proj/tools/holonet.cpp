// holonet <command> --config path.json [--seed N] [--out dir] [command flags]
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical abort.

#include "holonet/error.hpp"
#include "holonet/experiments.hpp"
#include "holonet/run_config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> checkpoint;
    std::optional<std::string> condition;
    std::optional<std::size_t> n;
    std::optional<std::string> peptide;
    std::optional<std::string> allele;
    std::optional<std::size_t> epochs;
};

holonet::RunConfig resolve(const std::string& command, const Overrides& o) {
    using holonet::ExperimentKind;
    holonet::RunConfig c = o.config.empty() ? holonet::run_config_from_json(nlohmann::json::object())
                                            : holonet::load_run_config(o.config);
    if (command == "train") {
        if (c.experiment != ExperimentKind::TrainHgn && c.experiment != ExperimentKind::TrainHrn &&
            c.experiment != ExperimentKind::TrainBaseline) {
            throw holonet::ConfigError("'train' needs a train-hgn, train-hrn or train-baseline config");
        }
    } else {
        c.experiment = holonet::experiment_kind_from_string(command);
    }
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.output_dir = *o.out;
    if (o.epochs) c.optimizer.epochs = *o.epochs;
    if (o.checkpoint) c.fss.checkpoint = c.pca.checkpoint = c.predict.checkpoint = *o.checkpoint;
    if (o.condition) c.fss.condition = *o.condition;
    if (o.n) c.fss.n = *o.n;
    if (o.peptide) c.predict.peptide = *o.peptide;
    if (o.allele) c.predict.allele = *o.allele;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Observer/backbone networks: training, sampling and evaluation"};
    app.require_subcommand(1);
    Overrides o;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"train", "train the model described by the config (train-hgn, train-hrn, train-baseline)"},
        {"fss", "full spectrum sampling from an hgn checkpoint"},
        {"denoise-eval", "train hgn/ae/dae/vae on noisy data and score the reconstructions"},
        {"activation-study", "train one hgn per activation and rank the final losses"},
        {"pca-eval", "project training and generated rows through per-condition PCA"},
        {"predict", "predict a peptide's affinity with an hrn checkpoint"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "RunConfig JSON");
        sub->add_option("--seed", o.seed, "override the run seed");
        sub->add_option("--out", o.out, "override the output directory");
        sub->add_option("--epochs", o.epochs, "override the epoch count");
        if (name == "fss" || name == "pca-eval" || name == "predict") {
            sub->add_option("--checkpoint", o.checkpoint, "checkpoint file");
        }
        if (name == "fss") {
            sub->add_option("--condition", o.condition, "condition name from the checkpoint registry");
            sub->add_option("--n", o.n, "number of samples");
        }
        if (name == "predict") {
            sub->add_option("--peptide", o.peptide, "peptide sequence (up to 11 residues)");
            sub->add_option("--allele", o.allele, "allele name from the checkpoint registry");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        const holonet::RunConfig config = resolve(command, o);
        std::cout << holonet::run_experiment(config).dump(2) << '\n';
        return 0;
    } catch (const holonet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const holonet::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const holonet::Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
