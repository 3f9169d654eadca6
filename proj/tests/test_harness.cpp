#include "holonet/checkpoint.hpp"
#include "holonet/error.hpp"
#include "holonet/experiments.hpp"
#include "holonet/image.hpp"
#include "holonet/run_config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace holonet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("holonet_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

/// A small crescents run that trains in well under a second.
RunConfig small_crescents(const fs::path& out, std::size_t epochs) {
    return run_config_from_json({{"experiment", "train-hgn"},
                                 {"output_dir", out.string()},
                                 {"data", {{"n_per_class", 30}, {"noise_std", 0.08}}},
                                 {"model", {{"width", 8}, {"components", 4}}},
                                 {"optimizer", {{"epochs", epochs}}}});
}

RunConfig small_affinity(const fs::path& out) {
    return run_config_from_json({{"experiment", "train-hrn"},
                                 {"output_dir", out.string()},
                                 {"data", {{"source", "synthetic-affinity"}, {"n_examples", 60}}},
                                 {"model", {{"width", 8}, {"components", 4}, {"embedding_dim", 3}}},
                                 {"optimizer", {{"epochs", 2}}}});
}

}  // namespace

TEST(RunConfigTest, DefaultsResolvePerDataset) {
    const RunConfig c = run_config_from_json({{"experiment", "train-hgn"}});
    EXPECT_EQ(c.epochs(), 2000u);
    EXPECT_EQ(c.batch_size(), 128u);
    EXPECT_EQ(c.learning_rate(), 0.01);
    const RunConfig h = run_config_from_json({{"experiment", "train-hrn"}, {"data", {{"source", "synthetic-affinity"}}}});
    EXPECT_EQ(h.epochs(), 500u);
    EXPECT_EQ(h.batch_size(), 32u);
    EXPECT_EQ(h.learning_rate(), 0.001);
}

TEST(RunConfigTest, RejectsUnknownKeys) {
    EXPECT_THROW(run_config_from_json({{"experiment", "train-hgn"}, {"epoch", 3}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"model", {{"widht", 3}}}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"experiment", "train-everything"}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"model", {{"activation", "swish"}}}}), ConfigError);
}

TEST(RunConfigTest, JsonRoundTrip) {
    const RunConfig c = small_affinity("x");
    EXPECT_EQ(to_json(run_config_from_json(to_json(c))), to_json(c));
}

TEST(Image, QuantizeRoundsHalfUpAndClamps) {
    EXPECT_EQ(quantize_pixel(0.0), 0);
    EXPECT_EQ(quantize_pixel(1.0), 255);
    EXPECT_EQ(quantize_pixel(0.5), 128);
    EXPECT_EQ(quantize_pixel(-3.0), 0);
    EXPECT_EQ(quantize_pixel(7.0), 255);
    EXPECT_EQ(quantize_pixel(std::nan("")), 0);
}

TEST(Image, PgmHeaderAndLayout) {
    Matrix tiles(3, 4);
    for (std::size_t t = 0; t < 3; ++t) tiles.row_span(t)[0] = 1.0;
    const Matrix grid = tile_grid(tiles, 2, 2, 3);
    ASSERT_EQ(grid.rows(), 2u);
    ASSERT_EQ(grid.cols(), 6u);
    EXPECT_EQ(grid(0, 0), 1.0);
    EXPECT_EQ(grid(0, 2), 1.0);
    EXPECT_EQ(grid(0, 4), 1.0);
    const auto bytes = encode_pgm(grid);
    const std::string header = "P5\n6 2\n255\n";
    ASSERT_EQ(bytes.size(), header.size() + 12);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + header.size()), header);
    EXPECT_THROW(tile_grid(tiles, 3, 3, 1), ShapeError);
}

TEST(CheckpointTest, SaveLoadSaveIsByteIdentical) {
    const fs::path dir = scratch_dir("ckpt");
    const RunConfig c = small_crescents(dir, 2);
    cmd_train(c);
    const std::string first = read_file(dir / "checkpoint.json");
    const Checkpoint loaded = load_checkpoint(dir / "checkpoint.json");
    EXPECT_EQ(serialize_checkpoint(loaded), first);
    HnaModel model = hna_from_checkpoint(loaded);
    Checkpoint again = make_checkpoint(model);
    again.condition_names = loaded.condition_names;
    again.scaling = loaded.scaling;
    again.provenance = loaded.provenance;
    EXPECT_EQ(serialize_checkpoint(again), first);
}

TEST(CheckpointTest, BaselinesRoundTrip) {
    VaeConfig vc;
    vc.input_dim = 3;
    vc.width = 4;
    Rng rng(1);
    VaeModel v = make_vae(vc, rng);
    const std::string vs = serialize_checkpoint(make_checkpoint(v));
    VaeModel v2 = vae_from_checkpoint(parse_checkpoint(vs));
    EXPECT_EQ(serialize_checkpoint(make_checkpoint(v2)), vs);
    EXPECT_THROW(ae_from_checkpoint(parse_checkpoint(vs)), DataError);
    EXPECT_THROW(parse_checkpoint("{\"format\": \"other\"}"), DataError);
    EXPECT_THROW(parse_checkpoint("not json"), DataError);
}

TEST(CmdTrain, ZeroEpochsKeepsInitialization) {
    const fs::path a = scratch_dir("zero_a"), b = scratch_dir("zero_b");
    const json s = cmd_train(small_crescents(a, 0));
    EXPECT_EQ(s["epochs"], 0);
    EXPECT_EQ(read_file(a / "metrics.jsonl"), "");
    cmd_train(small_crescents(b, 1));
    EXPECT_NE(read_file(a / "checkpoint.json"), read_file(b / "checkpoint.json"));
    // A second zero-epoch run reproduces the untouched initialization.
    const fs::path c = scratch_dir("zero_c");
    cmd_train(small_crescents(c, 0));
    EXPECT_EQ(read_file(a / "checkpoint.json"), read_file(c / "checkpoint.json"));
}

TEST(CmdTrain, RerunIsByteIdentical) {
    const fs::path a = scratch_dir("rerun_a"), b = scratch_dir("rerun_b");
    const json sa = cmd_train(small_crescents(a, 3));
    const json sb = cmd_train(small_crescents(b, 3));
    EXPECT_EQ(sa, sb);
    const std::string metrics = read_file(a / "metrics.jsonl");
    EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 3);
    EXPECT_EQ(metrics, read_file(b / "metrics.jsonl"));
    EXPECT_EQ(read_file(a / "checkpoint.json"), read_file(b / "checkpoint.json"));
    const json cfg = json::parse(read_file(a / "config.json"));
    EXPECT_EQ(cfg["optimizer"]["epochs"], 3);
    EXPECT_EQ(cfg["optimizer"]["batch_size"], 128);
}

TEST(CmdTrain, CrescentsSummaryCarriesScores) {
    const fs::path dir = scratch_dir("scores");
    const json s = cmd_train(small_crescents(dir, 1));
    EXPECT_GT(s["score_input"].get<double>(), 0.0);
    EXPECT_TRUE(s.contains("score_recon"));
    EXPECT_TRUE(s.contains("centroid_separation"));
}

TEST(CmdFss, CrescentsTableSweepsEndpoints) {
    const fs::path dir = scratch_dir("fss");
    cmd_train(small_crescents(dir / "train", 1));
    RunConfig c = run_config_from_json({{"experiment", "fss"},
                                        {"output_dir", (dir / "fss").string()},
                                        {"fss", {{"checkpoint", (dir / "train" / "checkpoint.json").string()},
                                                 {"condition", "arc1"},
                                                 {"n", 2}}}});
    cmd_fss(c);
    const std::string csv = read_file(dir / "fss" / "fss.csv");
    std::istringstream lines(csv);
    std::string header, first, second, extra;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, second);
    EXPECT_EQ(header, "observer,x1,x2");
    EXPECT_EQ(first.substr(0, first.find(',')), "-1.0");
    EXPECT_EQ(second.substr(0, second.find(',')), "1.0");
    EXPECT_FALSE(std::getline(lines, extra));

    c.fss.condition = "nope";
    EXPECT_THROW(cmd_fss(c), DataError);
}

TEST(CmdFss, ImageGridGeometry) {
    const fs::path dir = scratch_dir("fss_img");
    std::vector<std::uint8_t> pixels(6 * 4 * 4);
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = static_cast<std::uint8_t>(i * 11);
    write_idx_images(dir / "img", pixels, 6, 4, 4);
    write_idx_labels(dir / "lab", std::vector<std::uint8_t>{0, 1, 2, 0, 1, 2});
    const json data = {{"source", "idx"}, {"images", (dir / "img").string()}, {"labels", (dir / "lab").string()}};
    cmd_train(run_config_from_json({{"experiment", "train-hgn"},
                                    {"output_dir", (dir / "train").string()},
                                    {"data", data},
                                    {"model", {{"width", 8}, {"components", 4}}},
                                    {"optimizer", {{"epochs", 1}}}}));
    const json s = cmd_fss(run_config_from_json(
        {{"experiment", "fss"},
         {"output_dir", (dir / "fss").string()},
         {"fss", {{"checkpoint", (dir / "train" / "checkpoint.json").string()}, {"condition", "2"}, {"n", 5}}}}));
    EXPECT_EQ(s["width"], 20);
    EXPECT_EQ(s["height"], 4);
    const std::string pgm = read_file(dir / "fss" / "fss.pgm");
    EXPECT_EQ(pgm.substr(0, 11), "P5\n20 4\n255");
    EXPECT_EQ(pgm.size(), std::string("P5\n20 4\n255\n").size() + 80);
}

TEST(CmdPredict, PadsShortPeptidesAndRejectsLongOnes) {
    const fs::path dir = scratch_dir("predict");
    cmd_train(small_affinity(dir / "train"));
    const std::string ck = (dir / "train" / "checkpoint.json").string();
    const Checkpoint loaded = load_checkpoint(ck);
    ASSERT_TRUE(loaded.max_log.has_value());
    RunConfig c = run_config_from_json(
        {{"experiment", "predict"},
         {"predict", {{"checkpoint", ck}, {"peptide", "ACD"}, {"allele", loaded.condition_names.at(0)}}}});
    const json p = cmd_predict(c);
    const double x = p["normalized"];
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
    EXPECT_DOUBLE_EQ(p["value"].get<double>(), denormalize_affinity(x, *loaded.max_log));
    c.predict.peptide = "ACDEFGHIKLMN";
    EXPECT_THROW(cmd_predict(c), DataError);
    c.predict.peptide = "ACD";
    c.predict.allele = "unknown";
    EXPECT_THROW(cmd_predict(c), DataError);
}

TEST(CmdTrainHrn, RerunIsByteIdentical) {
    const fs::path a = scratch_dir("hrn_a"), b = scratch_dir("hrn_b");
    const json sa = cmd_train(small_affinity(a));
    const json sb = cmd_train(small_affinity(b));
    EXPECT_EQ(sa, sb);
    EXPECT_EQ(sa["n_train"], 48);
    EXPECT_EQ(sa["n_test"], 12);
    EXPECT_EQ(read_file(a / "metrics.jsonl"), read_file(b / "metrics.jsonl"));
}

TEST(CmdDenoiseEval, OneRecordPerModelAndSigma) {
    const fs::path dir = scratch_dir("denoise");
    const json s = cmd_denoise_eval(run_config_from_json({{"experiment", "denoise-eval"},
                                                          {"output_dir", dir.string()},
                                                          {"data", {{"n_per_class", 20}}},
                                                          {"model", {{"width", 8}, {"components", 4}}},
                                                          {"baseline", {{"width", 8}}},
                                                          {"denoise", {{"sigmas", {0.0, 0.08}}}},
                                                          {"optimizer", {{"epochs", 1}}}}));
    const json& recs = s["records"];
    ASSERT_EQ(recs.size(), 8u);
    for (const auto& r : recs) {
        if (r["sigma"] == 0.0) EXPECT_LT(r["score_input"].get<double>(), 1e-12);
        if (r["sigma"] == 0.08) EXPECT_GT(r["score_input"].get<double>(), 0.0);
    }
    EXPECT_EQ(json::parse(read_file(dir / "report.json")), recs);
}

TEST(CmdActivationStudy, EqualCurvesAndRanking) {
    const fs::path dir = scratch_dir("study");
    const json s = cmd_activation_study(run_config_from_json({{"experiment", "activation-study"},
                                                              {"output_dir", dir.string()},
                                                              {"data", {{"n_per_class", 20}}},
                                                              {"model", {{"width", 8}, {"components", 4}}},
                                                              {"optimizer", {{"epochs", 2}}}}));
    EXPECT_EQ(s["ranking"].size(), 6u);
    EXPECT_EQ(s["activations"].size(), 6u);
    const std::string csv = read_file(dir / "curves.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6 * 2);
}

TEST(CmdPcaEval, FitsOnTrainingRowsOnly) {
    const fs::path dir = scratch_dir("pca");
    const json data = {{"source", "crescents"}, {"n_per_class", 30}, {"noise_std", 0.08}};
    cmd_train(run_config_from_json({{"experiment", "train-hgn"},
                                    {"output_dir", (dir / "train").string()},
                                    {"data", data},
                                    {"model", {{"width", 8}, {"components", 4}}},
                                    {"optimizer", {{"epochs", 1}}}}));
    const json s = cmd_pca_eval(run_config_from_json(
        {{"experiment", "pca-eval"},
         {"output_dir", (dir / "pca").string()},
         {"data", data},
         {"pca", {{"checkpoint", (dir / "train" / "checkpoint.json").string()}, {"n_generated", 10}}}}));
    EXPECT_EQ(s["n_components"], 2);
    ASSERT_EQ(s["conditions"].size(), 3u);
    for (const auto& c : s["conditions"]) EXPECT_EQ(c["overlap"].size(), 2u);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch_dir("cli");
    const std::string cli = HOLONET_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((cli + " " + args + " > " + (dir / "out.txt").string() + " 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    std::ofstream(dir / "typo.json") << R"({"experiment": "train-hgn", "epoch": 3})";
    std::ofstream(dir / "ok.json") << R"({"experiment": "train-hgn", "data": {"n_per_class": 10},
        "model": {"width": 4, "components": 2}, "optimizer": {"epochs": 1}})";
    EXPECT_EQ(run("train --config " + (dir / "typo.json").string()), 2);
    EXPECT_EQ(run("fss --checkpoint " + (dir / "missing.json").string()), 3);
    EXPECT_EQ(run("train --config " + (dir / "ok.json").string() + " --out " + (dir / "run").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "run" / "checkpoint.json"));
    EXPECT_EQ(run("bogus-command"), 2);
}

TEST(Configs, ShippedConfigsParse) {
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(HOLONET_SOURCE_DIR) / "configs")) {
        if (entry.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_run_config(entry.path()).validate()) << entry.path();
        ++seen;
    }
    EXPECT_GE(seen, 5u);
}
