#include "holonet/checkpoint.hpp"

#include "holonet/error.hpp"

#include <fstream>
#include <sstream>

namespace holonet {

namespace {

constexpr const char* kFormat = "holonet-checkpoint";

nlohmann::json matrix_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.storage()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

Checkpoint from_refs(std::string kind, nlohmann::json config, const std::vector<ParamRef>& refs) {
    Checkpoint c;
    c.kind = std::move(kind);
    c.config = std::move(config);
    for (const auto& r : refs) c.params.emplace(r.name, *r.value);
    return c;
}

void restore(const Checkpoint& c, const std::vector<ParamRef>& refs) {
    if (refs.size() != c.params.size()) {
        throw DataError("checkpoint holds " + std::to_string(c.params.size()) + " arrays, model expects " +
                        std::to_string(refs.size()));
    }
    for (const auto& r : refs) {
        const auto it = c.params.find(r.name);
        if (it == c.params.end()) throw DataError("checkpoint lacks parameter '" + r.name + "'");
        if (!it->second.same_shape(*r.value)) {
            throw DataError("parameter '" + r.name + "' is " + shape_string(it->second) + ", model expects " +
                            shape_string(*r.value));
        }
        *r.value = it->second;
    }
}

void require_kind(const Checkpoint& c, std::initializer_list<std::string_view> kinds) {
    for (auto k : kinds) {
        if (c.kind == k) return;
    }
    throw DataError("checkpoint kind '" + c.kind + "' does not fit this model");
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
    nlohmann::json j;
    j["format"] = kFormat;
    j["version"] = kCheckpointVersion;
    j["kind"] = c.kind;
    j["config"] = c.config;
    j["conditions"] = c.condition_names;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, m] : c.params) params[name] = matrix_json(m);
    j["params"] = std::move(params);
    if (c.scaling) j["scaling"] = to_json(*c.scaling);
    if (c.max_log) j["max_log"] = *c.max_log;
    if (c.image_rows > 0) j["image"] = {c.image_rows, c.image_cols};
    if (c.provenance) j["provenance"] = to_json(*c.provenance);
    return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (j.value("format", "") != kFormat) throw DataError("not a holonet checkpoint");
    if (j.value("version", 0) != kCheckpointVersion) {
        throw DataError("unsupported checkpoint version " + j.value("version", nlohmann::json()).dump());
    }
    try {
        Checkpoint c;
        c.kind = j.at("kind").get<std::string>();
        c.config = j.at("config");
        c.condition_names = j.at("conditions").get<std::vector<std::string>>();
        for (const auto& [name, m] : j.at("params").items()) c.params.emplace(name, matrix_from_json(m));
        if (j.contains("scaling")) c.scaling = unit_scaling_from_json(j["scaling"]);
        if (j.contains("max_log")) c.max_log = j["max_log"].get<double>();
        if (j.contains("image")) {
            c.image_rows = j["image"].at(0).get<std::size_t>();
            c.image_cols = j["image"].at(1).get<std::size_t>();
        }
        if (j.contains("provenance")) c.provenance = provenance_from_json(j["provenance"]);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f << serialize_checkpoint(c);
    if (!f) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read checkpoint " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_checkpoint(ss.str());
}

Checkpoint make_checkpoint(HnaModel& model) {
    return from_refs(std::string(to_string(model.config.mode)), to_json(model.config), model.parameters());
}

Checkpoint make_checkpoint(AeModel& model) {
    return from_refs(model.config.noise_std > 0 ? "dae" : "ae", to_json(model.config), model.parameters());
}

Checkpoint make_checkpoint(VaeModel& model) {
    return from_refs("vae", to_json(model.config), model.parameters());
}

HnaModel hna_from_checkpoint(const Checkpoint& c) {
    require_kind(c, {"hgn", "hrn"});
    const HnaConfig config = hna_config_from_json(c.config);
    if (to_string(config.mode) != c.kind) throw DataError("checkpoint kind disagrees with its config");
    Rng scratch(0);
    HnaModel m = make_hna(config, scratch);
    restore(c, m.parameters());
    return m;
}

AeModel ae_from_checkpoint(const Checkpoint& c) {
    require_kind(c, {"ae", "dae"});
    Rng scratch(0);
    AeModel m = make_ae(ae_config_from_json(c.config), scratch);
    restore(c, m.parameters());
    return m;
}

VaeModel vae_from_checkpoint(const Checkpoint& c) {
    require_kind(c, {"vae"});
    Rng scratch(0);
    VaeModel m = make_vae(vae_config_from_json(c.config), scratch);
    restore(c, m.parameters());
    return m;
}

}  // namespace holonet
