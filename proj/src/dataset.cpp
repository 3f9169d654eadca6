#include "holonet/dataset.hpp"

#include "holonet/error.hpp"
#include "holonet/peptide.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace holonet {

namespace fs = std::filesystem;

nlohmann::json to_json(const Provenance& p) {
    nlohmann::json j;
    j["source"] = p.source;
    j["seed"] = p.seed ? nlohmann::json(*p.seed) : nlohmann::json(nullptr);
    j["sigma"] = p.sigma ? nlohmann::json(*p.sigma) : nlohmann::json(nullptr);
    if (p.corruption_seed) j["corruption_seed"] = *p.corruption_seed;
    if (p.generation_noise_std) j["generation_noise_std"] = *p.generation_noise_std;
    return j;
}

Provenance provenance_from_json(const nlohmann::json& j) {
    Provenance p;
    p.source = j.value("source", "");
    if (j.contains("seed") && !j["seed"].is_null()) p.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("sigma") && !j["sigma"].is_null()) p.sigma = j["sigma"].get<double>();
    if (j.contains("corruption_seed")) p.corruption_seed = j["corruption_seed"].get<std::uint64_t>();
    if (j.contains("generation_noise_std")) {
        p.generation_noise_std = j["generation_noise_std"].get<double>();
    }
    return p;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
    LabeledDataset out;
    out.inputs = inputs.gather_rows(rows);
    out.conditions.reserve(rows.size());
    for (auto r : rows) out.conditions.push_back(conditions.at(r));
    if (targets) {
        std::vector<double> t;
        t.reserve(rows.size());
        for (auto r : rows) t.push_back(targets->at(r));
        out.targets = std::move(t);
    }
    out.condition_names = condition_names;
    out.provenance = provenance;
    out.image_rows = image_rows;
    out.image_cols = image_cols;
    return out;
}

std::vector<std::size_t> LabeledDataset::rows_with_condition(std::size_t c) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        if (conditions[i] == c) out.push_back(i);
    }
    return out;
}

void LabeledDataset::validate() const {
    if (size() == 0) throw DataError("dataset is empty");
    if (conditions.size() != size()) {
        throw DataError("dataset has " + std::to_string(size()) + " rows but " +
                        std::to_string(conditions.size()) + " labels");
    }
    for (auto c : conditions) {
        if (c >= num_conditions()) {
            throw DataError("condition " + std::to_string(c) + " outside registry of " +
                            std::to_string(num_conditions()));
        }
    }
    if (targets && targets->size() != size()) throw DataError("target count does not match rows");
}

LabeledDataset gen_crescents(const CrescentSpec& spec, Rng& rng) {
    if (spec.noise_std < 0) throw ConfigError("crescent noise_std must be non-negative");
    if (spec.radii.empty()) throw ConfigError("crescents need at least one radius");
    for (std::size_t k = 1; k < spec.radii.size(); ++k) {
        if (!(spec.radii[k] > spec.radii[k - 1])) {
            throw ConfigError("crescent radii must be strictly increasing");
        }
    }
    const std::size_t classes = spec.radii.size();
    LabeledDataset d;
    d.inputs = Matrix(classes * spec.n_per_class, 2);
    d.conditions.resize(d.inputs.rows());
    for (std::size_t k = 0; k < classes; ++k) {
        d.condition_names.push_back("arc" + std::to_string(k));
        for (std::size_t i = 0; i < spec.n_per_class; ++i) {
            const std::size_t row = k * spec.n_per_class + i;
            const double theta = rng.uniform(0.0, std::numbers::pi);
            double x = spec.radii[k] * std::cos(theta);
            double y = spec.radii[k] * std::sin(theta);
            if (spec.noise_std > 0) {
                x += spec.noise_std * rng.normal();
                y += spec.noise_std * rng.normal();
            }
            d.inputs(row, 0) = x;
            d.inputs(row, 1) = y;
            d.conditions[row] = k;
        }
    }
    d.provenance.source = "crescents";
    d.provenance.generation_noise_std = spec.noise_std;
    return d;
}

LabeledDataset corrupt(const LabeledDataset& dataset, double sigma, std::uint64_t seed) {
    if (sigma < 0) throw ConfigError("corruption sigma must be non-negative");
    if (dataset.provenance.corrupted()) {
        throw DataError("dataset '" + dataset.provenance.source + "' is already corrupted (sigma=" +
                        std::to_string(*dataset.provenance.sigma) + ")");
    }
    LabeledDataset out = dataset;
    Rng rng(seed);
    for (auto& v : out.inputs.values()) v = std::max(0.0, v + sigma * rng.normal());
    out.provenance.sigma = sigma;
    out.provenance.corruption_seed = seed;
    return out;
}

namespace {

std::uint32_t read_be32(std::istream& in, const fs::path& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw DataError("truncated IDX header in " + path.string());
    }
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b, 4);
}

std::ifstream open_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

}  // namespace

LabeledDataset load_idx(const fs::path& images, const fs::path& labels) {
    auto img = open_binary(images);
    if (const auto magic = read_be32(img, images); magic != 0x00000803) {
        std::ostringstream msg;
        msg << "bad IDX image magic 0x" << std::hex << magic << " in " << images.string();
        throw DataError(msg.str());
    }
    const std::uint32_t count = read_be32(img, images);
    const std::uint32_t rows = read_be32(img, images);
    const std::uint32_t cols = read_be32(img, images);
    const std::size_t dim = std::size_t{rows} * cols;
    std::vector<unsigned char> pixels(std::size_t{count} * dim);
    if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()))) {
        throw DataError("truncated IDX image data in " + images.string() + ": expected " +
                        std::to_string(pixels.size()) + " bytes");
    }

    auto lab = open_binary(labels);
    if (const auto magic = read_be32(lab, labels); magic != 0x00000801) {
        std::ostringstream msg;
        msg << "bad IDX label magic 0x" << std::hex << magic << " in " << labels.string();
        throw DataError(msg.str());
    }
    const std::uint32_t label_count = read_be32(lab, labels);
    if (label_count != count) {
        throw DataError("IDX count mismatch: " + std::to_string(count) + " images, " +
                        std::to_string(label_count) + " labels");
    }
    std::vector<unsigned char> raw_labels(count);
    if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(count))) {
        throw DataError("truncated IDX label data in " + labels.string());
    }

    LabeledDataset d;
    d.inputs = Matrix(count, dim);
    for (std::size_t i = 0; i < pixels.size(); ++i) d.inputs[i] = pixels[i] / 255.0;
    d.conditions.assign(raw_labels.begin(), raw_labels.end());
    const std::size_t max_label =
        raw_labels.empty() ? 0 : *std::max_element(raw_labels.begin(), raw_labels.end());
    for (std::size_t c = 0; c <= max_label; ++c) d.condition_names.push_back(std::to_string(c));
    d.provenance.source = "idx:" + images.filename().string();
    d.image_rows = rows;
    d.image_cols = cols;
    return d;
}

void write_idx_images(const fs::path& path, std::span<const std::uint8_t> pixels, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols) {
    if (pixels.size() != std::size_t{count} * rows * cols) {
        throw DataError("pixel buffer does not match IDX dimensions");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_be32(out, 0x00000803);
    write_be32(out, count);
    write_be32(out, rows);
    write_be32(out, cols);
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const fs::path& path, std::span<const std::uint8_t> labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_be32(out, 0x00000801);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string_view rest = line;
    while (true) {
        const auto comma = rest.find(',');
        cells.emplace_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return cells;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

double parse_qualified_value(std::string_view cell) {
    std::string_view s = trim(cell);
    if (s.empty()) throw DataError("empty value");
    if (s.front() == '<' || s.front() == '>' || s.front() == '=') {
        s.remove_prefix(1);
        if (!s.empty() && s.front() == '=') s.remove_prefix(1);
    } else if (!std::isdigit(static_cast<unsigned char>(s.front())) && s.front() != '.' &&
               s.front() != '-' && s.front() != '+') {
        throw DataError("unknown qualifier in '" + std::string(cell) + "'");
    }
    if (auto v = parse_number(s)) return *v;
    throw DataError("non-numeric value '" + std::string(cell) + "'");
}

LabeledDataset load_csv_matrix(const fs::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw DataError("empty CSV file " + path.string());
    const std::vector<std::string> header = split_csv_line(line);

    auto column_of = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("CSV " + path.string() + " has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t cond_col = column_of(schema.condition_column);
    const std::optional<std::size_t> target_col =
        schema.target_column ? std::optional(column_of(*schema.target_column)) : std::nullopt;
    const std::optional<std::size_t> seq_col =
        schema.sequence_column ? std::optional(column_of(*schema.sequence_column)) : std::nullopt;

    std::vector<std::size_t> feature_cols;
    if (!seq_col) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c != cond_col && c != target_col) feature_cols.push_back(c);
        }
    }
    const std::size_t dim = seq_col ? schema.sequence_length : feature_cols.size();

    std::vector<double> values;
    std::vector<std::size_t> conditions;
    std::vector<double> targets;
    std::vector<std::string> names;
    std::map<std::string, std::size_t> registry;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        auto where = [&](std::size_t col) {
            return path.string() + ":" + std::to_string(line_no) + " column '" + header[col] + "'";
        };
        if (cells.size() != header.size()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()));
        }
        const std::string& cond = cells[cond_col];
        auto [it, inserted] = registry.try_emplace(cond, names.size());
        if (inserted) names.push_back(cond);
        conditions.push_back(it->second);

        if (target_col) {
            try {
                targets.push_back(parse_qualified_value(cells[*target_col]));
            } catch (const DataError& e) {
                throw DataError(where(*target_col) + ": " + e.what());
            }
        }
        if (seq_col) {
            try {
                for (auto idx : encode_peptide(cells[*seq_col], schema.sequence_length)) {
                    values.push_back(static_cast<double>(idx));
                }
            } catch (const DataError& e) {
                throw DataError(where(*seq_col) + ": " + e.what());
            }
        } else {
            for (auto c : feature_cols) {
                const auto v = parse_number(cells[c]);
                if (!v) throw DataError(where(c) + ": non-numeric cell '" + cells[c] + "'");
                values.push_back(*v);
            }
        }
    }
    if (conditions.empty()) throw DataError("CSV " + path.string() + " has no data rows");

    LabeledDataset d;
    d.inputs = Matrix(conditions.size(), dim, std::move(values));
    d.conditions = std::move(conditions);
    if (target_col) d.targets = std::move(targets);
    d.condition_names = std::move(names);
    d.provenance.source = "csv:" + path.filename().string();
    return d;
}

NormalizedValues normalize_affinity(std::span<const double> values) {
    if (values.empty()) throw DataError("normalize_affinity needs at least one value");
    NormalizedValues out;
    out.values.reserve(values.size());
    for (double v : values) {
        if (!(v >= 0)) throw DataError("affinity values must be non-negative, got " + std::to_string(v));
        out.values.push_back(std::log2(v + 2.0));
    }
    out.max_log = *std::max_element(out.values.begin(), out.values.end());
    for (auto& x : out.values) x /= out.max_log;
    return out;
}

double denormalize_affinity(double normalized, double max_log) {
    return std::exp2(normalized * max_log) - 2.0;
}

std::pair<LabeledDataset, LabeledDataset> split_80_20(const LabeledDataset& dataset,
                                                      std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (n < 5) throw DataError("80/20 split needs at least 5 rows, got " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    const std::size_t n_train = (n * 8) / 10;
    const std::span<const std::size_t> all(order);
    return {dataset.subset(all.first(n_train)), dataset.subset(all.subspan(n_train))};
}

Matrix UnitScaling::apply(const Matrix& x) const {
    if (x.cols() != lo.size()) throw ShapeError("scaling width does not match data");
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) = (x(i, j) - lo[j]) / (hi[j] - lo[j]);
    }
    return y;
}

Matrix UnitScaling::invert(const Matrix& y) const {
    if (y.cols() != lo.size()) throw ShapeError("scaling width does not match data");
    Matrix x(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i) {
        for (std::size_t j = 0; j < y.cols(); ++j) x(i, j) = lo[j] + y(i, j) * (hi[j] - lo[j]);
    }
    return x;
}

UnitScaling fit_unit_scaling(const Matrix& x) {
    if (x.rows() == 0) throw DataError("cannot fit scaling to an empty matrix");
    UnitScaling s;
    s.lo.assign(x.cols(), 0.0);
    s.hi.assign(x.cols(), 0.0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double lo = x(0, j);
        double hi = x(0, j);
        for (std::size_t i = 1; i < x.rows(); ++i) {
            lo = std::min(lo, x(i, j));
            hi = std::max(hi, x(i, j));
        }
        if (hi == lo) hi = lo + 1.0;
        s.lo[j] = lo;
        s.hi[j] = hi;
    }
    return s;
}

nlohmann::json to_json(const UnitScaling& s) { return {{"lo", s.lo}, {"hi", s.hi}}; }

UnitScaling unit_scaling_from_json(const nlohmann::json& j) {
    UnitScaling s;
    if (j.is_null()) return s;
    s.lo = j.at("lo").get<std::vector<double>>();
    s.hi = j.at("hi").get<std::vector<double>>();
    return s;
}

void write_provenance_sidecar(const fs::path& path, const Provenance& p) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_json(p).dump(2) << '\n';
}

namespace {

constexpr std::size_t kSyntheticAlleles = 8;

struct AffinityWeights {
    double residue[kPeptideSlots][kVocabularySize] = {};
    double slope[kSyntheticAlleles] = {};
    double offset[kSyntheticAlleles] = {};
};

const AffinityWeights& affinity_weights() {
    static const AffinityWeights w = [] {
        AffinityWeights a;
        Rng rng(0x5EEDAFF1);
        for (auto& slot : a.residue) {
            for (std::size_t r = 1; r < kVocabularySize; ++r) slot[r] = rng.normal();
        }
        for (std::size_t k = 0; k < kSyntheticAlleles; ++k) {
            a.slope[k] = rng.uniform(0.6, 1.4);
            a.offset[k] = rng.uniform(-1.0, 1.0);
        }
        return a;
    }();
    return w;
}

}  // namespace

double synthetic_affinity(std::string_view peptide, std::size_t allele) {
    if (allele >= kSyntheticAlleles) {
        throw ConfigError("synthetic affinity supports at most " + std::to_string(kSyntheticAlleles) + " alleles");
    }
    const auto idx = encode_peptide(peptide, kPeptideSlots);
    const AffinityWeights& w = affinity_weights();
    double score = 0.0;
    for (std::size_t p = 0; p < kPeptideSlots; ++p) score += w.residue[p][idx[p]];
    score /= std::sqrt(static_cast<double>(peptide.size()));
    const double t = 1.0 / (1.0 + std::exp(-(w.slope[allele] * score + w.offset[allele])));
    return std::pow(50000.0, 1.0 - t);
}

LabeledDataset gen_synthetic_affinity(const SyntheticAffinitySpec& spec, Rng& rng) {
    if (spec.n == 0 || spec.n_alleles == 0 || spec.n_alleles > kSyntheticAlleles) {
        throw ConfigError("synthetic affinity needs n > 0 and 1.." + std::to_string(kSyntheticAlleles) + " alleles");
    }
    if (spec.min_length == 0 || spec.min_length > spec.max_length || spec.max_length > kPeptideSlots) {
        throw ConfigError("peptide lengths must satisfy 1 <= min <= max <= 11");
    }
    LabeledDataset d;
    d.inputs = Matrix(spec.n, kPeptideSlots);
    std::vector<double> targets;
    targets.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t len = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
        std::string peptide;
        for (std::size_t p = 0; p < len; ++p) peptide.push_back(kAminoAcids[rng.below(kAminoAcids.size())]);
        const std::size_t allele = rng.below(spec.n_alleles);
        const auto idx = encode_peptide(peptide, kPeptideSlots);
        for (std::size_t p = 0; p < kPeptideSlots; ++p) d.inputs(i, p) = static_cast<double>(idx[p]);
        d.conditions.push_back(allele);
        targets.push_back(synthetic_affinity(peptide, allele));
    }
    d.targets = std::move(targets);
    for (std::size_t a = 0; a < spec.n_alleles; ++a) d.condition_names.push_back("allele" + std::to_string(a));
    d.provenance.source = "synthetic-affinity";
    return d;
}

}  // namespace holonet
