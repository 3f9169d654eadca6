#include "holonet/image.hpp"

#include "holonet/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace holonet {

std::uint8_t quantize_pixel(double v) {
    if (!(v > 0.0)) return 0;
    if (v >= 1.0) return 255;
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

Matrix tile_grid(const Matrix& tiles, std::size_t tile_rows, std::size_t tile_cols, std::size_t per_row) {
    if (tile_rows * tile_cols != tiles.cols()) {
        throw ShapeError("tiles of width " + std::to_string(tiles.cols()) + " are not " +
                         std::to_string(tile_rows) + "x" + std::to_string(tile_cols) + " images");
    }
    if (per_row == 0 || tiles.rows() == 0) throw ConfigError("tile grid needs at least one tile per row");
    const std::size_t grid_rows = (tiles.rows() + per_row - 1) / per_row;
    Matrix out(grid_rows * tile_rows, std::min(per_row, tiles.rows()) * tile_cols);
    for (std::size_t t = 0; t < tiles.rows(); ++t) {
        const std::size_t top = (t / per_row) * tile_rows;
        const std::size_t left = (t % per_row) * tile_cols;
        for (std::size_t r = 0; r < tile_rows; ++r) {
            for (std::size_t c = 0; c < tile_cols; ++c) out(top + r, left + c) = tiles(t, r * tile_cols + c);
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_pgm(const Matrix& image) {
    const std::string header =
        "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + image.size());
    for (double v : image.values()) out.push_back(quantize_pixel(v));
    return out;
}

void write_pgm(const std::filesystem::path& path, const Matrix& image) {
    const auto bytes = encode_pgm(image);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("failed writing " + path.string());
}

}  // namespace holonet
