#pragma once

#include "holonet/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace holonet {

/// [0, 1] → [0, 255] by round-half-up; values outside the interval are clamped.
std::uint8_t quantize_pixel(double v);

/// Lays flattened tiles (one per row of `tiles`) out left to right,
/// `per_row` tiles per grid row. Returns a height×width matrix in [0, 1].
Matrix tile_grid(const Matrix& tiles, std::size_t tile_rows, std::size_t tile_cols,
                 std::size_t per_row);

/// Binary greyscale PGM (P5, maxval 255).
std::vector<std::uint8_t> encode_pgm(const Matrix& image);
void write_pgm(const std::filesystem::path& path, const Matrix& image);

}  // namespace holonet
