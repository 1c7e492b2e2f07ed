#pragma once

#include <filesystem>

#include "inkcheck/render.hpp"

namespace inkcheck::render {

// Binary PGM (P5, 8-bit). Round-trips WordImage pixels exactly.
void write_pgm(const WordImage& image, const std::filesystem::path& path);
WordImage read_pgm(const std::filesystem::path& path);

}  // namespace inkcheck::render
