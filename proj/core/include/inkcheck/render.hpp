#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inkcheck/alphabet.hpp"
#include "inkcheck/rng.hpp"
#include "inkcheck/tensor.hpp"

namespace inkcheck::render {

// Handwriting style knobs; sample_style draws each uniformly from its range.
struct StyleParams {
    double slant = 0.0;             // radians in [-0.35, 0.35]
    double stroke_thickness = 1.0;  // pixels in [1, 3]
    double baseline_jitter = 0.0;   // per-glyph vertical jitter std-dev, [0, 2] px
    double scale = 1.0;             // relative glyph height in [0.8, 1.2]
    double ink_noise = 0.0;         // per-pixel additive noise std-dev, [0, 0.1]
};

// Grayscale word image on a fixed canvas, quantized to 8 bit. value() maps
// back to [0,1] where 1 is full ink; the background is 0.
struct WordImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;  // row-major, 255 = full ink

    double value(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x] / 255.0;
    }
    bool operator==(const WordImage&) const = default;
};

struct CanvasConfig {
    int height = 32;
    int width = 128;
};

StyleParams sample_style(Rng& rng);

// Longest text guaranteed to fit the canvas at any style in range.
int max_renderable_chars(const CanvasConfig& canvas = {});

// Rasterizes bitmap glyphs left to right with shear, per-glyph vertical
// jitter, stroke dilation and additive clipped ink noise. Pure function of
// (text, style, seed). Throws EncodingError for unknown glyphs and
// ArgumentError when the styled text would overflow the canvas.
WordImage render_word(const std::string& text, const StyleParams& style, std::uint64_t seed,
                      const CanvasConfig& canvas = {});

// Row i one-hot encodes text[i]; rows beyond the text length stay zero.
// Result shape [time_steps, alphabet.size()].
nn::TensorPtr one_hot_encode(const std::string& text, const Alphabet& alphabet, int time_steps);

// [H,W,1] tensor with values in [0,1].
nn::TensorPtr image_to_tensor(const WordImage& image);

}  // namespace inkcheck::render
