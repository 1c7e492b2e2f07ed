#include "inkcheck/render.hpp"

#include <algorithm>
#include <cmath>

#include "inkcheck/glyphs.hpp"

namespace inkcheck::render {

namespace {

// Cell geometry. The per-character advance is fixed: style scale varies the
// glyph height (and the width a little through shear), not the pen pitch,
// like ruled-paper handwriting. A constant pitch also keeps each character
// at a predictable image column, which is what lets recognition features
// line up against the character index axis downstream.
constexpr double kCellW = 1.5;
constexpr double kCellH = 2.4;
constexpr double kAdvancePx = 8.0;
constexpr double kLeftMargin = 4.0;
constexpr double kMaxSlant = 0.35;
constexpr double kMaxScale = 1.2;

double glyph_advance(double) { return kAdvancePx; }

std::vector<double> dilate4(const std::vector<double>& src, int w, int h) {
    std::vector<double> out(src.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = src[static_cast<std::size_t>(y) * w + x];
            if (x > 0) v = std::max(v, src[static_cast<std::size_t>(y) * w + x - 1]);
            if (x + 1 < w) v = std::max(v, src[static_cast<std::size_t>(y) * w + x + 1]);
            if (y > 0) v = std::max(v, src[static_cast<std::size_t>(y - 1) * w + x]);
            if (y + 1 < h) v = std::max(v, src[static_cast<std::size_t>(y + 1) * w + x]);
            out[static_cast<std::size_t>(y) * w + x] = v;
        }
    return out;
}

}  // namespace

StyleParams sample_style(Rng& rng) {
    StyleParams s;
    s.slant = rng.uniform(-kMaxSlant, kMaxSlant);
    s.stroke_thickness = rng.uniform(1.0, 3.0);
    s.baseline_jitter = rng.uniform(0.0, 2.0);
    s.scale = rng.uniform(0.8, kMaxScale);
    s.ink_noise = rng.uniform(0.0, 0.1);
    return s;
}

int max_renderable_chars(const CanvasConfig& canvas) {
    const double advance = glyph_advance(kMaxScale);
    const double shear_extent = std::tan(kMaxSlant) * kGlyphRows * kCellH * kMaxScale;
    const double usable = canvas.width - kLeftMargin - shear_extent - 2.0;
    return static_cast<int>(usable / advance);
}

WordImage render_word(const std::string& text, const StyleParams& style, std::uint64_t seed,
                      const CanvasConfig& canvas) {
    if (text.empty()) throw ArgumentError("render_word: empty text");
    for (char c : text) glyph_for(c);  // validates before any work

    const int w = canvas.width, h = canvas.height;
    const double scale = style.scale;
    const double advance = glyph_advance(scale);
    const double shear = std::tan(style.slant);
    const double glyph_h = kGlyphRows * kCellH * scale;
    const double shear_extent = std::abs(shear) * glyph_h;
    const double needed = kLeftMargin + advance * static_cast<double>(text.size()) + shear_extent + 2.0;
    if (needed > w)
        throw ArgumentError("render_word: text '" + text + "' overflows the canvas width");

    Rng rng(seed);
    std::vector<double> ink(static_cast<std::size_t>(w) * h, 0.0);

    // Cell row 4 sits at the vertical canvas center; the baseline is under
    // row 6.
    const double y_top_base = h * 0.5 - 4.5 * kCellH * scale;
    const double baseline = y_top_base + 7.0 * kCellH * scale;
    // Shift right when the slant leans left so sheared pixels stay on canvas.
    const double pen_origin = kLeftMargin + (shear < 0.0 ? shear_extent : 0.0);

    for (std::size_t ci = 0; ci < text.size(); ++ci) {
        const Glyph& glyph = glyph_for(text[ci]);
        const double jitter_dy = rng.gauss() * style.baseline_jitter;
        const double pen_x = pen_origin + advance * static_cast<double>(ci);
        const double y_top = y_top_base + jitter_dy;

        const int x_lo = std::max(0, static_cast<int>(std::floor(pen_x - shear_extent)) - 1);
        const int x_hi = std::min(w - 1, static_cast<int>(std::ceil(pen_x + kGlyphCols * kCellW + shear_extent)) + 1);
        const int y_lo = std::max(0, static_cast<int>(std::floor(y_top)) - 1);
        const int y_hi = std::min(h - 1, static_cast<int>(std::ceil(y_top + glyph_h)) + 1);

        for (int py = y_lo; py <= y_hi; ++py)
            for (int px = x_lo; px <= x_hi; ++px) {
                // 2x2 subsamples; coverage in {0, .25, .5, .75, 1}.
                int hits = 0;
                for (int sy = 0; sy < 2; ++sy)
                    for (int sx = 0; sx < 2; ++sx) {
                        const double y = py + 0.25 + 0.5 * sy;
                        const double x = px + 0.25 + 0.5 * sx;
                        const double x_unsheared = x - (baseline - y) * shear;
                        const double u = (x_unsheared - pen_x) / kCellW;
                        const double v = (y - y_top) / (kCellH * scale);
                        if (u < 0.0 || v < 0.0) continue;
                        const int cu = static_cast<int>(u);
                        const int cv = static_cast<int>(v);
                        if (cu >= kGlyphCols || cv >= kGlyphRows) continue;
                        if (glyph.cells[cv][cu]) ++hits;
                    }
                if (hits > 0) {
                    auto& cell = ink[static_cast<std::size_t>(py) * w + px];
                    cell = std::max(cell, hits * 0.25);
                }
            }
    }

    // Stroke thickness: the base stroke is one glyph cell (~1.3-1.9 px);
    // blend in a partial 4-neighbour dilation so the full width approaches
    // the requested pixel count without closing glyph counters.
    const double blend = (std::clamp(style.stroke_thickness, 1.0, 3.0) - 1.0) / 4.0;
    if (blend > 0.0) {
        const auto dil = dilate4(ink, w, h);
        for (std::size_t i = 0; i < ink.size(); ++i) ink[i] = std::max(ink[i], blend * dil[i]);
    }

    if (style.ink_noise > 0.0) {
        for (auto& v : ink) v = std::clamp(v + rng.gauss() * style.ink_noise, 0.0, 1.0);
    }

    WordImage img;
    img.height = h;
    img.width = w;
    img.pixels.resize(ink.size());
    for (std::size_t i = 0; i < ink.size(); ++i)
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(ink[i], 0.0, 1.0) * 255.0));
    return img;
}

nn::TensorPtr one_hot_encode(const std::string& text, const Alphabet& alphabet, int time_steps) {
    if (static_cast<int>(text.size()) > time_steps)
        throw EncodingError("one_hot_encode: text longer than the available rows");
    auto out = nn::Tensor::zeros({time_steps, alphabet.size()});
    for (std::size_t i = 0; i < text.size(); ++i)
        out->at(static_cast<int>(i), alphabet.index_of(text[i])) = 1.0;
    return out;
}

nn::TensorPtr image_to_tensor(const WordImage& image) {
    auto out = nn::Tensor::zeros({image.height, image.width, 1});
    for (std::size_t i = 0; i < image.pixels.size(); ++i) out->data[i] = image.pixels[i] / 255.0;
    return out;
}

}  // namespace inkcheck::render
