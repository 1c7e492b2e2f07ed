#pragma once

#include "inkcheck/errors.hpp"

namespace inkcheck::render {

// Built-in bitmap font: 5x9 cells per lowercase letter. Rows 0-6 hold the
// body (baseline under row 6), rows 7-8 the descenders.
inline constexpr int kGlyphCols = 5;
inline constexpr int kGlyphRows = 9;

struct Glyph {
    bool cells[kGlyphRows][kGlyphCols];
};

bool has_glyph(char c);
// Throws EncodingError naming the character if there is no glyph for it.
const Glyph& glyph_for(char c);

}  // namespace inkcheck::render
