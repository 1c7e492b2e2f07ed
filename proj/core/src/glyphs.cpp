#include "inkcheck/glyphs.hpp"

#include <array>
#include <string_view>

namespace inkcheck::render {

namespace {

// One 9-row pattern per letter, 5 columns each, '#' = ink.
constexpr std::array<std::array<std::string_view, kGlyphRows>, 26> kFont = {{
    // a
    {{".....", ".....", ".###.", "....#", ".####", "#...#", ".####", ".....", "....."}},
    // b
    {{"#....", "#....", "#.##.", "##..#", "#...#", "##..#", "#.##.", ".....", "....."}},
    // c
    {{".....", ".....", ".###.", "#....", "#....", "#....", ".###.", ".....", "....."}},
    // d
    {{"....#", "....#", ".##.#", "#..##", "#...#", "#..##", ".##.#", ".....", "....."}},
    // e
    {{".....", ".....", ".###.", "#...#", "#####", "#....", ".###.", ".....", "....."}},
    // f
    {{"..##.", ".#..#", ".#...", "###..", ".#...", ".#...", ".#...", ".....", "....."}},
    // g
    {{".....", ".....", ".####", "#...#", "#...#", "#...#", ".####", "....#", ".###."}},
    // h
    {{"#....", "#....", "#.##.", "##..#", "#...#", "#...#", "#...#", ".....", "....."}},
    // i
    {{"..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###.", ".....", "....."}},
    // j
    {{"...#.", ".....", "..##.", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
    // k
    {{"#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#.", ".....", "....."}},
    // l
    {{".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.", ".....", "....."}},
    // m
    {{".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".....", "....."}},
    // n
    {{".....", ".....", "#.##.", "##..#", "#...#", "#...#", "#...#", ".....", "....."}},
    // o
    {{".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###.", ".....", "....."}},
    // p
    {{".....", ".....", "#.##.", "##..#", "#...#", "##..#", "#.##.", "#....", "#...."}},
    // q
    {{".....", ".....", ".##.#", "#..##", "#...#", "#..##", ".##.#", "....#", "....#"}},
    // r
    {{".....", ".....", "#.##.", "##..#", "#....", "#....", "#....", ".....", "....."}},
    // s
    {{".....", ".....", ".####", "#....", ".###.", "....#", "####.", ".....", "....."}},
    // t
    {{".#...", ".#...", "####.", ".#...", ".#...", ".#..#", "..##.", ".....", "....."}},
    // u
    {{".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#", ".....", "....."}},
    // v
    {{".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#..", ".....", "....."}},
    // w
    {{".....", ".....", "#...#", "#...#", "#.#.#", "#.#.#", ".#.#.", ".....", "....."}},
    // x
    {{".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", ".....", "....."}},
    // y
    {{".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#", "....#", ".###."}},
    // z
    {{".....", ".....", "#####", "...#.", "..#..", ".#...", "#####", ".....", "....."}},
}};

std::array<Glyph, 26> build_glyphs() {
    std::array<Glyph, 26> out{};
    for (int g = 0; g < 26; ++g)
        for (int r = 0; r < kGlyphRows; ++r)
            for (int c = 0; c < kGlyphCols; ++c)
                out[static_cast<std::size_t>(g)].cells[r][c] = kFont[static_cast<std::size_t>(g)][static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == '#';
    return out;
}

const std::array<Glyph, 26> kGlyphs = build_glyphs();

}  // namespace

bool has_glyph(char c) { return c >= 'a' && c <= 'z'; }

const Glyph& glyph_for(char c) {
    if (!has_glyph(c)) throw EncodingError(std::string("no glyph for character '") + c + "'");
    return kGlyphs[static_cast<std::size_t>(c - 'a')];
}

}  // namespace inkcheck::render
