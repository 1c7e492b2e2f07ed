#include "inkcheck/pgm.hpp"

#include <fstream>

namespace inkcheck::render {

void write_pgm(const WordImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("short write: " + path.string());
}

WordImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("not a binary PGM: " + path.string());
    int width = 0, height = 0, maxval = 0;
    in >> width >> height >> maxval;
    if (!in || width <= 0 || height <= 0 || maxval != 255)
        throw IoError("unsupported PGM header: " + path.string());
    in.get();  // single whitespace after the header
    WordImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw IoError("truncated PGM: " + path.string());
    return img;
}

}  // namespace inkcheck::render
