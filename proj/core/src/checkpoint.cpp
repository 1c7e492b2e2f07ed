#include "inkcheck/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace inkcheck::io {

namespace {

constexpr char kMagic[8] = {'I', 'N', 'K', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError("truncated checkpoint");
    return value;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

const nn::TensorPtr& Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw IoError("checkpoint is missing tensor '" + name + "'");
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(kMagic, sizeof kMagic);
    write_raw(out, kCheckpointVersion);
    write_raw(out, checkpoint.kind);
    write_raw(out, checkpoint.config_digest);
    write_raw(out, checkpoint.extractor_digest);
    write_raw(out, static_cast<std::uint32_t>(checkpoint.tensors.size()));
    for (const auto& [name, tensor] : checkpoint.tensors) {
        write_raw(out, static_cast<std::uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_raw(out, static_cast<std::uint32_t>(tensor->shape.size()));
        for (int d : tensor->shape) write_raw(out, static_cast<std::uint32_t>(d));
        out.write(reinterpret_cast<const char*>(tensor->data.data()),
                  static_cast<std::streamsize>(tensor->data.size() * sizeof(double)));
    }
    if (!out) throw IoError("short write: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw IoError("not a checkpoint file: " + path.string());
    const auto version = read_raw<std::uint32_t>(in);
    if (version != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint ckpt;
    ckpt.kind = read_raw<std::uint32_t>(in);
    ckpt.config_digest = read_raw<std::uint64_t>(in);
    ckpt.extractor_digest = read_raw<std::uint64_t>(in);
    const auto count = read_raw<std::uint32_t>(in);
    ckpt.tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = read_raw<std::uint16_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const auto rank = read_raw<std::uint32_t>(in);
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(read_raw<std::uint32_t>(in));
        auto tensor = nn::Tensor::zeros(shape);
        in.read(reinterpret_cast<char*>(tensor->data.data()),
                static_cast<std::streamsize>(tensor->data.size() * sizeof(double)));
        if (!in) throw IoError("truncated checkpoint: " + path.string());
        ckpt.tensors.emplace_back(std::move(name), std::move(tensor));
    }
    return ckpt;
}

}  // namespace inkcheck::io
