#include "tracer/harness/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace tracer::harness {
namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t out = 0;
        for (int k = 0; k < 8; ++k) out |= ((v >> (8 * k)) & 0xFFu) << (8 * (7 - k));
        return out;
    }
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    auto s = path;
    s += ".json";
    return s;
}

void write_checkpoint(const std::filesystem::path& path, const ParamVector& params, nlohmann::json sidecar) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TracerError("cannot write checkpoint " + path.string());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(params(i)));
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    sidecar["p"] = params.size();
    std::ofstream meta(sidecar_path(path));
    if (!meta) throw TracerError("cannot write checkpoint sidecar for " + path.string());
    meta << sidecar.dump(2) << '\n';
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    Checkpoint c;
    std::ifstream meta(sidecar_path(path));
    if (!meta) throw TracerError("missing checkpoint sidecar " + sidecar_path(path).string());
    meta >> c.sidecar;
    const auto p = c.sidecar.at("p").get<Eigen::Index>();

    std::ifstream in(path, std::ios::binary);
    if (!in) throw TracerError("cannot open checkpoint " + path.string());
    c.params.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        std::uint64_t bits = 0;
        if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
            throw TracerError("checkpoint " + path.string() + " is shorter than p = " + std::to_string(p));
        }
        c.params(i) = std::bit_cast<double>(to_little_endian(bits));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw TracerError("checkpoint " + path.string() + " is longer than p = " + std::to_string(p));
    }
    return c;
}

}  // namespace tracer::harness
