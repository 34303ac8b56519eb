#include "tracer/harness/idx.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

namespace tracer::harness {
namespace {

[[noreturn]] void malformed(std::size_t offset, const std::string& what) {
    throw TracerError("malformed IDX data at byte offset " + std::to_string(offset) + ": " + what);
}

std::uint32_t read_be32(std::istream& in, std::size_t offset, const char* field) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) malformed(offset, std::string("truncated ") + field);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

std::size_t IdxArray::item_size() const {
    std::size_t n = 1;
    for (std::size_t k = 1; k < dims.size(); ++k) n *= dims[k];
    return n;
}

IdxArray read_idx(std::istream& in) {
    const std::uint32_t magic = read_be32(in, 0, "magic number");
    if ((magic & 0xFFFFFF00u) != 0x00000800u) {
        malformed(0, "bad magic number (only unsigned-byte IDX files are supported)");
    }
    const std::uint32_t ndims = magic & 0xFFu;
    if (ndims == 0) malformed(3, "zero dimensions");
    IdxArray out;
    std::size_t total = 1;
    for (std::uint32_t k = 0; k < ndims; ++k) {
        const std::size_t offset = 4 + 4 * k;
        const std::uint32_t d = read_be32(in, offset, "dimension");
        if (d == 0) malformed(offset, "zero-length dimension");
        out.dims.push_back(d);
        total *= d;
    }
    out.data.resize(total);
    const std::size_t payload = 4 + 4 * static_cast<std::size_t>(ndims);
    if (!in.read(reinterpret_cast<char*>(out.data.data()), static_cast<std::streamsize>(total))) {
        malformed(payload + static_cast<std::size_t>(std::max<std::streamsize>(in.gcount(), 0)),
                  "payload shorter than the header declares");
    }
    return out;
}

IdxArray read_idx(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TracerError("cannot open IDX file " + path.string());
    return read_idx(in);
}

IdxArray read_idx(const std::filesystem::path& path, std::uint32_t expected_magic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TracerError("cannot open IDX file " + path.string());
    const auto magic = read_be32(in, 0, "magic number");
    if (magic != expected_magic) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "expected magic 0x%08X, found 0x%08X", expected_magic, magic);
        malformed(0, buf);
    }
    in.seekg(0);
    return read_idx(in);
}

void write_idx(std::ostream& out, const IdxArray& array) {
    require(!array.dims.empty() && array.dims.size() < 256, "write_idx: bad dimension count");
    write_be32(out, 0x00000800u | static_cast<std::uint32_t>(array.dims.size()));
    for (auto d : array.dims) write_be32(out, d);
    out.write(reinterpret_cast<const char*>(array.data.data()), static_cast<std::streamsize>(array.data.size()));
}

void write_idx(const std::filesystem::path& path, const IdxArray& array) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TracerError("cannot write IDX file " + path.string());
    write_idx(out, array);
}

DataBatch idx_to_batch(const IdxArray& images, const IdxArray& labels, int num_classes) {
    require(num_classes >= 2, "idx: need at least two classes");
    require(images.dims.size() >= 2, "idx: images need at least two dimensions");
    require(labels.dims.size() == 1, "idx: labels must be one-dimensional");
    require(images.count() == labels.count(), "idx: image and label counts differ");
    const auto n = static_cast<Eigen::Index>(images.count());
    const auto d = static_cast<Eigen::Index>(images.item_size());
    DataBatch b;
    b.inputs.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            b.inputs(i, j) = images.data[static_cast<std::size_t>(i * d + j)] / 255.0;
        }
    }
    b.labels.assign(labels.data.begin(), labels.data.end());
    b.num_classes = num_classes;
    b.validate();
    return b;
}

}  // namespace tracer::harness
