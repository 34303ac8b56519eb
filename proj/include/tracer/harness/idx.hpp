#pragma once

#include "tracer/models/data.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

namespace tracer::harness {

/// An unsigned-byte IDX array: big-endian magic 0x000008NN where NN is the
/// number of dimensions, then NN big-endian uint32 sizes, then the payload.
struct IdxArray {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> data;

    std::size_t count() const { return dims.empty() ? 0 : dims.front(); }
    std::size_t item_size() const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Errors carry the byte offset of the offending field.
IdxArray read_idx(std::istream& in);
IdxArray read_idx(const std::filesystem::path& path);
/// As above, additionally requiring the given magic number (for example
/// kIdxImageMagic).
IdxArray read_idx(const std::filesystem::path& path, std::uint32_t expected_magic);

void write_idx(std::ostream& out, const IdxArray& array);
void write_idx(const std::filesystem::path& path, const IdxArray& array);

/// Images (n, rows, cols) scaled to [0, 1] and labels (n) into a
/// classification batch. Labels must be below num_classes.
DataBatch idx_to_batch(const IdxArray& images, const IdxArray& labels, int num_classes);

}  // namespace tracer::harness
