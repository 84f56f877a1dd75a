#ifndef GLODISMO_IO_HPP
#define GLODISMO_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "glodismo/tensor.hpp"

namespace glodismo {

enum class GldmDtype : std::uint32_t { F64 = 0, U8Binary = 1 };

/// Matrix container: 8-byte magic "GLDM0001", u32 LE rank, u32 LE dims,
/// u32 LE dtype tag, row-major payload (f64 or one byte per entry).
void write_gldm(const std::string& path, const Tensor& t, GldmDtype dtype);
Tensor read_gldm(const std::string& path);

/// 8-bit binary PGM (P5), values scaled from [0,1].
void write_pgm(const std::string& path, const Tensor& image,
               std::size_t height, std::size_t width);

/// Metric history row: epoch, split, metric, value, seed.
struct MetricRow {
    int epoch;
    std::string split;
    std::string metric;
    double value;
    std::uint64_t seed;
};

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);

/// FNV-1a 64 over a file's bytes; stable across platforms.
std::uint64_t file_hash(const std::string& path);

/// manifest.txt: one "hash  filename" line per output plus a config hash.
void write_manifest(const std::string& path, std::uint64_t config_hash,
                    const std::vector<std::string>& files);

std::uint64_t fnv1a64(const void* data, std::size_t len);

}  // namespace glodismo

#endif
