#include "glodismo/io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace glodismo {

namespace {

constexpr char kMagic[8] = {'G', 'L', 'D', 'M', '0', '0', '0', '1'};

void write_le32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t read_le32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error(path + ": truncated gldm header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

}  // namespace

void write_gldm(const std::string& path, const Tensor& t, GldmDtype dtype) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.write(kMagic, 8);
    write_le32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) write_le32(out, static_cast<std::uint32_t>(d));
    write_le32(out, static_cast<std::uint32_t>(dtype));
    if (dtype == GldmDtype::F64) {
        // f64 payload is the raw little-endian doubles
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    } else {
        for (std::size_t i = 0; i < t.size(); ++i) {
            double v = t[i];
            if (v != 0.0 && v != 1.0)
                throw std::invalid_argument(path + ": non-binary value for u8 payload");
            out.put(v == 1.0 ? '\1' : '\0');
        }
    }
}

Tensor read_gldm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error(path + ": bad gldm magic");
    std::uint32_t rank = read_le32(in, path);
    if (rank > 4) throw std::runtime_error(path + ": implausible gldm rank");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = read_le32(in, path);
    auto dtype = static_cast<GldmDtype>(read_le32(in, path));
    Tensor t(shape);
    if (dtype == GldmDtype::F64) {
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (static_cast<std::size_t>(in.gcount()) != t.size() * sizeof(double))
            throw std::runtime_error(path + ": gldm payload size mismatch");
    } else if (dtype == GldmDtype::U8Binary) {
        std::vector<char> buf(t.size());
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size())
            throw std::runtime_error(path + ": gldm payload size mismatch");
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = buf[i] ? 1.0 : 0.0;
    } else {
        throw std::runtime_error(path + ": unknown gldm dtype tag");
    }
    return t;
}

void write_pgm(const std::string& path, const Tensor& image,
               std::size_t height, std::size_t width) {
    if (image.size() != height * width)
        throw std::invalid_argument("write_pgm: image size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "P5\n" << width << " " << height << "\n255\n";
    for (std::size_t i = 0; i < image.size(); ++i) {
        double v = std::min(std::max(image[i], 0.0), 1.0);
        out.put(static_cast<char>(std::lround(v * 255.0)));
    }
}

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "epoch,split,metric,value,seed\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g", r.value);
        out << r.epoch << ',' << r.split << ',' << r.metric << ',' << buf << ','
            << r.seed << '\n';
    }
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for hashing");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string s = ss.str();
    return fnv1a64(s.data(), s.size());
}

void write_manifest(const std::string& path, std::uint64_t config_hash,
                    const std::vector<std::string>& files) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(config_hash));
    out << "config " << buf << '\n';
    for (const auto& f : files) {
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(file_hash(f)));
        out << buf << "  " << std::filesystem::path(f).filename().string() << '\n';
    }
}

}  // namespace glodismo
