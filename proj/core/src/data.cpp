#include "glodismo/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace glodismo {

namespace {

double draw_amplitude(AmplitudeLaw law, Rng& rng) {
    return law == AmplitudeLaw::Gaussian ? rng.gaussian() : rng.beta_int(2, 8);
}

std::uint32_t read_be32(std::istream& in, const std::string& path, std::size_t at) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw std::runtime_error(path + ": truncated IDX header at byte offset " +
                                 std::to_string(at));
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

Tensor gen_sparse(const SyntheticSpec& spec, std::size_t count, Rng& rng) {
    if (spec.s < 1 || spec.s > spec.n)
        throw std::invalid_argument("gen_sparse: 1 <= s <= n required");
    Tensor out({spec.n, count});
    double p = static_cast<double>(spec.s) / static_cast<double>(spec.n);
    std::vector<std::uint32_t> pool(spec.n);
    for (std::size_t b = 0; b < count; ++b) {
        if (spec.mode == SupportMode::BernoulliExpected) {
            for (std::size_t i = 0; i < spec.n; ++i)
                if (rng.uniform() < p)
                    out.at(i, b) = draw_amplitude(spec.law, rng);
        } else {
            // partial Fisher-Yates: first s entries are the support
            for (std::size_t i = 0; i < spec.n; ++i)
                pool[i] = static_cast<std::uint32_t>(i);
            for (std::size_t k = 0; k < spec.s; ++k) {
                std::size_t j = k + rng.below(spec.n - k);
                std::swap(pool[k], pool[j]);
                out.at(pool[k], b) = draw_amplitude(spec.law, rng);
            }
        }
    }
    return out;
}

Tensor gen_strokes(std::size_t count, Rng& rng) {
    constexpr std::size_t H = 28, W = 28;
    Tensor out({H * W, count});
    for (std::size_t b = 0; b < count; ++b) {
        int strokes = 2 + static_cast<int>(rng.below(3));
        for (int s = 0; s < strokes; ++s) {
            // random walk starting near the center, 2x2 pen
            double x = 10.0 + 8.0 * rng.uniform();
            double y = 10.0 + 8.0 * rng.uniform();
            double angle = 2.0 * M_PI * rng.uniform();
            int steps = 8 + static_cast<int>(rng.below(10));
            for (int t = 0; t < steps; ++t) {
                angle += 0.6 * (rng.uniform() - 0.5);
                x += 1.2 * std::cos(angle);
                y += 1.2 * std::sin(angle);
                // the walk is reflected at a margin so strokes stay centered
                if (x < 4.0) { x = 8.0 - x; angle = M_PI - angle; }
                if (x > 24.0) { x = 48.0 - x; angle = M_PI - angle; }
                if (y < 4.0) { y = 8.0 - y; angle = -angle; }
                if (y > 24.0) { y = 48.0 - y; angle = -angle; }
                int xi = static_cast<int>(x), yi = static_cast<int>(y);
                for (int di = 0; di < 2; ++di)
                    for (int dj = 0; dj < 2; ++dj) {
                        int r = yi + di, c = xi + dj;
                        if (r >= 0 && c >= 0 && r < static_cast<int>(H) &&
                            c < static_cast<int>(W))
                            out.at(r * W + c, b) = 1.0;
                    }
            }
        }
    }
    return out;
}

Tensor load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::uint32_t magic = read_be32(in, path, 0);
    if (magic != 0x00000803u)
        throw std::runtime_error(path + ": bad IDX magic at byte offset 0 (got 0x" +
                                 [&] {
                                     char buf[16];
                                     std::snprintf(buf, sizeof buf, "%08x", magic);
                                     return std::string(buf);
                                 }() +
                                 ", want 0x00000803)");
    std::uint32_t count = read_be32(in, path, 4);
    std::uint32_t rows = read_be32(in, path, 8);
    std::uint32_t cols = read_be32(in, path, 12);
    std::size_t n = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> pixels(static_cast<std::size_t>(count) * n);
    in.read(reinterpret_cast<char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != pixels.size())
        throw std::runtime_error(path + ": truncated IDX payload at byte offset " +
                                 std::to_string(16 + in.gcount()));
    Tensor out({n, count});
    for (std::size_t b = 0; b < count; ++b)
        for (std::size_t i = 0; i < n; ++i)
            out.at(i, b) = pixels[b * n + i] / 255.0;
    return out;
}

void save_idx_images(const std::string& path, const Tensor& images,
                     std::size_t height, std::size_t width) {
    if (images.rows() != height * width)
        throw std::invalid_argument("save_idx_images: image size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    write_be32(out, 0x00000803u);
    write_be32(out, static_cast<std::uint32_t>(images.cols()));
    write_be32(out, static_cast<std::uint32_t>(height));
    write_be32(out, static_cast<std::uint32_t>(width));
    for (std::size_t b = 0; b < images.cols(); ++b)
        for (std::size_t i = 0; i < images.rows(); ++i) {
            double v = images.at(i, b);
            int byte = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
            out.put(static_cast<char>(byte));
        }
}

}  // namespace glodismo
