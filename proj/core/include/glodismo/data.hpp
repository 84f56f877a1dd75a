#ifndef GLODISMO_DATA_HPP
#define GLODISMO_DATA_HPP

#include <string>
#include <vector>

#include "glodismo/rng.hpp"
#include "glodismo/tensor.hpp"

namespace glodismo {

enum class SupportMode { BernoulliExpected, ExactWithoutReplacement };
enum class AmplitudeLaw { Gaussian, Beta28 };

struct SyntheticSpec {
    std::size_t n = 0;
    std::size_t s = 0;  // expected (bernoulli) or exact support size
    SupportMode mode = SupportMode::BernoulliExpected;
    AmplitudeLaw law = AmplitudeLaw::Gaussian;
};

/// Batch of sparse vectors as the columns of an n x count matrix.
Tensor gen_sparse(const SyntheticSpec& spec, std::size_t count, Rng& rng);

/// Synthetic 28x28 stroke images in [0,1] (columns of a 784 x count
/// matrix): a few random pen strokes around the image center. Stands in
/// for handwritten-digit data when no IDX dataset is available.
Tensor gen_strokes(std::size_t count, Rng& rng);

/// IDX image container (big-endian header, magic 0x00000803). Returns
/// images as columns of a 784 x count matrix with pixels scaled to [0,1].
Tensor load_idx_images(const std::string& path);

/// IDX writer used by tests and the synthetic-corpus pipeline; emits the
/// standard 0x00000803 container with 8-bit pixels.
void save_idx_images(const std::string& path, const Tensor& images,
                     std::size_t height, std::size_t width);

}  // namespace glodismo

#endif
