#ifndef GLODISMO_PARTITION_HPP
#define GLODISMO_PARTITION_HPP

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace glodismo {

/// Disjoint cover of the flat index grid {0..m*n-1} with a keep count per
/// subset. Encodes which entries of a mask compete for ones.
class Partition {
public:
    Partition(std::size_t rows, std::size_t cols,
              std::vector<std::vector<std::uint32_t>> subsets,
              std::vector<std::size_t> keep_counts)
        : rows_(rows), cols_(cols),
          subsets_(std::move(subsets)), keep_(std::move(keep_counts)) {
        validate();
    }

    /// One subset per row, d ones each (pixel masks, pooling matrices).
    static Partition rows(std::size_t m, std::size_t n, std::size_t d) {
        std::vector<std::vector<std::uint32_t>> subsets(m);
        for (std::size_t i = 0; i < m; ++i) {
            subsets[i].resize(n);
            for (std::size_t j = 0; j < n; ++j)
                subsets[i][j] = static_cast<std::uint32_t>(i * n + j);
        }
        return Partition(m, n, std::move(subsets), std::vector<std::size_t>(m, d));
    }

    /// One subset per column, d ones each (left-d-regular graphs).
    static Partition columns(std::size_t m, std::size_t n, std::size_t d) {
        std::vector<std::vector<std::uint32_t>> subsets(n);
        for (std::size_t j = 0; j < n; ++j) {
            subsets[j].resize(m);
            for (std::size_t i = 0; i < m; ++i)
                subsets[j][i] = static_cast<std::uint32_t>(i * n + j);
        }
        return Partition(m, n, std::move(subsets), std::vector<std::size_t>(n, d));
    }

    /// A single subset covering a length-n vector, d ones total
    /// (circulant generators, row-selection masks).
    static Partition whole(std::size_t n, std::size_t d) {
        std::vector<std::uint32_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<std::uint32_t>(i);
        return Partition(n, 1, {std::move(all)}, {d});
    }

    std::size_t grid_rows() const { return rows_; }
    std::size_t grid_cols() const { return cols_; }
    std::size_t grid_size() const { return rows_ * cols_; }
    std::size_t num_subsets() const { return subsets_.size(); }
    const std::vector<std::uint32_t>& subset(std::size_t i) const { return subsets_[i]; }
    std::size_t keep(std::size_t i) const { return keep_[i]; }

private:
    void validate() const {
        if (subsets_.size() != keep_.size())
            throw std::invalid_argument("Partition: subset/keep count mismatch");
        std::vector<char> seen(rows_ * cols_, 0);
        std::size_t total = 0;
        for (std::size_t i = 0; i < subsets_.size(); ++i) {
            const auto& s = subsets_[i];
            if (s.empty())
                throw std::invalid_argument("Partition: empty subset");
            if (keep_[i] < 1 || keep_[i] > s.size())
                throw std::invalid_argument("Partition: keep count out of range");
            for (auto idx : s) {
                if (idx >= rows_ * cols_ || seen[idx])
                    throw std::invalid_argument("Partition: subsets not a disjoint cover");
                seen[idx] = 1;
            }
            total += s.size();
        }
        if (total != rows_ * cols_)
            throw std::invalid_argument("Partition: subsets do not cover the grid");
    }

    std::size_t rows_, cols_;
    std::vector<std::vector<std::uint32_t>> subsets_;
    std::vector<std::size_t> keep_;
};

}  // namespace glodismo

#endif
