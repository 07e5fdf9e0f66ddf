#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ddtrsv/sparse_matrix.hpp"

namespace ddtrsv {

/// Subdomain id per (block) row. Every id occurs rows_per_subdomain times,
/// except the last id, which may hold fewer rows.
struct PartitionLabels {
  std::vector<index_t> labels;
  index_t n_subdomains = 0;
  index_t rows_per_subdomain = 0;
};

/// Throws InvalidArgument unless the labels satisfy the uniform-size rule.
void validate(const PartitionLabels& labels);

/// Paired row maps. Row j of the reordered matrix is row new_to_old[j] of
/// the original; old_to_new is the inverse.
struct Permutation {
  std::vector<index_t> new_to_old;
  std::vector<index_t> old_to_new;

  index_t size() const noexcept { return static_cast<index_t>(new_to_old.size()); }

  static Permutation identity(index_t n);
  /// Builds the inverse; throws InvalidArgument if the map is not a bijection.
  static Permutation from_new_to_old(std::vector<index_t> new_to_old);

  /// Scalar-row permutation moving each block row as a unit.
  Permutation expand(int block_dim) const;
};

/// Contiguous subdomain row ranges of a reordered matrix.
class SubdomainLayout {
 public:
  SubdomainLayout() = default;
  /// offsets.front() == 0, non-decreasing; subdomain s owns [offsets[s], offsets[s+1]).
  explicit SubdomainLayout(std::vector<index_t> offsets);

  static SubdomainLayout single(index_t rows);
  static SubdomainLayout uniform(index_t rows, index_t rows_per_subdomain);
  /// Ranges occupied by each label after labels_to_permutation.
  static SubdomainLayout from_labels(const PartitionLabels& labels);

  index_t count() const noexcept { return static_cast<index_t>(offsets_.size()) - 1; }
  index_t rows() const noexcept { return offsets_.back(); }
  index_t begin(index_t s) const noexcept { return offsets_[s]; }
  index_t end(index_t s) const noexcept { return offsets_[s + 1]; }
  index_t size(index_t s) const noexcept { return offsets_[s + 1] - offsets_[s]; }
  index_t max_size() const noexcept;
  index_t owner(index_t row) const;
  std::span<const index_t> offsets() const noexcept { return offsets_; }

  /// owner(row) for every row, in row order.
  std::vector<index_t> owners() const;

 private:
  std::vector<index_t> offsets_{0};
};

/// Geometric cuts of a structured grid into tiles of `tile` cells. Each
/// grid dimension must be divisible by the matching tile dimension.
PartitionLabels geometric_cuts(const GridSpec& grid, const GridSpec& tile);

/// Greedy breadth-first graph growing into parts of exactly part_size rows
/// (the last part takes the remainder). The pattern is symmetrized first.
/// seed = 0 picks seed rows by lowest index among the least-connected
/// unassigned rows; other seeds break those ties randomly.
template <int B>
PartitionLabels graph_partition_uniform(const BlockSparseMatrix<B>& adjacency, index_t part_size,
                                        std::uint64_t seed = 0);

/// Groups rows by label, label 0 first, ascending original index within a label.
Permutation labels_to_permutation(const PartitionLabels& labels);

/// Labels in reordered row order: labels.labels[perm.new_to_old[j]].
std::vector<index_t> permute_labels(const PartitionLabels& labels, const Permutation& perm);

/// One integer per line.
void write_labels(const PartitionLabels& labels, std::ostream& out);
void write_labels(const PartitionLabels& labels, const std::filesystem::path& path);
/// Reads one integer per line; the subdomain size is inferred from label 0.
PartitionLabels read_labels(std::istream& in);
PartitionLabels read_labels(const std::filesystem::path& path);

}  // namespace ddtrsv
