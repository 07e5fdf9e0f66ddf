#include "ddtrsv/partition.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <tuple>

namespace ddtrsv {

void validate(const PartitionLabels& p) {
  const auto n = static_cast<index_t>(p.labels.size());
  if (n == 0) {
    if (p.n_subdomains != 0) throw InvalidArgument("empty labels with nonzero subdomain count");
    return;
  }
  if (p.rows_per_subdomain < 1) throw InvalidArgument("rows_per_subdomain must be >= 1");
  const index_t expected = (n + p.rows_per_subdomain - 1) / p.rows_per_subdomain;
  if (p.n_subdomains != expected) {
    throw InvalidArgument("expected " + std::to_string(expected) + " subdomains, got " +
                          std::to_string(p.n_subdomains));
  }
  std::vector<index_t> counts(static_cast<std::size_t>(p.n_subdomains), 0);
  for (index_t l : p.labels) {
    if (l < 0 || l >= p.n_subdomains) throw InvalidArgument("label " + std::to_string(l) + " out of range");
    ++counts[l];
  }
  for (index_t s = 0; s < p.n_subdomains; ++s) {
    const bool last = s + 1 == p.n_subdomains;
    const index_t want = last ? n - s * p.rows_per_subdomain : p.rows_per_subdomain;
    if (counts[s] != want) {
      throw InvalidArgument("subdomain " + std::to_string(s) + " has " + std::to_string(counts[s]) +
                            " rows, expected " + std::to_string(want));
    }
  }
}

Permutation Permutation::identity(index_t n) {
  Permutation p;
  p.new_to_old.resize(static_cast<std::size_t>(n));
  std::iota(p.new_to_old.begin(), p.new_to_old.end(), index_t{0});
  p.old_to_new = p.new_to_old;
  return p;
}

Permutation Permutation::from_new_to_old(std::vector<index_t> new_to_old) {
  Permutation p;
  const auto n = static_cast<index_t>(new_to_old.size());
  p.old_to_new.assign(static_cast<std::size_t>(n), -1);
  for (index_t j = 0; j < n; ++j) {
    const index_t old = new_to_old[j];
    if (old < 0 || old >= n || p.old_to_new[old] != -1) throw InvalidArgument("permutation is not a bijection");
    p.old_to_new[old] = j;
  }
  p.new_to_old = std::move(new_to_old);
  return p;
}

Permutation Permutation::expand(int block_dim) const {
  std::vector<index_t> scalar(new_to_old.size() * block_dim);
  for (std::size_t j = 0; j < new_to_old.size(); ++j)
    for (int d = 0; d < block_dim; ++d) scalar[j * block_dim + d] = new_to_old[j] * block_dim + d;
  return from_new_to_old(std::move(scalar));
}

SubdomainLayout::SubdomainLayout(std::vector<index_t> offsets) : offsets_(std::move(offsets)) {
  if (offsets_.empty() || offsets_.front() != 0) throw InvalidArgument("layout offsets must start at 0");
  if (!std::is_sorted(offsets_.begin(), offsets_.end())) throw InvalidArgument("layout offsets must be sorted");
}

SubdomainLayout SubdomainLayout::single(index_t rows) {
  return SubdomainLayout(rows > 0 ? std::vector<index_t>{0, rows} : std::vector<index_t>{0});
}

SubdomainLayout SubdomainLayout::uniform(index_t rows, index_t rows_per_subdomain) {
  if (rows_per_subdomain < 1) throw InvalidArgument("rows_per_subdomain must be >= 1");
  std::vector<index_t> offsets{0};
  for (index_t r = 0; r < rows; r += rows_per_subdomain) offsets.push_back(std::min(rows, r + rows_per_subdomain));
  return SubdomainLayout(std::move(offsets));
}

SubdomainLayout SubdomainLayout::from_labels(const PartitionLabels& labels) {
  std::vector<index_t> offsets(static_cast<std::size_t>(labels.n_subdomains + 1), 0);
  for (index_t l : labels.labels) ++offsets[l + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SubdomainLayout(std::move(offsets));
}

index_t SubdomainLayout::max_size() const noexcept {
  index_t m = 0;
  for (index_t s = 0; s < count(); ++s) m = std::max(m, size(s));
  return m;
}

index_t SubdomainLayout::owner(index_t row) const {
  if (row < 0 || row >= rows()) throw InvalidArgument("row outside layout");
  // Last offset <= row whose range is non-empty.
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), row);
  return static_cast<index_t>(it - offsets_.begin()) - 1;
}

std::vector<index_t> SubdomainLayout::owners() const {
  std::vector<index_t> out(static_cast<std::size_t>(rows()));
  for (index_t s = 0; s < count(); ++s) std::fill(out.begin() + begin(s), out.begin() + end(s), s);
  return out;
}

PartitionLabels geometric_cuts(const GridSpec& grid, const GridSpec& tile) {
  check_grid(grid, 1);
  if (tile.nx < 1 || tile.ny < 1 || tile.nz < 1) throw InvalidArgument("tile dimensions must be >= 1");
  if (grid.nx % tile.nx != 0 || grid.ny % tile.ny != 0 || grid.nz % tile.nz != 0)
    throw InvalidArgument("grid dimensions must be divisible by the tile dimensions");

  const index_t bx = grid.nx / tile.nx;
  const index_t by = grid.ny / tile.ny;
  const index_t bz = grid.nz / tile.nz;

  PartitionLabels out;
  out.labels.resize(static_cast<std::size_t>(grid.size()));
  out.n_subdomains = bx * by * bz;
  out.rows_per_subdomain = tile.size();
  for (index_t i = 0; i < grid.nx; ++i) {
    const index_t ibx = i / tile.nx;
    for (index_t j = 0; j < grid.ny; ++j) {
      const index_t jby = j / tile.ny;
      for (index_t k = 0; k < grid.nz; ++k) {
        const index_t kbz = k / tile.nz;
        out.labels[grid.index(i, j, k)] = ibx + bx * (jby + by * kbz);
      }
    }
  }
  return out;
}

namespace {

// Symmetrized adjacency lists without self loops.
template <int B>
std::vector<std::vector<index_t>> symmetric_adjacency(const BlockSparseMatrix<B>& a) {
  const index_t n = a.n_block_rows;
  std::vector<std::vector<index_t>> adj(static_cast<std::size_t>(n));
  for (index_t r = 0; r < n; ++r)
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const index_t c = a.col_idx[k];
      if (c == r || c >= n) continue;
      adj[r].push_back(c);
      adj[c].push_back(r);
    }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

}  // namespace

template <int B>
PartitionLabels graph_partition_uniform(const BlockSparseMatrix<B>& adjacency, index_t part_size,
                                        std::uint64_t seed) {
  if (part_size < 1) throw InvalidArgument("part size must be >= 1");
  if (adjacency.n_block_rows != adjacency.n_block_cols) throw DimensionError("adjacency matrix must be square");
  const index_t n = adjacency.n_block_rows;
  const auto adj = symmetric_adjacency(adjacency);

  std::vector<std::uint64_t> priority(static_cast<std::size_t>(n), 0);
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    for (auto& p : priority) p = rng();
  }

  // Seed candidates ordered by (unassigned neighbors, tie-break, row).
  std::vector<index_t> free_degree(static_cast<std::size_t>(n));
  using Key = std::tuple<index_t, std::uint64_t, index_t>;
  std::set<Key> candidates;
  for (index_t v = 0; v < n; ++v) {
    free_degree[v] = static_cast<index_t>(adj[v].size());
    candidates.emplace(free_degree[v], priority[v], v);
  }

  PartitionLabels out;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  out.rows_per_subdomain = part_size;
  out.n_subdomains = (n + part_size - 1) / part_size;

  std::vector<char> queued(static_cast<std::size_t>(n), 0);
  std::deque<index_t> frontier;
  for (index_t part = 0; part < out.n_subdomains; ++part) {
    const index_t target = std::min(part_size, n - part * part_size);
    index_t filled = 0;
    while (filled < target) {
      if (frontier.empty()) {
        const index_t s = std::get<2>(*candidates.begin());
        frontier.push_back(s);
        queued[s] = 1;
      }
      const index_t v = frontier.front();
      frontier.pop_front();
      if (out.labels[v] >= 0) continue;
      out.labels[v] = part;
      ++filled;
      candidates.erase(Key{free_degree[v], priority[v], v});
      for (index_t u : adj[v]) {
        if (out.labels[u] >= 0) continue;
        candidates.erase(Key{free_degree[u], priority[u], u});
        --free_degree[u];
        candidates.emplace(free_degree[u], priority[u], u);
        if (!queued[u]) {
          queued[u] = 1;
          frontier.push_back(u);
        }
      }
    }
    for (index_t v : frontier) queued[v] = 0;
    frontier.clear();
  }
  return out;
}

template PartitionLabels graph_partition_uniform(const BlockSparseMatrix<1>&, index_t, std::uint64_t);
template PartitionLabels graph_partition_uniform(const BlockSparseMatrix<3>&, index_t, std::uint64_t);

Permutation labels_to_permutation(const PartitionLabels& labels) {
  std::vector<index_t> start(static_cast<std::size_t>(labels.n_subdomains + 1), 0);
  for (index_t l : labels.labels) {
    if (l < 0 || l >= labels.n_subdomains) throw InvalidArgument("label out of range");
    ++start[l + 1];
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<index_t> new_to_old(labels.labels.size());
  for (std::size_t old = 0; old < labels.labels.size(); ++old)
    new_to_old[start[labels.labels[old]]++] = static_cast<index_t>(old);
  return Permutation::from_new_to_old(std::move(new_to_old));
}

std::vector<index_t> permute_labels(const PartitionLabels& labels, const Permutation& perm) {
  if (perm.size() != static_cast<index_t>(labels.labels.size()))
    throw DimensionError("permutation length does not match labels");
  std::vector<index_t> out(labels.labels.size());
  for (index_t j = 0; j < perm.size(); ++j) out[j] = labels.labels[perm.new_to_old[j]];
  return out;
}

void write_labels(const PartitionLabels& labels, std::ostream& out) {
  for (index_t l : labels.labels) out << l << '\n';
}

void write_labels(const PartitionLabels& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_labels(labels, out);
}

PartitionLabels read_labels(std::istream& in) {
  PartitionLabels out;
  index_t l = 0;
  index_t max_label = -1;
  while (in >> l) {
    out.labels.push_back(l);
    max_label = std::max(max_label, l);
  }
  if (!in.eof()) throw InvalidArgument("labels file holds a non-integer token");
  out.n_subdomains = max_label + 1;
  out.rows_per_subdomain = static_cast<index_t>(std::count(out.labels.begin(), out.labels.end(), 0));
  validate(out);
  return out;
}

PartitionLabels read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_labels(in);
}

}  // namespace ddtrsv
