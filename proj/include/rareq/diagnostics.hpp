#pragma once

#include <vector>

#include "rareq/quantizer.hpp"
#include "rareq/types.hpp"

namespace rareq {

/// Standard deviation of the centroid estimator for one cell, measured
/// across evaluation batches. `present` is false when fewer than two
/// batches contained the cell, in which case `std` must not be read.
struct CellStd {
  Index cell = 0;  // index into the canonically sorted codebook
  bool present = false;
  Vector std;  // d entries, per coordinate
  Index effective_batches = 0;
};

struct CentroidStdReport {
  Index nv = 0;       // points per batch
  Index batches = 0;  // floor(N / nv)
  /// One entry per input codebook, holding the requested cells in the
  /// sorted order of that codebook.
  std::vector<std::vector<CellStd>> codebooks;
};

/// Splits the first batches*nv points of `data`, in order, into consecutive
/// batches of nv points, computes the IS centroid of every batch against
/// each (canonically sorted) codebook, and reports per-cell per-coordinate
/// sample standard deviations across the batches where the cell was
/// non-empty. Leftover points beyond batches*nv are ignored.
CentroidStdReport std_centroid(const SampleBatch& data,
                               const std::vector<Codebook>& prototypes_list,
                               const std::vector<Index>& cells, Index nv,
                               int threads = 1);

struct MassEstimate {
  Vector unnormalized;  // (1/n) sum of w over each cell, unbiased under IS
  Vector normalized;    // self-normalized variant, sums to 1
};

MassEstimate estimate_cell_masses(const SampleBatch& batch, const Codebook& cb,
                                  int threads = 1);

}  // namespace rareq
