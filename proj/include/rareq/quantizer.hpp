#pragma once

#include <cstdint>
#include <vector>

#include "rareq/errors.hpp"
#include "rareq/rng.hpp"
#include "rareq/types.hpp"

namespace rareq {

/// Ordered set of prototype points, one per row.
struct Codebook {
  Matrix prototypes;  // m x d

  Index size() const { return prototypes.rows(); }
  Index dim() const { return prototypes.cols(); }
  void validate() const;
};

/// Output points with their importance-sampling weights, row-aligned.
struct SampleBatch {
  Matrix points;   // n x d
  Vector weights;  // n, nonnegative and finite

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
  void validate() const;

  static SampleBatch unit_weights(Matrix pts);
};

struct LloydConfig {
  Index nb_cells = 1;
  int multistart = 1;
  int max_iter = 100;
  Scalar tol = 1e-8;  // absolute max prototype movement
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

/// Weighted per-cell means and the mass terms of the self-normalized
/// estimator. Cells whose weight sum is zero are flagged empty; their
/// centroid rows are NaN and must not be read.
struct CentroidEstimate {
  Matrix centroids;       // m x d
  Vector cell_weights;    // m, sum of w_k over the cell
  Vector denominators;    // m, cell_weights / total_count
  std::vector<long long> counts;
  long long total_count = 0;
  Scalar total_weight = 0.0;

  Index cells() const { return cell_weights.size(); }
  bool empty(Index j) const { return cell_weights[j] == 0.0; }
  /// Self-normalized cell masses (sum to 1 when total_weight > 0).
  Vector masses() const;
};

/// Streaming per-cell sums against a fixed codebook. Points are folded in
/// one at a time with compensated summation, so the finalized estimate
/// depends only on the concatenated point sequence, not on how it was
/// chunked into add() calls.
class CentroidAccumulator {
 public:
  explicit CentroidAccumulator(Codebook cb);

  void add(const SampleBatch& batch, int threads = 1);
  /// Same, with a precomputed nearest-prototype assignment.
  void add_assigned(const SampleBatch& batch, const IndexVector& assignment);

  CentroidEstimate finalize() const;
  const Codebook& codebook() const { return cb_; }
  long long total_count() const { return total_; }

 private:
  Codebook cb_;
  Matrix num_, num_comp_;
  Vector wsum_, wsum_comp_;
  std::vector<long long> counts_;
  long long total_ = 0;
};

struct IterationStat {
  Scalar distortion = 0.0;
  int empty_recoveries = 0;
};

struct QuantizationResult {
  Codebook codebook;  // cells sorted by increasing first centroid coordinate
  Vector masses;      // self-normalized, aligned with the sorted cells
  Scalar distortion = 0.0;
  std::vector<int> iterations;  // per start
  int winning_start = 0;
  IndexVector assignment;  // nearest sorted cell per input point
  bool converged = false;
  std::vector<IterationStat> trace;  // winning run, one entry per iteration
};

/// Index of the nearest prototype (Euclidean); ties go to the lowest index.
Index assign_cell(const Vector& y, const Codebook& cb);

IndexVector assign_cells(CRef<Matrix> points, const Codebook& cb,
                         int threads = 1);

/// One-shot IS centroid estimate: accumulate the whole batch, finalize.
CentroidEstimate is_centroids(const SampleBatch& batch, const Codebook& cb,
                              int threads = 1);

/// (1/n) sum_k w_k min_j ||y_k - proto_j||^2.
Scalar weighted_distortion(const SampleBatch& batch, const Codebook& cb,
                           int threads = 1);

/// Number of distinct point values carrying positive weight.
Index count_distinct_positive(const SampleBatch& batch);

/// Weight-aware k-means++ seeding: the first prototype is drawn with
/// probability proportional to w_k, later ones proportional to
/// w_k * D^2(y_k). Draws scan points in a canonical (value-sorted) order,
/// so row permutations of the batch do not change the selected codebook.
Codebook kmeanspp_seed(const SampleBatch& batch, Index m, Rng& rng);

/// Lloyd iteration from a given initial codebook: alternate nearest-cell
/// assignment and IS centroid update until the maximum prototype movement
/// drops to tol or max_iter is hit. Cells that lose all weight are refilled
/// with the points contributing most to the distortion.
QuantizationResult lloyd_once(const SampleBatch& batch, const Codebook& init,
                              int max_iter = 100, Scalar tol = 1e-8,
                              int threads = 1);

/// cfg.multistart seeded Lloyd runs; returns the lowest-distortion result
/// with cells sorted by increasing first centroid coordinate.
QuantizationResult find_prototypes(const SampleBatch& batch,
                                   const LloydConfig& cfg);

}  // namespace rareq
