#include "rareq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace rareq {

namespace {

void kahan_add(Scalar& sum, Scalar& comp, Scalar value) {
  const Scalar y = value - comp;
  const Scalar t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

// Chunk bounds for deterministic parallel reductions: chunk i of nchunks
// covers [lo, hi) and depends only on (n, nchunks).
std::pair<Index, Index> chunk_bounds(Index n, int nchunks, int i) {
  const Index lo = n * i / nchunks;
  const Index hi = n * (i + 1) / nchunks;
  return {lo, hi};
}

template <class Fn>
void run_chunked(Index n, int threads, Fn&& body) {
  if (threads <= 1 || n == 0) {
    body(0, Index{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int i = 0; i < threads; ++i) {
    auto [lo, hi] = chunk_bounds(n, threads, i);
    pool.emplace_back([&body, i, lo = lo, hi = hi] { body(i, lo, hi); });
  }
  for (auto& t : pool) t.join();
}

template <class Derived>
Index nearest_row(const Matrix& protos, const Eigen::MatrixBase<Derived>& y) {
  Index best = 0;
  Scalar best_d = (protos.row(0) - y).squaredNorm();
  for (Index j = 1; j < protos.rows(); ++j) {
    const Scalar d = (protos.row(j) - y).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

// Lexicographic comparison of two point rows.
bool row_less(const Matrix& pts, Index i, Index j) {
  for (Index c = 0; c < pts.cols(); ++c) {
    if (pts(i, c) < pts(j, c)) return true;
    if (pts(i, c) > pts(j, c)) return false;
  }
  return false;
}

bool row_equal(const Matrix& pts, Index i, Index j) {
  return !row_less(pts, i, j) && !row_less(pts, j, i);
}

// Point indices sorted by (coordinates, weight); gives a batch-order
// independent scan order for seeding.
std::vector<Index> canonical_order(const SampleBatch& batch) {
  std::vector<Index> order(static_cast<size_t>(batch.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index i, Index j) {
    if (row_less(batch.points, i, j)) return true;
    if (row_less(batch.points, j, i)) return false;
    return batch.weights[i] < batch.weights[j];
  });
  return order;
}

void check_lloyd_preconditions(const SampleBatch& batch, Index m) {
  if (m < 1) throw input_error("lloyd: nb_cells must be >= 1");
  if (!(batch.weights.sum() > 0.0)) {
    throw input_error("lloyd: all weights are zero");
  }
  const Index distinct = count_distinct_positive(batch);
  if (distinct < m) {
    std::ostringstream os;
    os << "lloyd: " << m << " cells requested but only " << distinct
       << " distinct points carry positive weight";
    throw input_error(os.str());
  }
}

std::vector<Index> sort_permutation(const Matrix& protos) {
  std::vector<Index> perm(static_cast<size_t>(protos.rows()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](Index i, Index j) { return row_less(protos, i, j); });
  return perm;
}

// Reorders cells by increasing first centroid coordinate (lexicographic on
// ties) and remaps the assignment accordingly.
void canonicalize_result(QuantizationResult& res) {
  const auto perm = sort_permutation(res.codebook.prototypes);
  const Index m = res.codebook.size();
  Matrix protos(m, res.codebook.dim());
  Vector masses(m);
  IndexVector inverse(m);
  for (Index j = 0; j < m; ++j) {
    protos.row(j) = res.codebook.prototypes.row(perm[static_cast<size_t>(j)]);
    masses[j] = res.masses[perm[static_cast<size_t>(j)]];
    inverse[perm[static_cast<size_t>(j)]] = j;
  }
  res.codebook.prototypes = std::move(protos);
  res.masses = std::move(masses);
  for (Index k = 0; k < res.assignment.size(); ++k) {
    res.assignment[k] = inverse[res.assignment[k]];
  }
}

}  // namespace

void Codebook::validate() const {
  if (prototypes.rows() < 1) throw input_error("Codebook: need m >= 1 cells");
  if (prototypes.cols() < 1) throw input_error("Codebook: need d >= 1");
  if (!prototypes.allFinite()) {
    throw input_error("Codebook: prototypes must be finite");
  }
}

void SampleBatch::validate() const {
  if (points.rows() < 1) throw input_error("SampleBatch: need n >= 1 points");
  if (points.cols() < 1) throw input_error("SampleBatch: need d >= 1");
  if (weights.size() != points.rows()) {
    std::ostringstream os;
    os << "SampleBatch: " << points.rows() << " points but "
       << weights.size() << " weights";
    throw input_error(os.str());
  }
  if (!points.allFinite()) {
    throw input_error("SampleBatch: points must be finite");
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw input_error("SampleBatch: weights must be finite and nonnegative");
  }
}

SampleBatch SampleBatch::unit_weights(Matrix pts) {
  SampleBatch batch;
  batch.weights = Vector::Ones(pts.rows());
  batch.points = std::move(pts);
  return batch;
}

void LloydConfig::validate() const {
  if (nb_cells < 1) throw input_error("LloydConfig: nb_cells must be >= 1");
  if (multistart < 1) throw input_error("LloydConfig: multistart must be >= 1");
  if (max_iter < 1) throw input_error("LloydConfig: max_iter must be >= 1");
  if (!(tol >= 0.0)) throw input_error("LloydConfig: tol must be >= 0");
  if (threads < 1) throw input_error("LloydConfig: threads must be >= 1");
}

Vector CentroidEstimate::masses() const {
  if (!(total_weight > 0.0)) {
    throw numeric_error("CentroidEstimate: total weight is zero");
  }
  return cell_weights / total_weight;
}

Index assign_cell(const Vector& y, const Codebook& cb) {
  cb.validate();
  if (y.size() != cb.dim()) {
    std::ostringstream os;
    os << "assign_cell: point has dimension " << y.size() << ", codebook has "
       << cb.dim();
    throw input_error(os.str());
  }
  return nearest_row(cb.prototypes, y.transpose());
}

IndexVector assign_cells(CRef<Matrix> points, const Codebook& cb,
                         int threads) {
  cb.validate();
  if (points.cols() != cb.dim()) {
    throw input_error("assign_cells: dimension mismatch");
  }
  IndexVector out(points.rows());
  const Matrix& protos = cb.prototypes;
  run_chunked(points.rows(), threads, [&](int, Index lo, Index hi) {
    for (Index k = lo; k < hi; ++k) {
      out[k] = nearest_row(protos, points.row(k));
    }
  });
  return out;
}

CentroidAccumulator::CentroidAccumulator(Codebook cb) : cb_(std::move(cb)) {
  cb_.validate();
  const Index m = cb_.size();
  const Index d = cb_.dim();
  num_ = Matrix::Zero(m, d);
  num_comp_ = Matrix::Zero(m, d);
  wsum_ = Vector::Zero(m);
  wsum_comp_ = Vector::Zero(m);
  counts_.assign(static_cast<size_t>(m), 0);
}

void CentroidAccumulator::add_assigned(const SampleBatch& batch,
                                       const IndexVector& assignment) {
  if (batch.size() == 0 && assignment.size() == 0) return;
  batch.validate();
  if (batch.dim() != cb_.dim()) {
    throw input_error("CentroidAccumulator: batch dimension mismatch");
  }
  if (assignment.size() != batch.size()) {
    throw input_error("CentroidAccumulator: assignment length mismatch");
  }
  for (Index k = 0; k < batch.size(); ++k) {
    const Index j = assignment[k];
    const Scalar w = batch.weights[k];
    kahan_add(wsum_[j], wsum_comp_[j], w);
    for (Index c = 0; c < cb_.dim(); ++c) {
      kahan_add(num_(j, c), num_comp_(j, c), w * batch.points(k, c));
    }
    ++counts_[static_cast<size_t>(j)];
  }
  total_ += batch.size();
}

void CentroidAccumulator::add(const SampleBatch& batch, int threads) {
  if (batch.size() == 0) return;
  if (threads <= 1) {
    batch.validate();
    if (batch.dim() != cb_.dim()) {
      throw input_error("CentroidAccumulator: batch dimension mismatch");
    }
    const Matrix& protos = cb_.prototypes;
    for (Index k = 0; k < batch.size(); ++k) {
      const Index j = nearest_row(protos, batch.points.row(k));
      const Scalar w = batch.weights[k];
      kahan_add(wsum_[j], wsum_comp_[j], w);
      for (Index c = 0; c < cb_.dim(); ++c) {
        kahan_add(num_(j, c), num_comp_(j, c), w * batch.points(k, c));
      }
      ++counts_[static_cast<size_t>(j)];
    }
    total_ += batch.size();
    return;
  }
  // Parallel path: per-chunk sub-accumulators merged in chunk order, so the
  // result is a function of (data, threads) only.
  batch.validate();
  if (batch.dim() != cb_.dim()) {
    throw input_error("CentroidAccumulator: batch dimension mismatch");
  }
  std::vector<CentroidAccumulator> parts(static_cast<size_t>(threads),
                                         CentroidAccumulator(cb_));
  const IndexVector assignment = assign_cells(batch.points, cb_, threads);
  run_chunked(batch.size(), threads, [&](int i, Index lo, Index hi) {
    auto& acc = parts[static_cast<size_t>(i)];
    for (Index k = lo; k < hi; ++k) {
      const Index j = assignment[k];
      const Scalar w = batch.weights[k];
      kahan_add(acc.wsum_[j], acc.wsum_comp_[j], w);
      for (Index c = 0; c < acc.cb_.dim(); ++c) {
        kahan_add(acc.num_(j, c), acc.num_comp_(j, c),
                  w * batch.points(k, c));
      }
      ++acc.counts_[static_cast<size_t>(j)];
    }
  });
  for (const auto& acc : parts) {
    for (Index j = 0; j < cb_.size(); ++j) {
      kahan_add(wsum_[j], wsum_comp_[j], acc.wsum_[j]);
      kahan_add(wsum_[j], wsum_comp_[j], acc.wsum_comp_[j]);
      for (Index c = 0; c < cb_.dim(); ++c) {
        kahan_add(num_(j, c), num_comp_(j, c), acc.num_(j, c));
        kahan_add(num_(j, c), num_comp_(j, c), acc.num_comp_(j, c));
      }
      counts_[static_cast<size_t>(j)] += acc.counts_[static_cast<size_t>(j)];
    }
  }
  total_ += batch.size();
}

CentroidEstimate CentroidAccumulator::finalize() const {
  if (total_ == 0) {
    throw input_error("CentroidAccumulator: no points accumulated");
  }
  CentroidEstimate est;
  const Index m = cb_.size();
  est.centroids.resize(m, cb_.dim());
  est.cell_weights = wsum_;
  est.counts = counts_;
  est.total_count = total_;
  Scalar tw = 0.0, tw_comp = 0.0;
  for (Index j = 0; j < m; ++j) kahan_add(tw, tw_comp, wsum_[j]);
  est.total_weight = tw;
  est.denominators = wsum_ / static_cast<Scalar>(total_);
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  for (Index j = 0; j < m; ++j) {
    if (wsum_[j] == 0.0) {
      est.centroids.row(j).setConstant(nan);
    } else {
      est.centroids.row(j) = num_.row(j) / wsum_[j];
    }
  }
  return est;
}

CentroidEstimate is_centroids(const SampleBatch& batch, const Codebook& cb,
                              int threads) {
  CentroidAccumulator acc(cb);
  acc.add(batch, threads);
  return acc.finalize();
}

Scalar weighted_distortion(const SampleBatch& batch, const Codebook& cb,
                           int threads) {
  batch.validate();
  cb.validate();
  if (batch.dim() != cb.dim()) {
    throw input_error("weighted_distortion: dimension mismatch");
  }
  const Matrix& protos = cb.prototypes;
  const int nchunks = threads <= 1 ? 1 : threads;
  std::vector<Scalar> sums(static_cast<size_t>(nchunks), 0.0);
  std::vector<Scalar> comps(static_cast<size_t>(nchunks), 0.0);
  run_chunked(batch.size(), threads, [&](int i, Index lo, Index hi) {
    Scalar s = 0.0, c = 0.0;
    for (Index k = lo; k < hi; ++k) {
      Scalar best = (protos.row(0) - batch.points.row(k)).squaredNorm();
      for (Index j = 1; j < protos.rows(); ++j) {
        best = std::min(best,
                        (protos.row(j) - batch.points.row(k)).squaredNorm());
      }
      kahan_add(s, c, batch.weights[k] * best);
    }
    sums[static_cast<size_t>(i)] = s;
    comps[static_cast<size_t>(i)] = c;
  });
  Scalar total = 0.0, comp = 0.0;
  for (int i = 0; i < nchunks; ++i) {
    kahan_add(total, comp, sums[static_cast<size_t>(i)]);
    kahan_add(total, comp, comps[static_cast<size_t>(i)]);
  }
  return total / static_cast<Scalar>(batch.size());
}

Index count_distinct_positive(const SampleBatch& batch) {
  batch.validate();
  std::vector<Index> idx;
  idx.reserve(static_cast<size_t>(batch.size()));
  for (Index k = 0; k < batch.size(); ++k) {
    if (batch.weights[k] > 0.0) idx.push_back(k);
  }
  if (idx.empty()) return 0;
  std::sort(idx.begin(), idx.end(),
            [&](Index i, Index j) { return row_less(batch.points, i, j); });
  Index distinct = 1;
  for (size_t t = 1; t < idx.size(); ++t) {
    if (!row_equal(batch.points, idx[t - 1], idx[t])) ++distinct;
  }
  return distinct;
}

Codebook kmeanspp_seed(const SampleBatch& batch, Index m, Rng& rng) {
  batch.validate();
  if (m < 1) throw input_error("kmeanspp_seed: need m >= 1");
  const Index n = batch.size();
  const auto order = canonical_order(batch);

  Matrix protos(m, batch.dim());
  Vector d2 = Vector::Zero(n);
  Vector cum(n);
  for (Index t = 0; t < m; ++t) {
    Scalar running = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Index k = order[static_cast<size_t>(i)];
      const Scalar score =
          t == 0 ? batch.weights[k] : batch.weights[k] * d2[k];
      running += score;
      cum[i] = running;
    }
    if (!(running > 0.0)) {
      throw input_error(
          "kmeanspp_seed: fewer distinct positively weighted points than "
          "cells");
    }
    const Scalar u = uniform01(rng) * running;
    const Scalar* begin = cum.data();
    const Scalar* pos = std::upper_bound(begin, begin + n, u);
    Index i = std::min<Index>(pos - begin, n - 1);
    // Never land on a zero-score entry at the tail of the scan.
    while (i > 0 && cum[i] == cum[i - 1]) --i;
    const Index chosen = order[static_cast<size_t>(i)];
    protos.row(t) = batch.points.row(chosen);
    for (Index k = 0; k < n; ++k) {
      const Scalar dist = (batch.points.row(k) - protos.row(t)).squaredNorm();
      d2[k] = t == 0 ? dist : std::min(d2[k], dist);
    }
  }
  return Codebook{std::move(protos)};
}

QuantizationResult lloyd_once(const SampleBatch& batch, const Codebook& init,
                              int max_iter, Scalar tol, int threads) {
  batch.validate();
  init.validate();
  if (batch.dim() != init.dim()) {
    throw input_error("lloyd_once: dimension mismatch");
  }
  if (max_iter < 1) throw input_error("lloyd_once: max_iter must be >= 1");
  if (!(tol >= 0.0)) throw input_error("lloyd_once: tol must be >= 0");
  check_lloyd_preconditions(batch, init.size());

  const Index m = init.size();
  const Index n = batch.size();
  Codebook cb = init;
  QuantizationResult res;
  res.converged = false;
  int iters = 0;

  for (int it = 0; it < max_iter; ++it) {
    ++iters;
    const IndexVector assignment = assign_cells(batch.points, cb, threads);
    CentroidAccumulator acc(cb);
    acc.add_assigned(batch, assignment);
    const CentroidEstimate est = acc.finalize();

    Matrix next(m, cb.dim());
    std::vector<Index> empties;
    for (Index j = 0; j < m; ++j) {
      if (est.empty(j)) {
        next.row(j) = cb.prototypes.row(j);
        empties.push_back(j);
      } else {
        next.row(j) = est.centroids.row(j);
      }
    }

    int recoveries = 0;
    if (!empties.empty()) {
      // Refill starved cells from the points that currently contribute the
      // most to the distortion, largest contribution first.
      Vector contrib(n);
      for (Index k = 0; k < n; ++k) {
        const Scalar w = batch.weights[k];
        contrib[k] =
            w == 0.0
                ? 0.0
                : w * (batch.points.row(k) - next.row(assignment[k]))
                          .squaredNorm();
      }
      for (Index e : empties) {
        Index best = 0;
        for (Index k = 1; k < n; ++k) {
          if (contrib[k] > contrib[best]) best = k;
        }
        if (!(contrib[best] > 0.0)) break;
        next.row(e) = batch.points.row(best);
        contrib[best] = 0.0;
        ++recoveries;
      }
    }

    const Scalar movement =
        (next - cb.prototypes).rowwise().norm().maxCoeff();
    cb.prototypes = std::move(next);

    res.trace.push_back(
        {weighted_distortion(batch, cb, threads), recoveries});

    if (movement <= tol) {
      res.converged = true;
      break;
    }
  }

  res.assignment = assign_cells(batch.points, cb, threads);
  CentroidAccumulator acc(cb);
  acc.add_assigned(batch, res.assignment);
  const CentroidEstimate est = acc.finalize();
  res.masses = est.masses();
  res.codebook = std::move(cb);
  res.distortion = res.trace.back().distortion;
  res.iterations = {iters};
  res.winning_start = 0;
  canonicalize_result(res);
  return res;
}

QuantizationResult find_prototypes(const SampleBatch& batch,
                                   const LloydConfig& cfg) {
  cfg.validate();
  batch.validate();
  check_lloyd_preconditions(batch, cfg.nb_cells);

  QuantizationResult best;
  std::vector<int> iterations;
  bool have_best = false;
  for (int s = 0; s < cfg.multistart; ++s) {
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(s));
    const Codebook init = kmeanspp_seed(batch, cfg.nb_cells, rng);
    QuantizationResult res =
        lloyd_once(batch, init, cfg.max_iter, cfg.tol, cfg.threads);
    iterations.push_back(res.iterations.front());
    if (!have_best || res.distortion < best.distortion) {
      best = std::move(res);
      best.winning_start = s;
      have_best = true;
    }
  }
  best.iterations = std::move(iterations);
  return best;
}

}  // namespace rareq
