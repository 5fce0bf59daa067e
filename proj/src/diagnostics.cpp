#include "rareq/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rareq {

namespace {

bool proto_less(const Matrix& protos, Index i, Index j) {
  for (Index c = 0; c < protos.cols(); ++c) {
    if (protos(i, c) < protos(j, c)) return true;
    if (protos(i, c) > protos(j, c)) return false;
  }
  return false;
}

// Cells are identified positionally after sorting by increasing first
// centroid coordinate, so reports do not depend on the caller's prototype
// ordering.
Codebook sorted_codebook(const Codebook& cb) {
  std::vector<Index> perm(static_cast<size_t>(cb.size()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::stable_sort(perm.begin(), perm.end(), [&](Index i, Index j) {
    return proto_less(cb.prototypes, i, j);
  });
  Codebook out;
  out.prototypes.resize(cb.size(), cb.dim());
  for (Index j = 0; j < cb.size(); ++j) {
    out.prototypes.row(j) = cb.prototypes.row(perm[static_cast<size_t>(j)]);
  }
  return out;
}

}  // namespace

CentroidStdReport std_centroid(const SampleBatch& data,
                               const std::vector<Codebook>& prototypes_list,
                               const std::vector<Index>& cells, Index nv,
                               int threads) {
  data.validate();
  if (nv < 1) throw input_error("std_centroid: nv must be >= 1");
  if (prototypes_list.empty()) {
    throw input_error("std_centroid: need at least one codebook");
  }
  const Index n = data.size();
  const Index batches = n / nv;
  if (batches < 2) {
    std::ostringstream os;
    os << "std_centroid: " << n << " points with nv=" << nv << " give "
       << batches << " batches; need at least 2";
    throw input_error(os.str());
  }

  CentroidStdReport report;
  report.nv = nv;
  report.batches = batches;

  for (const Codebook& raw : prototypes_list) {
    raw.validate();
    if (raw.dim() != data.dim()) {
      throw input_error("std_centroid: codebook dimension mismatch");
    }
    const Codebook cb = sorted_codebook(raw);
    for (Index cell : cells) {
      if (cell < 0 || cell >= cb.size()) {
        std::ostringstream os;
        os << "std_centroid: cell index " << cell << " out of range (codebook"
           << " has " << cb.size() << " cells)";
        throw input_error(os.str());
      }
    }

    // Per-batch centroids for every cell; NaN rows mark empty cells.
    std::vector<Matrix> batch_centroids(
        static_cast<size_t>(batches));
    std::vector<std::vector<bool>> batch_empty(static_cast<size_t>(batches));
    for (Index b = 0; b < batches; ++b) {
      SampleBatch slice;
      slice.points = data.points.middleRows(b * nv, nv);
      slice.weights = data.weights.segment(b * nv, nv);
      const CentroidEstimate est = is_centroids(slice, cb, threads);
      batch_centroids[static_cast<size_t>(b)] = est.centroids;
      std::vector<bool> empty(static_cast<size_t>(cb.size()));
      for (Index j = 0; j < cb.size(); ++j) {
        empty[static_cast<size_t>(j)] = est.empty(j);
      }
      batch_empty[static_cast<size_t>(b)] = std::move(empty);
    }

    std::vector<CellStd> rows;
    rows.reserve(cells.size());
    for (Index cell : cells) {
      CellStd entry;
      entry.cell = cell;
      Index eff = 0;
      for (Index b = 0; b < batches; ++b) {
        if (!batch_empty[static_cast<size_t>(b)][static_cast<size_t>(cell)]) {
          ++eff;
        }
      }
      entry.effective_batches = eff;
      // A sample standard deviation needs two observations; below that the
      // cell is reported missing. Welford's recurrence keeps the spread of
      // bit-identical batches at exactly zero.
      if (eff >= 2) {
        Vector mean = Vector::Zero(data.dim());
        Vector m2 = Vector::Zero(data.dim());
        Index seen = 0;
        for (Index b = 0; b < batches; ++b) {
          if (batch_empty[static_cast<size_t>(b)][static_cast<size_t>(cell)])
            continue;
          ++seen;
          const Vector value =
              batch_centroids[static_cast<size_t>(b)].row(cell).transpose();
          const Vector delta = value - mean;
          mean += delta / static_cast<Scalar>(seen);
          m2 += delta.cwiseProduct(value - mean);
        }
        entry.std =
            (m2.cwiseMax(0.0) / static_cast<Scalar>(eff - 1)).cwiseSqrt();
        entry.present = true;
      }
      rows.push_back(std::move(entry));
    }
    report.codebooks.push_back(std::move(rows));
  }
  return report;
}

MassEstimate estimate_cell_masses(const SampleBatch& batch, const Codebook& cb,
                                  int threads) {
  const CentroidEstimate est = is_centroids(batch, cb, threads);
  MassEstimate masses;
  masses.unnormalized = est.denominators;
  masses.normalized = est.masses();
  return masses;
}

}  // namespace rareq
