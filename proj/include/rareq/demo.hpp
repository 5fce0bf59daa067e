#pragma once

#include <cstdint>

#include "rareq/diagnostics.hpp"
#include "rareq/distributions.hpp"
#include "rareq/quantizer.hpp"
#include "rareq/types.hpp"

namespace rareq {

/// Configuration of the bundled rare-event experiment: a 2D truncated
/// normal input law, a piecewise response collapsing most of the mass onto
/// the origin, and a uniform proposal for the IS run.
struct DemoConfig {
  Scalar sigma1 = 0.25;
  Scalar sigma2 = 0.25;
  Scalar p_zero = 0.99;   // target probability of the zero output
  Index n_fit = 1000;     // quantization budget
  Index n_eval = 100000;  // evaluation sample for the std diagnostics
  Index nb_cells = 5;
  int multistart = 3;
  Index nv = 1000;  // diagnostic batch size
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

/// Threshold alpha with P(|X1| <= alpha) = p_zero under the truncated
/// normal law of X1, found by bracketed root-finding on [0, b].
Scalar solve_alpha(Scalar p_zero, const TruncNormParams& p);

/// The demo response: collapses inputs with |x1| <= alpha onto the origin,
/// otherwise returns (|x1| - alpha, |x2|).
Eigen::Vector2d threshold_response(const Eigen::Vector2d& x, Scalar alpha);

/// Row-wise threshold_response over an n x 2 input matrix.
Matrix apply_threshold_response(CRef<Matrix> inputs, Scalar alpha);

/// One arm of the comparison (plain Monte Carlo or importance sampling).
struct DemoPath {
  Matrix fit_outputs;  // n_fit x 2, for plotting
  Vector fit_weights;
  QuantizationResult fit;
  std::vector<CellStd> centroid_std;  // against the arm's own codebook
  MassEstimate masses;                // from the evaluation sample
};

struct DemoReport {
  Scalar alpha = 0.0;
  DemoPath mc;
  DemoPath is;
  Index mc_fit_nonzero = 0;       // fit outputs different from (0,0)
  Scalar is_fit_nonzero_frac = 0.0;
};

/// Runs both arms end to end: fit on n_fit points, then estimate centroid
/// standard deviations and cell masses on n_eval fresh points. Every draw
/// comes from substreams of cfg.seed, so reports are reproducible.
DemoReport run_demo(const DemoConfig& cfg);

}  // namespace rareq
