#include "rareq/demo.hpp"

#include <cmath>
#include <sstream>

#include "rareq/weights.hpp"

namespace rareq {

namespace {

constexpr std::uint64_t kStreamFitMc = 0;
constexpr std::uint64_t kStreamFitIs = 1;
constexpr std::uint64_t kStreamEvalMc = 2;
constexpr std::uint64_t kStreamEvalIs = 3;

Matrix sample_inputs(Index n, const TruncNormParams& p1,
                     const TruncNormParams& p2, Rng& rng) {
  Matrix inputs(n, 2);
  inputs.col(0) = sample_truncnorm(n, p1, rng);
  inputs.col(1) = sample_truncnorm(n, p2, rng);
  return inputs;
}

std::vector<Index> all_cells(Index m) {
  std::vector<Index> cells(static_cast<size_t>(m));
  for (Index j = 0; j < m; ++j) cells[static_cast<size_t>(j)] = j;
  return cells;
}

}  // namespace

void DemoConfig::validate() const {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw input_error("DemoConfig: sigmas must be > 0");
  }
  if (!(p_zero > 0.0 && p_zero < 1.0)) {
    throw input_error("DemoConfig: p_zero must lie in (0,1)");
  }
  if (n_fit < 1 || n_eval < 1 || nb_cells < 1 || multistart < 1 || nv < 1) {
    throw input_error("DemoConfig: counts must be >= 1");
  }
  if (threads < 1) throw input_error("DemoConfig: threads must be >= 1");
}

Scalar solve_alpha(Scalar p_zero, const TruncNormParams& p) {
  p.validate();
  if (!(p_zero > 0.0 && p_zero < 1.0)) {
    std::ostringstream os;
    os << "solve_alpha: p_zero must lie in (0,1), got " << p_zero;
    throw input_error(os.str());
  }
  const auto prob = [&](Scalar alpha) {
    return truncnorm_cdf(alpha, p) - truncnorm_cdf(-alpha, p);
  };
  Scalar lo = 0.0, hi = p.b;
  if (!(prob(hi) >= p_zero)) {
    std::ostringstream os;
    os << "solve_alpha: P(|X| <= " << hi << ") = " << prob(hi)
       << " < p_zero = " << p_zero << "; no bracket on [0, b]";
    throw numeric_error(os.str());
  }
  // Plain bisection: ~90 halvings drive the interval to one ulp.
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const Scalar mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (prob(mid) < p_zero) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

Eigen::Vector2d threshold_response(const Eigen::Vector2d& x, Scalar alpha) {
  if (std::abs(x[0]) <= alpha) return Eigen::Vector2d::Zero();
  return {std::abs(x[0]) - alpha, std::abs(x[1])};
}

Matrix apply_threshold_response(CRef<Matrix> inputs, Scalar alpha) {
  if (inputs.cols() != 2) {
    throw input_error("apply_threshold_response: inputs must have 2 columns");
  }
  Matrix out(inputs.rows(), 2);
  for (Index k = 0; k < inputs.rows(); ++k) {
    out.row(k) =
        threshold_response(inputs.row(k).transpose(), alpha).transpose();
  }
  return out;
}

DemoReport run_demo(const DemoConfig& cfg) {
  cfg.validate();

  const TruncNormParams p1{0.0, cfg.sigma1, -1.0, 1.0};
  const TruncNormParams p2{0.0, cfg.sigma2, -1.0, 1.0};
  BoxUniformParams box;
  box.lower = Vector::Constant(2, -1.0);
  box.upper = Vector::Constant(2, 1.0);
  const DensityModel f_x = product_truncnorm_density({p1, p2});
  const DensityModel g = box_uniform_density(box);

  DemoReport report;
  report.alpha = solve_alpha(cfg.p_zero, p1);

  LloydConfig lloyd;
  lloyd.nb_cells = cfg.nb_cells;
  lloyd.multistart = cfg.multistart;
  lloyd.threads = cfg.threads;

  // Plain arm: draws from the input law itself, unit weights.
  {
    Rng rng = make_stream(cfg.seed, kStreamFitMc);
    const Matrix inputs = sample_inputs(cfg.n_fit, p1, p2, rng);
    report.mc.fit_outputs = apply_threshold_response(inputs, report.alpha);
    report.mc.fit_weights = Vector::Ones(cfg.n_fit);
    lloyd.seed = mix64(cfg.seed + 11);
    report.mc.fit = find_prototypes(
        SampleBatch{report.mc.fit_outputs, report.mc.fit_weights}, lloyd);
    report.mc_fit_nonzero = 0;
    for (Index k = 0; k < cfg.n_fit; ++k) {
      if (report.mc.fit_outputs.row(k).squaredNorm() > 0.0) {
        ++report.mc_fit_nonzero;
      }
    }
  }

  // IS arm: draws from the uniform proposal with density-ratio weights.
  {
    Rng rng = make_stream(cfg.seed, kStreamFitIs);
    const Matrix inputs = sample_box_uniform(cfg.n_fit, box, rng);
    report.is.fit_outputs = apply_threshold_response(inputs, report.alpha);
    report.is.fit_weights = compute_density_ratio(f_x, g, inputs);
    lloyd.seed = mix64(cfg.seed + 13);
    report.is.fit = find_prototypes(
        SampleBatch{report.is.fit_outputs, report.is.fit_weights}, lloyd);
    Index nonzero = 0;
    for (Index k = 0; k < cfg.n_fit; ++k) {
      if (report.is.fit_outputs.row(k).squaredNorm() > 0.0) ++nonzero;
    }
    report.is_fit_nonzero_frac =
        static_cast<Scalar>(nonzero) / static_cast<Scalar>(cfg.n_fit);
  }

  const auto cells = all_cells(cfg.nb_cells);

  // Evaluation arm for the plain codebook.
  {
    Rng rng = make_stream(cfg.seed, kStreamEvalMc);
    const Matrix inputs = sample_inputs(cfg.n_eval, p1, p2, rng);
    SampleBatch eval;
    eval.points = apply_threshold_response(inputs, report.alpha);
    eval.weights = Vector::Ones(cfg.n_eval);
    const CentroidStdReport std_report = std_centroid(
        eval, {report.mc.fit.codebook}, cells, cfg.nv, cfg.threads);
    report.mc.centroid_std = std_report.codebooks.front();
    report.mc.masses =
        estimate_cell_masses(eval, report.mc.fit.codebook, cfg.threads);
  }

  // Evaluation arm for the IS codebook.
  {
    Rng rng = make_stream(cfg.seed, kStreamEvalIs);
    const Matrix inputs = sample_box_uniform(cfg.n_eval, box, rng);
    SampleBatch eval;
    eval.points = apply_threshold_response(inputs, report.alpha);
    eval.weights = compute_density_ratio(f_x, g, inputs);
    const CentroidStdReport std_report = std_centroid(
        eval, {report.is.fit.codebook}, cells, cfg.nv, cfg.threads);
    report.is.centroid_std = std_report.codebooks.front();
    report.is.masses =
        estimate_cell_masses(eval, report.is.fit.codebook, cfg.threads);
  }

  return report;
}

}  // namespace rareq
