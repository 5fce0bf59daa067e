#include "rareq/weights.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

namespace rareq {

DensityModel product_truncnorm_density(std::vector<TruncNormParams> coords) {
  if (coords.empty()) {
    throw input_error("product_truncnorm_density: need at least one coordinate");
  }
  for (const auto& p : coords) p.validate();
  const Index dim = static_cast<Index>(coords.size());
  auto params = std::make_shared<std::vector<TruncNormParams>>(std::move(coords));
  DensityModel model;
  model.dim = dim;
  model.eval = [params](const Vector& x) {
    Scalar v = 1.0;
    for (Index i = 0; i < x.size(); ++i) {
      v *= truncnorm_pdf(x[i], (*params)[static_cast<size_t>(i)]);
    }
    return v;
  };
  model.support = [params](const Vector& x) {
    for (Index i = 0; i < x.size(); ++i) {
      const auto& p = (*params)[static_cast<size_t>(i)];
      if (x[i] < p.a || x[i] > p.b) return false;
    }
    return true;
  };
  return model;
}

DensityModel box_uniform_density(BoxUniformParams box) {
  box.validate();
  auto params = std::make_shared<BoxUniformParams>(std::move(box));
  DensityModel model;
  model.dim = params->dim();
  model.eval = [params](const Vector& x) { return box_uniform_pdf(x, *params); };
  model.support = [params](const Vector& x) { return params->contains(x); };
  return model;
}

Vector compute_density_ratio(const DensityModel& f, const DensityModel& g,
                             CRef<Matrix> inputs) {
  if (f.dim != g.dim) {
    std::ostringstream os;
    os << "compute_density_ratio: f has dimension " << f.dim << ", g has "
       << g.dim;
    throw input_error(os.str());
  }
  if (inputs.cols() != f.dim) {
    std::ostringstream os;
    os << "compute_density_ratio: inputs have " << inputs.cols()
       << " columns, densities expect " << f.dim;
    throw input_error(os.str());
  }
  if (inputs.rows() < 1) {
    throw input_error("compute_density_ratio: need at least one input row");
  }
  if (!inputs.allFinite()) {
    throw input_error("compute_density_ratio: inputs must be finite");
  }

  const Index n = inputs.rows();
  Vector w(n);
  Vector x(inputs.cols());
  for (Index k = 0; k < n; ++k) {
    x = inputs.row(k).transpose();
    const Scalar fv = f.eval(x);
    const Scalar gv = g.eval(x);
    if (!std::isfinite(fv) || !std::isfinite(gv) || fv < 0.0 || gv < 0.0) {
      std::ostringstream os;
      os << "compute_density_ratio: invalid density value at row " << k
         << " (f=" << fv << ", g=" << gv << ")";
      throw numeric_error(os.str());
    }
    if (gv == 0.0) {
      if (fv == 0.0) {
        w[k] = 0.0;  // no f-mass here, the point contributes nothing
        continue;
      }
      std::ostringstream os;
      os << "compute_density_ratio: proposal density vanishes at row " << k
         << " while the target density is " << fv
         << "; g must dominate f on its support";
      throw input_error(os.str());
    }
    w[k] = fv / gv;
    if (!std::isfinite(w[k])) {
      std::ostringstream os;
      os << "compute_density_ratio: non-finite weight at row " << k;
      throw numeric_error(os.str());
    }
  }
  return w;
}

}  // namespace rareq
