#pragma once

#include <functional>
#include <vector>

#include "rareq/distributions.hpp"
#include "rareq/errors.hpp"
#include "rareq/types.hpp"

namespace rareq {

/// A probability density on R^dim together with its support predicate.
/// Contract: eval(x) >= 0 everywhere, and support(x) == false implies
/// eval(x) == 0.
struct DensityModel {
  std::function<Scalar(const Vector&)> eval;
  std::function<bool(const Vector&)> support;
  Index dim = 0;
};

/// Product of independent univariate truncated normals, one per coordinate.
DensityModel product_truncnorm_density(std::vector<TruncNormParams> coords);

DensityModel box_uniform_density(BoxUniformParams box);

/// Importance-sampling weights w_k = f(x_k) / g(x_k) for each row of
/// `inputs`. Points where both densities vanish get weight 0; a point where
/// g vanishes but f does not violates the domination requirement and raises
/// input_error naming the row.
Vector compute_density_ratio(const DensityModel& f, const DensityModel& g,
                             CRef<Matrix> inputs);

}  // namespace rareq
