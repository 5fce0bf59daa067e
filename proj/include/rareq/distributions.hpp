#pragma once

#include "rareq/errors.hpp"
#include "rareq/rng.hpp"
#include "rareq/types.hpp"

namespace rareq {

/// Standard normal density.
Scalar normal_pdf(Scalar z);

/// Standard normal distribution function, accurate to machine precision.
Scalar normal_cdf(Scalar z);

/// Standard normal quantile (Wichura's AS 241 rational approximation,
/// relative error below 1e-15 over (0, 1)).
Scalar normal_quantile(Scalar p);

/// Normal law of mean mu and standard deviation sigma restricted to [a, b].
struct TruncNormParams {
  Scalar mu = 0.0;
  Scalar sigma = 1.0;
  Scalar a = -1.0;
  Scalar b = 1.0;

  void validate() const;
};

Scalar truncnorm_pdf(Scalar x, const TruncNormParams& p);
Scalar truncnorm_cdf(Scalar x, const TruncNormParams& p);

/// Inverse of truncnorm_cdf; maps 0 to a and 1 to b, monotone in between.
Scalar truncnorm_quantile(Scalar u, const TruncNormParams& p);

/// n i.i.d. draws by inversion of uniform(0,1) variates. All values lie in
/// [a, b] and the sequence is a pure function of the generator state.
Vector sample_truncnorm(Index n, const TruncNormParams& p, Rng& rng);

/// Uniform density on an axis-aligned box (closed on all faces).
struct BoxUniformParams {
  Vector lower;
  Vector upper;

  Index dim() const { return lower.size(); }
  Scalar volume() const;
  bool contains(const Vector& x) const;
  void validate() const;
};

Scalar box_uniform_pdf(const Vector& x, const BoxUniformParams& p);

/// n uniform draws in the box, one row per point. Coordinates are drawn
/// column by column, so draw order is fixed by (n, dim).
Matrix sample_box_uniform(Index n, const BoxUniformParams& p, Rng& rng);

}  // namespace rareq
