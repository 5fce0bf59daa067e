#include "rareq/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rareq {

namespace {

constexpr Scalar kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr Scalar kSqrt2 = 1.4142135623730950488016887;

// AS 241 (Wichura 1988), the PPND16 variant.
Scalar ppnd16(Scalar p) {
  const Scalar q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const Scalar r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  Scalar r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  Scalar x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
  }
  return q < 0.0 ? -x : x;
}

void require_finite(Scalar x, const char* what) {
  if (!std::isfinite(x)) {
    std::ostringstream os;
    os << what << " must be finite, got " << x;
    throw input_error(os.str());
  }
}

}  // namespace

Scalar normal_pdf(Scalar z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

Scalar normal_cdf(Scalar z) { return 0.5 * std::erfc(-z / kSqrt2); }

Scalar normal_quantile(Scalar p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "normal_quantile: p must lie in [0,1], got " << p;
    throw input_error(os.str());
  }
  if (p == 0.0) return -std::numeric_limits<Scalar>::infinity();
  if (p == 1.0) return std::numeric_limits<Scalar>::infinity();
  return ppnd16(p);
}

void TruncNormParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(a) ||
      !std::isfinite(b)) {
    throw input_error("TruncNormParams: parameters must be finite");
  }
  if (sigma <= 0.0) {
    std::ostringstream os;
    os << "TruncNormParams: sigma must be > 0, got " << sigma;
    throw input_error(os.str());
  }
  if (!(a < b)) {
    std::ostringstream os;
    os << "TruncNormParams: need a < b, got a=" << a << " b=" << b;
    throw input_error(os.str());
  }
}

Scalar truncnorm_pdf(Scalar x, const TruncNormParams& p) {
  p.validate();
  require_finite(x, "truncnorm_pdf: x");
  if (x < p.a || x > p.b) return 0.0;
  const Scalar za = (p.a - p.mu) / p.sigma;
  const Scalar zb = (p.b - p.mu) / p.sigma;
  const Scalar z = (x - p.mu) / p.sigma;
  const Scalar mass = normal_cdf(zb) - normal_cdf(za);
  if (!(mass > 0.0)) {
    throw numeric_error("truncnorm_pdf: truncation interval carries no mass");
  }
  return normal_pdf(z) / (p.sigma * mass);
}

Scalar truncnorm_cdf(Scalar x, const TruncNormParams& p) {
  p.validate();
  if (std::isnan(x)) throw input_error("truncnorm_cdf: x must not be NaN");
  if (x <= p.a) return 0.0;
  if (x >= p.b) return 1.0;
  const Scalar za = (p.a - p.mu) / p.sigma;
  const Scalar zb = (p.b - p.mu) / p.sigma;
  const Scalar z = (x - p.mu) / p.sigma;
  const Scalar mass = normal_cdf(zb) - normal_cdf(za);
  if (!(mass > 0.0)) {
    throw numeric_error("truncnorm_cdf: truncation interval carries no mass");
  }
  const Scalar u = (normal_cdf(z) - normal_cdf(za)) / mass;
  return std::min(1.0, std::max(0.0, u));
}

Scalar truncnorm_quantile(Scalar u, const TruncNormParams& p) {
  p.validate();
  if (!(u >= 0.0 && u <= 1.0)) {
    std::ostringstream os;
    os << "truncnorm_quantile: u must lie in [0,1], got " << u;
    throw input_error(os.str());
  }
  if (u == 0.0) return p.a;
  if (u == 1.0) return p.b;
  const Scalar pa = normal_cdf((p.a - p.mu) / p.sigma);
  const Scalar pb = normal_cdf((p.b - p.mu) / p.sigma);
  Scalar x = p.mu + p.sigma * ppnd16(pa + u * (pb - pa));
  x = std::min(p.b, std::max(p.a, x));
  // One Newton step on the truncated cdf removes the cancellation incurred
  // in pa + u*(pb - pa) when the bounds are deep in the tails.
  const Scalar dens = truncnorm_pdf(x, p);
  if (dens > 0.0) {
    const Scalar step = (truncnorm_cdf(x, p) - u) / dens;
    if (std::isfinite(step)) x = std::min(p.b, std::max(p.a, x - step));
  }
  return x;
}

Vector sample_truncnorm(Index n, const TruncNormParams& p, Rng& rng) {
  p.validate();
  if (n < 0) throw input_error("sample_truncnorm: n must be nonnegative");
  const Scalar pa = normal_cdf((p.a - p.mu) / p.sigma);
  const Scalar pb = normal_cdf((p.b - p.mu) / p.sigma);
  if (!(pb > pa)) {
    throw numeric_error(
        "sample_truncnorm: truncation interval carries no mass");
  }
  Vector out(n);
  for (Index k = 0; k < n; ++k) {
    const Scalar u = uniform01(rng);
    Scalar x = p.mu + p.sigma * ppnd16(pa + u * (pb - pa));
    out[k] = std::min(p.b, std::max(p.a, x));
  }
  return out;
}

Scalar BoxUniformParams::volume() const {
  return (upper - lower).prod();
}

bool BoxUniformParams::contains(const Vector& x) const {
  if (x.size() != dim()) {
    throw input_error("BoxUniformParams: point dimension mismatch");
  }
  return (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

void BoxUniformParams::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw input_error("BoxUniformParams: lower/upper must be same nonzero size");
  }
  if (!lower.allFinite() || !upper.allFinite()) {
    throw input_error("BoxUniformParams: bounds must be finite");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw input_error("BoxUniformParams: need lower[i] < upper[i] for all i");
  }
}

Scalar box_uniform_pdf(const Vector& x, const BoxUniformParams& p) {
  p.validate();
  if (x.size() != p.dim()) {
    std::ostringstream os;
    os << "box_uniform_pdf: point has dimension " << x.size() << ", box has "
       << p.dim();
    throw input_error(os.str());
  }
  if (!x.allFinite()) throw input_error("box_uniform_pdf: x must be finite");
  return p.contains(x) ? 1.0 / p.volume() : 0.0;
}

Matrix sample_box_uniform(Index n, const BoxUniformParams& p, Rng& rng) {
  p.validate();
  if (n < 0) throw input_error("sample_box_uniform: n must be nonnegative");
  Matrix out(n, p.dim());
  for (Index c = 0; c < p.dim(); ++c) {
    const Scalar lo = p.lower[c];
    const Scalar span = p.upper[c] - p.lower[c];
    for (Index k = 0; k < n; ++k) {
      out(k, c) = lo + span * uniform01(rng);
    }
  }
  return out;
}

}  // namespace rareq
