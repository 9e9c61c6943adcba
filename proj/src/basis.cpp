#include "tdbem/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdbem {

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> breakpoints,
                                         std::vector<std::vector<double>> coeffs,
                                         OutsideMode mode)
    : breakpoints_(std::move(breakpoints)), coeffs_(std::move(coeffs)), mode_(mode) {
  if (breakpoints_.size() != coeffs_.size() + 1)
    throw std::invalid_argument("PiecewisePolynomial: breakpoints/coeffs size mismatch");
  for (size_t i = 0; i + 1 < breakpoints_.size(); ++i)
    if (!(breakpoints_[i] < breakpoints_[i + 1]))
      throw std::invalid_argument("PiecewisePolynomial: breakpoints not increasing");
}

namespace {
double eval_local(const std::vector<double>& c, double xi) {
  double v = 0.0;
  for (size_t p = c.size(); p-- > 0;) v = v * xi + c[p];
  return v;
}
}  // namespace

double PiecewisePolynomial::operator()(double x) const {
  if (empty()) return 0.0;
  if (x < breakpoints_.front()) {
    if (mode_ == OutsideMode::zero) return 0.0;
    return eval_local(coeffs_.front(), 0.0);
  }
  if (x >= breakpoints_.back()) {
    if (mode_ == OutsideMode::zero) return 0.0;
    return eval_local(coeffs_.back(), breakpoints_.back() - breakpoints_[breakpoints_.size() - 2]);
  }
  // intervals are few (<= 6 in practice); linear scan
  size_t i = 0;
  while (i + 2 < breakpoints_.size() && x >= breakpoints_[i + 1]) ++i;
  return eval_local(coeffs_[i], x - breakpoints_[i]);
}

PiecewisePolynomial PiecewisePolynomial::antiderivative() const {
  if (empty()) return {};
  std::vector<std::vector<double>> anti(coeffs_.size());
  double acc = 0.0;
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    const auto& c = coeffs_[i];
    std::vector<double> a(c.size() + 1, 0.0);
    a[0] = acc;
    for (size_t p = 0; p < c.size(); ++p) a[p + 1] = c[p] / static_cast<double>(p + 1);
    double len = breakpoints_[i + 1] - breakpoints_[i];
    acc = eval_local(a, len);
    anti[i] = std::move(a);
  }
  return PiecewisePolynomial(breakpoints_, std::move(anti), OutsideMode::clamp);
}

double PiecewisePolynomial::integral(double a, double b) const {
  PiecewisePolynomial anti = antiderivative();
  return anti(b) - anti(a);
}

int PiecewisePolynomial::degree() const {
  int d = 0;
  for (const auto& c : coeffs_) d = std::max(d, static_cast<int>(c.size()) - 1);
  return d;
}

TemporalGrid make_temporal_grid(double dt, double t_final) {
  if (dt <= 0.0) throw std::invalid_argument("temporal grid: dt must be > 0");
  if (t_final <= 0.0) throw std::invalid_argument("temporal grid: t_final must be > 0");
  TemporalGrid g;
  g.dt = dt;
  g.t_final = t_final;
  g.n_steps = std::max(1, static_cast<int>(std::ceil(t_final / dt - 1e-9)));
  return g;
}

TemporalBasis::TemporalBasis(int degree, TemporalGrid grid) : degree_(degree), grid_(grid) {
  if (degree != 0 && degree != 1)
    throw std::invalid_argument("TemporalBasis: degree must be 0 or 1");
  if (grid_.dt <= 0.0 || grid_.n_steps < 1)
    throw std::invalid_argument("TemporalBasis: invalid grid");
}

double TemporalBasis::shape(int m, double t) const {
  const double dt = grid_.dt;
  if (degree_ == 1) {
    double u = t / dt - m;
    return (std::abs(u) < 1.0) ? 1.0 - std::abs(u) : 0.0;
  }
  return (t >= (m - 1) * dt && t < m * dt) ? 1.0 : 0.0;
}

namespace {

struct Segment {
  double lo, hi;
  double weight;  // constant factor (slope of the test shape on the piece)
};

// Piecewise-linear description of a (possibly truncated) shape function as a
// PiecewisePolynomial, for exact antiderivative evaluation.
PiecewisePolynomial shape_poly(const TemporalBasis& basis, int m, double clip_lo, double clip_hi) {
  const double dt = basis.dt();
  if (basis.degree() == 1) {
    std::vector<double> breaks;
    std::vector<std::vector<double>> coeffs;
    double pts[3] = {(m - 1) * dt, m * dt, (m + 1) * dt};
    double slopes[2] = {1.0 / dt, -1.0 / dt};
    for (int piece = 0; piece < 2; ++piece) {
      double lo = std::max(pts[piece], clip_lo);
      double hi = std::min(pts[piece + 1], clip_hi);
      if (hi - lo <= 1e-14 * dt) continue;
      double value_lo = 1.0 - std::abs(lo / dt - m);
      if (breaks.empty()) breaks.push_back(lo);
      coeffs.push_back({value_lo, slopes[piece]});
      breaks.push_back(hi);
    }
    if (coeffs.empty()) return {};
    return PiecewisePolynomial(breaks, coeffs);
  }
  double lo = std::max((m - 1) * dt, clip_lo);
  double hi = std::min(m * dt, clip_hi);
  if (hi - lo <= 1e-14 * dt) return {};
  return PiecewisePolynomial({lo, hi}, {{1.0}});
}

}  // namespace

PiecewisePolynomial temporal_correlation(int k, const TemporalBasis& basis,
                                         CorrelationVariant variant, double t_cap) {
  const double dt = basis.dt();
  const int q = basis.degree();
  if (q == 1 && k < -1)
    throw std::invalid_argument("temporal_correlation: k < -1 vanishes (rejected)");
  if (q == 0 && k < 0)
    throw std::invalid_argument("temporal_correlation: k < 0 vanishes for q = 0 (rejected)");
  if (t_cap < 0.0) t_cap = basis.grid().n_steps * dt;

  // Reference test index; interior uses a translation-invariant pair far from
  // the boundary, the variants pin the pair to the first/last grid function.
  int n;
  double clip_lo = -1e300, clip_hi = 1e300;
  switch (variant) {
    case CorrelationVariant::interior: n = std::max(k, 0) + 3; break;
    case CorrelationVariant::first: n = 1; clip_lo = 0.0; break;
    case CorrelationVariant::last: n = basis.grid().n_steps; clip_hi = t_cap; break;
  }
  const int m = n - k;
  // Truncation only affects the functions that actually touch the boundary.
  double a_lo = (variant == CorrelationVariant::first) ? clip_lo : -1e300;
  double a_hi = (variant == CorrelationVariant::last && m == basis.grid().n_steps) ? clip_hi : 1e300;
  PiecewisePolynomial ansatz = shape_poly(basis, m, a_lo, a_hi);
  if (ansatz.empty()) return {};

  // Evaluator of psi(r) using the exact antiderivative of the ansatz shape.
  PiecewisePolynomial ansatz_anti = ansatz.antiderivative();
  std::vector<Segment> segments;
  std::vector<double> test_pts;
  if (q == 1) {
    double pts[3] = {(n - 1) * dt, n * dt, (n + 1) * dt};
    double slopes[2] = {1.0 / dt, -1.0 / dt};
    for (int piece = 0; piece < 2; ++piece) {
      double lo = std::max(pts[piece], clip_lo);
      double hi = std::min(pts[piece + 1], clip_hi);
      if (hi - lo <= 1e-14 * dt) continue;
      segments.push_back({lo, hi, slopes[piece]});
      test_pts.push_back(lo);
      test_pts.push_back(hi);
    }
  } else {
    // derivative of the characteristic function of [(n-1)dt, n dt): Dirac pair
    test_pts = {(n - 1) * dt, n * dt};
  }

  auto psi_at = [&](double r) {
    if (q == 1) {
      double acc = 0.0;
      for (const auto& s : segments)
        acc += s.weight * (ansatz_anti(s.hi - r) - ansatz_anti(s.lo - r));
      return acc;
    }
    return ansatz((n - 1) * dt - r) - ansatz(n * dt - r);
  };

  // r-breakpoints: differences between test piece endpoints and ansatz breaks.
  std::vector<double> rbreaks;
  for (double tp : test_pts)
    for (double ab : ansatz.breakpoints()) rbreaks.push_back(tp - ab);
  rbreaks.push_back(0.0);
  std::sort(rbreaks.begin(), rbreaks.end());
  std::vector<double> uniq;
  for (double r : rbreaks) {
    if (r < -1e-12 * dt) continue;
    if (uniq.empty() || r - uniq.back() > 1e-9 * dt) uniq.push_back(std::max(r, 0.0));
  }
  if (uniq.size() < 2) return {};

  // Each interval carries a polynomial of degree <= 2; recover it from three
  // exact interior samples.
  std::vector<double> out_breaks;
  std::vector<std::vector<double>> out_coeffs;
  for (size_t i = 0; i + 1 < uniq.size(); ++i) {
    double lo = uniq[i], hi = uniq[i + 1], len = hi - lo;
    double x1 = 0.25 * len, x2 = 0.5 * len, x3 = 0.75 * len;
    double y1 = psi_at(lo + x1), y2 = psi_at(lo + x2), y3 = psi_at(lo + x3);
    // quadratic through (x1,y1),(x2,y2),(x3,y3), local coords
    Eigen::Matrix3d V;
    V << 1, x1, x1 * x1, 1, x2, x2 * x2, 1, x3, x3 * x3;
    Eigen::Vector3d c = V.fullPivLu().solve(Eigen::Vector3d(y1, y2, y3));
    for (int p = 0; p < 3; ++p)
      if (std::abs(c[p]) < 1e-13 / std::pow(dt, p)) c[p] = 0.0;
    out_breaks.push_back(lo);
    out_coeffs.push_back({c[0], c[1], c[2]});
  }
  out_breaks.push_back(uniq.back());

  // trim identically-zero leading/trailing intervals
  auto is_zero = [](const std::vector<double>& c) {
    for (double v : c)
      if (v != 0.0) return false;
    return true;
  };
  size_t lead = 0;
  while (lead < out_coeffs.size() && is_zero(out_coeffs[lead])) ++lead;
  size_t tail = out_coeffs.size();
  while (tail > lead && is_zero(out_coeffs[tail - 1])) --tail;
  if (lead >= tail) return {};
  std::vector<double> br(out_breaks.begin() + lead, out_breaks.begin() + tail + 1);
  std::vector<std::vector<double>> co(out_coeffs.begin() + lead, out_coeffs.begin() + tail);
  return PiecewisePolynomial(std::move(br), std::move(co));
}

double eval_enrichment(const Enrichment& e, int i, double t, const Eigen::Vector3d& x) {
  if (i < 0 || i >= e.size()) throw std::out_of_range("eval_enrichment: index out of range");
  return std::cos(e.frequency(i) * t - e.wave_vectors[i].dot(x) + e.phases[i]);
}

Enrichment default_enrichment(int count, double wave_number) {
  if (count < 1) throw std::invalid_argument("default_enrichment: count must be >= 1");
  // fixed direction table; cos/sin pairs per direction after the constant mode
  const double s2 = 1.0 / std::sqrt(2.0), s3 = 1.0 / std::sqrt(3.0);
  const Eigen::Vector3d dirs[] = {
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1},      {s3, s3, s3},
      {s2, -s2, 0}, {0, s2, -s2}, {s2, 0, -s2}};
  Enrichment e;
  e.wave_vectors.emplace_back(0.0, 0.0, 0.0);
  e.phases.push_back(0.0);
  int d = 0;
  while (e.size() < count) {
    const Eigen::Vector3d dir = dirs[d % 7];
    e.wave_vectors.push_back(wave_number * dir);
    e.phases.push_back(0.0);
    if (e.size() < count) {
      e.wave_vectors.push_back(wave_number * dir);
      e.phases.push_back(M_PI / 2.0);
    }
    ++d;
  }
  return e;
}

}  // namespace tdbem
