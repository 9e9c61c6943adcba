#include "tdbem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace tdbem {

namespace {

GaussRule1d compute_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussRule1d rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on the Legendre polynomial, symmetric pairs.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

void add_orbit3(TriangleRule& rule, double a, double w) {
  // permutations of barycentric (1-2a, a, a)
  double b = 1.0 - 2.0 * a;
  rule.points.emplace_back(b, a);
  rule.points.emplace_back(a, b);
  rule.points.emplace_back(a, a);
  rule.weights.insert(rule.weights.end(), 3, w);
}

void add_orbit6(TriangleRule& rule, double a, double b, double w) {
  double c = 1.0 - a - b;
  rule.points.emplace_back(a, b);
  rule.points.emplace_back(b, a);
  rule.points.emplace_back(a, c);
  rule.points.emplace_back(c, a);
  rule.points.emplace_back(b, c);
  rule.points.emplace_back(c, b);
  rule.weights.insert(rule.weights.end(), 6, w);
}

TriangleRule make_centroid_rule() {
  TriangleRule r;
  r.degree = 1;
  r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  r.weights.push_back(1.0);
  return r;
}

TriangleRule make_degree2_rule() {
  TriangleRule r;
  r.degree = 2;
  add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
  return r;
}

TriangleRule make_degree4_rule() {
  TriangleRule r;
  r.degree = 4;
  add_orbit3(r, 0.445948490915965, 0.223381589678011);
  add_orbit3(r, 0.091576213509771, 0.109951743655322);
  return r;
}

TriangleRule make_degree5_rule() {
  TriangleRule r;
  r.degree = 5;
  r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  r.weights.push_back(0.225);
  add_orbit3(r, 0.470142064105115, 0.132394152788506);
  add_orbit3(r, 0.101286507323456, 0.125939180544827);
  return r;
}

TriangleRule make_degree6_rule() {
  TriangleRule r;
  r.degree = 6;
  add_orbit3(r, 0.249286745170910, 0.116786275726379);
  add_orbit3(r, 0.063089014491502, 0.050844906370207);
  add_orbit6(r, 0.310352451033785, 0.053145049844816, 0.082851075618374);
  return r;
}

TriangleRule make_degree8_rule() {
  TriangleRule r;
  r.degree = 8;
  r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  r.weights.push_back(0.144315607677787);
  add_orbit3(r, 0.459292588292723, 0.095091634267285);
  add_orbit3(r, 0.170569307751760, 0.103217370534718);
  add_orbit3(r, 0.050547228317031, 0.032458497623198);
  add_orbit6(r, 0.263112829634638, 0.008394777409958, 0.027230314174435);
  return r;
}

// Re-solves the orbit weights from the moment conditions; tabulated weights
// carry only ~10-15 digits and one refinement restores full precision.
void refine_weights(TriangleRule& r) {
  // orbits = contiguous runs of equal weights, as constructed
  std::vector<std::pair<int, int>> orbits;
  for (int i = 0; i < r.size();) {
    int j = i;
    while (j < r.size() && r.weights[j] == r.weights[i]) ++j;
    orbits.emplace_back(i, j - i);
    i = j;
  }
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  std::vector<std::pair<int, int>> monos;
  for (int a = 0; a <= r.degree; ++a)
    for (int b = 0; a + b <= r.degree; ++b) monos.emplace_back(a, b);
  Eigen::MatrixXd A(monos.size(), orbits.size());
  Eigen::VectorXd m(monos.size());
  for (size_t row = 0; row < monos.size(); ++row) {
    auto [a, b] = monos[row];
    m[row] = fact(a) * fact(b) / fact(a + b + 2) / 0.5;
    for (size_t g = 0; g < orbits.size(); ++g) {
      double s = 0.0;
      for (int q = orbits[g].first; q < orbits[g].first + orbits[g].second; ++q)
        s += std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b);
      A(row, g) = s;
    }
  }
  Eigen::VectorXd w = A.colPivHouseholderQr().solve(m);
  for (size_t g = 0; g < orbits.size(); ++g)
    for (int q = orbits[g].first; q < orbits[g].first + orbits[g].second; ++q)
      r.weights[q] = w[g];
}

// Collapsed tensor-product rule, exact for any total degree with enough
// 1D points; used above the tabulated degrees.
TriangleRule make_collapsed_rule(int degree) {
  int n = (degree + 3) / 2 + 1;
  const GaussRule1d& g = gauss_legendre(n);
  TriangleRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i) {
    double u = 0.5 * (g.nodes[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      double v = 0.5 * (g.nodes[j] + 1.0) * (1.0 - u);
      // d(area)/dudv = (1-u)/2/2, normalized area of reference tri = 1/2
      double w = g.weights[i] * g.weights[j] * 0.25 * (1.0 - u) / 0.5;
      r.points.emplace_back(u, v);
      r.weights.push_back(w);
    }
  }
  return r;
}

}  // namespace

const GaussRule1d& gauss_legendre(int n) {
  static std::map<int, GaussRule1d> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

const TriangleRule& triangle_rule(int degree) {
  if (degree < 1) throw std::invalid_argument("triangle_rule: degree must be >= 1");
  static std::map<int, TriangleRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  TriangleRule r;
  bool tabulated = true;
  switch (degree) {
    case 1: r = make_centroid_rule(); break;
    case 2: r = make_degree2_rule(); break;
    case 3:
    case 4: r = make_degree4_rule(); break;
    case 5: r = make_degree5_rule(); break;
    case 6: r = make_degree6_rule(); break;
    case 7:
    case 8: r = make_degree8_rule(); break;
    default:
      r = make_collapsed_rule(degree);
      tabulated = false;
      break;
  }
  if (tabulated && degree > 1) refine_weights(r);
  return cache.emplace(degree, std::move(r)).first->second;
}

MappedTriangleRule map_to_triangle(const TriangleRule& rule, const Eigen::Vector3d& a,
                                   const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  MappedTriangleRule out;
  double area = 0.5 * ((b - a).cross(c - a)).norm();
  out.points.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    double u = rule.points[q][0], v = rule.points[q][1];
    out.points.push_back(a + u * (b - a) + v * (c - a));
    out.weights.push_back(rule.weights[q] * area);
  }
  return out;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double m, double fm, double whole,
                            double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, m, fm, lm, flm);
  double right = simpson(f, m, fm, b, fb, rm, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = simpson(f, a, fa, b, fb, m, fm);
  return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

}  // namespace tdbem
