#include "tdbem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polar_internal.hpp"
#include "tdbem/quadrature.hpp"

namespace tdbem {

using detail::Fan;
using detail::Sector;

namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * M_PI);

struct TemporalKernel {
  PiecewisePolynomial psi;
  PiecewisePolynomial psi_anti;  // antiderivative, clamped outside the support
  double lo = 0.0, hi = 0.0;
  bool zero = true;
};

TemporalKernel make_kernel(int k, const TemporalBasis& tb) {
  TemporalKernel ker;
  if (tb.degree() == 0 && k < 0) return ker;  // q = 0 has no superdiagonal band
  ker.psi = temporal_correlation(k, tb);
  if (ker.psi.empty()) return ker;
  ker.psi_anti = ker.psi.antiderivative();
  ker.lo = ker.psi.support_min();
  ker.hi = ker.psi.support_max();
  ker.zero = false;
  return ker;
}

std::vector<TemporalKernel> build_kernels(const TemporalBasis& tb, int k_max) {
  std::vector<TemporalKernel> kernels;
  kernels.reserve(k_max + 2);
  for (int k = -1; k <= k_max; ++k) kernels.push_back(make_kernel(k, tb));
  return kernels;
}

// Composite Gauss in rho over [rho_lo, rho_hi], subintervals split at the
// kernel's breakpoint circles and graded toward rho = 0 when the singular
// radius lies inside the range and the point is near the plane.
double radial_gauss(double rho_lo, double rho_hi, double z, const TemporalKernel& ker,
                    const double* circles, int n_circles, const QuadratureConfig& cfg,
                    double dt) {
  double pts[12];
  int n_pts = 0;
  pts[n_pts++] = rho_lo;
  for (int i = 0; i < n_circles; ++i)
    if (circles[i] > rho_lo * (1.0 + 1e-14) + 1e-300 && circles[i] < rho_hi * (1.0 - 1e-14))
      pts[n_pts++] = circles[i];
  pts[n_pts++] = rho_hi;

  const GaussRule1d& gr = gauss_legendre(cfg.radial_order);
  const bool grade_first = (rho_lo == 0.0 && z < dt);
  double acc = 0.0;
  auto gauss_segment = [&](double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double seg = 0.0;
    for (int g = 0; g < gr.size(); ++g) {
      double rho = mid + half * gr.nodes[g];
      double r = std::hypot(rho, z);
      seg += gr.weights[g] * ker.psi(r) * (rho / r);
    }
    return seg * half;
  };
  for (int i = 0; i + 1 < n_pts; ++i) {
    double a = pts[i], b = pts[i + 1];
    if (b - a <= 1e-15 * (1.0 + b)) continue;
    if (i == 0 && grade_first) {
      double edge = b;
      for (int d = 0; d < cfg.grading_depth; ++d) {
        double next = edge * cfg.grading_ratio;
        acc += gauss_segment(next, edge);
        edge = next;
      }
      acc += gauss_segment(a, edge);
    } else {
      acc += gauss_segment(a, b);
    }
  }
  return acc * kInv2Pi;
}

// Calls fn(theta, signed_weight) on composite Gauss nodes over the sector.
// Panels are split where the edge crosses a breakpoint circle and at the
// perpendicular foot, then subdivided geometrically in edge distance so each
// panel sees a bounded variation of the radial limit.
// osc_scale > 0 additionally bounds the phase advance osc_scale * arc length
// per panel (oscillatory enriched integrands).
template <typename Fn>
void for_each_angular_node(const Sector& s, const double* circles, int n_circles,
                           const GaussRule1d& ga, Fn&& fn, double osc_scale = 0.0) {
  double splits[20];
  int n_splits = 0;
  splits[n_splits++] = 0.0;
  splits[n_splits++] = 1.0;
  auto add = [&](double theta_cand) {
    double sv = detail::wrap_angle(theta_cand - s.theta_u) / s.dtheta;
    if (sv > 1e-12 && sv < 1.0 - 1e-12 && n_splits < 20) splits[n_splits++] = sv;
  };
  for (int ci = 0; ci < n_circles; ++ci) {
    double rho_c = circles[ci];
    if (rho_c <= s.p) continue;
    double phi = std::acos(s.p / rho_c);
    add(s.theta_foot - phi);
    add(s.theta_foot + phi);
  }
  add(s.theta_foot);
  std::sort(splits, splits + n_splits);

  auto integrate_panel = [&](double sa, double sb) {
    if (sb - sa <= 1e-14) return;
    int n_sub = 1;
    if (osc_scale > 0.0) {
      double ra = sector_rho_edge(s, s.theta_u + sa * s.dtheta);
      double rb = sector_rho_edge(s, s.theta_u + sb * s.dtheta);
      double arc = std::max(ra, rb) * std::abs((sb - sa) * s.dtheta);
      n_sub = std::clamp(static_cast<int>(std::ceil(osc_scale * arc / 3.0)), 1, 16);
    }
    for (int sub = 0; sub < n_sub; ++sub) {
      double qa = sa + (sb - sa) * sub / n_sub;
      double qb = sa + (sb - sa) * (sub + 1) / n_sub;
      double mid = 0.5 * (qa + qb), half = 0.5 * (qb - qa);
      for (int g = 0; g < ga.size(); ++g) {
        double theta = s.theta_u + (mid + half * ga.nodes[g]) * s.dtheta;
        fn(theta, ga.weights[g] * half * s.dtheta);
      }
    }
  };

  for (int pi = 0; pi + 1 < n_splits; ++pi) {
    double sa = splits[pi], sb = splits[pi + 1];
    if (sb - sa <= 1e-14) continue;
    double tha = s.theta_u + sa * s.dtheta, thb = s.theta_u + sb * s.dtheta;
    double ra = sector_rho_edge(s, tha), rb = sector_rho_edge(s, thb);
    double ratio = std::max(ra, rb) / std::min(ra, rb);
    int pieces = std::clamp(static_cast<int>(std::ceil(std::log(ratio) / std::log(1.5))), 1, 12);
    if (pieces == 1) {
      integrate_panel(sa, sb);
      continue;
    }
    // geometric levels of the edge distance; the foot split keeps the panel
    // on one side of the perpendicular, so theta(rho) is single valued
    double g0 = detail::wrap_angle(tha - s.theta_foot);
    double g1 = detail::wrap_angle(thb - s.theta_foot);
    double side = (g0 + g1 >= 0.0) ? 1.0 : -1.0;
    double prev = sa;
    for (int j = 1; j < pieces; ++j) {
      double rho_j = ra * std::pow(rb / ra, static_cast<double>(j) / pieces);
      double theta_j = s.theta_foot + side * std::acos(std::min(1.0, s.p / rho_j));
      double sv = detail::wrap_angle(theta_j - s.theta_u) / s.dtheta;
      sv = std::clamp(sv, sa, sb);
      integrate_panel(prev, sv);
      prev = sv;
    }
    integrate_panel(prev, sb);
  }
}

// Integral over the fan's triangle of psi_k(|x-y|) / (2 pi |x-y|) ds_y.
double inner_integral(const Fan& fan, const TemporalKernel& ker, const QuadratureConfig& cfg,
                      double dt) {
  const double z = fan.z;
  if (ker.zero || ker.hi <= z) return 0.0;
  const double rho_out = std::sqrt(ker.hi * ker.hi - z * z);
  const double rho_in = (ker.lo <= z) ? 0.0 : std::sqrt(ker.lo * ker.lo - z * z);
  if (rho_in >= fan.rho_max) return 0.0;

  // breakpoint circles of the kernel in the triangle plane
  double circles[8];
  int n_circles = 0;
  for (double rb : ker.psi.breakpoints())
    if (rb > z && n_circles < 8) circles[n_circles++] = std::sqrt(rb * rb - z * z);

  const GaussRule1d& ga = gauss_legendre(cfg.angular_order);
  const bool analytic = (cfg.radial_rule == RadialRule::analytic);
  const double shifted_anti_in = ker.psi_anti(std::hypot(rho_in, z));

  double acc = 0.0;
  for (int si = 0; si < fan.n_sectors; ++si) {
    const Sector& s = fan.sectors[si];
    for_each_angular_node(s, circles, n_circles, ga, [&](double theta, double w_theta) {
      double rho_edge = sector_rho_edge(s, theta);
      double rho_hi = std::min(rho_edge, rho_out);
      if (rho_hi <= rho_in) return;
      double val = analytic
                       ? kInv2Pi * (ker.psi_anti(std::hypot(rho_hi, z)) - shifted_anti_in)
                       : radial_gauss(rho_in, rho_hi, z, ker, circles, n_circles, cfg, dt);
      acc += w_theta * val;
    });
  }
  return acc;
}

struct PairRange {
  int k_lo, k_hi;  // candidate band indices touching the pair's distance range
  DistanceRange dist;
};

PairRange pair_band_range(const Mesh& mesh, int ti, int tj, double dt, int k_min, int k_max) {
  PairRange pr;
  pr.dist = triangle_distance_range(mesh, ti, tj);
  pr.k_lo = std::max(k_min, static_cast<int>(std::floor(pr.dist.min / dt)) - 2);
  pr.k_hi = std::min(k_max, static_cast<int>(std::ceil(pr.dist.max / dt)) + 2);
  return pr;
}

bool kernel_meets_range(const TemporalKernel& ker, const DistanceRange& d) {
  return !ker.zero && ker.lo < d.max && ker.hi > d.min;
}

// Composite x integration: the test triangle is split 4-to-1 wherever its
// distance range to the ansatz triangle straddles a kernel breakpoint (the
// light-cone shells cutting through the patch), until the patch's distance
// span is small against dt or the depth budget is exhausted. leaf(a, b, c)
// integrates one patch.
template <typename LeafFn>
void refine_outer_patch(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                        const Eigen::Vector3d& c, const std::array<Eigen::Vector3d, 3>& ansatz,
                        const TemporalKernel& ker, const QuadratureConfig& cfg, double dt,
                        int depth_left, LeafFn&& leaf) {
  DistanceRange d = triangle_pair_distance_range({a, b, c}, ansatz);
  if (!(ker.lo < d.max && ker.hi > d.min)) return;  // retardation support miss
  if (depth_left > 0 && d.max - d.min > cfg.outer_span_fraction * dt) {
    bool straddles = false;
    for (double rb : ker.psi.breakpoints())
      if (rb > d.min && rb < d.max) {
        straddles = true;
        break;
      }
    if (straddles) {
      Eigen::Vector3d ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
      refine_outer_patch(a, ab, ca, ansatz, ker, cfg, dt, depth_left - 1, leaf);
      refine_outer_patch(ab, b, bc, ansatz, ker, cfg, dt, depth_left - 1, leaf);
      refine_outer_patch(ca, bc, c, ansatz, ker, cfg, dt, depth_left - 1, leaf);
      refine_outer_patch(ab, bc, ca, ansatz, ker, cfg, dt, depth_left - 1, leaf);
      return;
    }
  }
  leaf(a, b, c);
}

// One entry V^k_{ij}: composite outer rule over the test triangle, polar
// inner integral over the ansatz triangle.
double assemble_entry(const std::array<Eigen::Vector3d, 3>& test,
                      const std::array<Eigen::Vector3d, 3>& ansatz, const TemporalKernel& ker,
                      const QuadratureConfig& cfg, double dt, const TriangleRule& rule) {
  double acc = 0.0;
  refine_outer_patch(test[0], test[1], test[2], ansatz, ker, cfg, dt, cfg.outer_refine_depth,
                     [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                         const Eigen::Vector3d& c) {
                       MappedTriangleRule mq = map_to_triangle(rule, a, b, c);
                       for (size_t q = 0; q < mq.points.size(); ++q) {
                         Fan fan = detail::build_fan(mq.points[q], ansatz[0], ansatz[1], ansatz[2]);
                         acc += mq.weights[q] * inner_integral(fan, ker, cfg, dt);
                       }
                     });
  return acc;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (outer_degree < 1 || radial_order < 1 || angular_order < 1 || time_order < 1 ||
      rhs_time_order < 1)
    throw std::invalid_argument("QuadratureConfig: orders must be >= 1");
  if (!(grading_ratio > 0.0 && grading_ratio < 1.0))
    throw std::invalid_argument("QuadratureConfig: grading ratio must lie in (0,1)");
  if (grading_depth < 0 || oracle_depth < 0 || outer_refine_depth < 0)
    throw std::invalid_argument("QuadratureConfig: depths must be >= 0");
  if (!(outer_span_fraction > 0.0))
    throw std::invalid_argument("QuadratureConfig: outer span fraction must be > 0");
  if (rhs_space_degree < 0)
    throw std::invalid_argument("QuadratureConfig: rhs space degree must be >= 0");
}

int band_cutoff(double diameter, double dt) {
  return static_cast<int>(std::ceil(diameter / dt - 1e-9)) + 2;
}

Eigen::MatrixXd assemble_band(const Mesh& mesh, const SpatialBasis& sp, const TemporalBasis& tb,
                              int k, const QuadratureConfig& quad) {
  quad.validate();
  if (k < -1) throw std::invalid_argument("assemble_band: k < -1 rejected");
  const int n = sp.n_dof();
  Eigen::MatrixXd band = Eigen::MatrixXd::Zero(n, n);
  TemporalKernel ker = make_kernel(k, tb);
  if (ker.zero) return band;
  const double dt = tb.dt();
  const TriangleRule& rule = triangle_rule(quad.outer_degree);

  for (int j = 0; j < n; ++j) {
    std::array<Eigen::Vector3d, 3> test = {mesh.vertex_of(j, 0), mesh.vertex_of(j, 1),
                                           mesh.vertex_of(j, 2)};
    for (int i = 0; i <= j; ++i) {
      DistanceRange d = triangle_distance_range(mesh, i, j);
      if (!kernel_meets_range(ker, d)) continue;
      std::array<Eigen::Vector3d, 3> ansatz = {mesh.vertex_of(i, 0), mesh.vertex_of(i, 1),
                                               mesh.vertex_of(i, 2)};
      double val = assemble_entry(test, ansatz, ker, quad, dt, rule);
      // the retarded single-layer kernel is symmetric in the two triangles
      band(j, i) = val;
      band(i, j) = val;
    }
  }
  return band;
}

double assemble_band_entry(const Mesh& mesh, int i, int j, int k, const TemporalBasis& tb,
                           const QuadratureConfig& quad) {
  quad.validate();
  if (k < -1) throw std::invalid_argument("assemble_band_entry: k < -1 rejected");
  TemporalKernel ker = make_kernel(k, tb);
  if (ker.zero) return 0.0;
  DistanceRange d = triangle_distance_range(mesh, i, j);
  if (!kernel_meets_range(ker, d)) return 0.0;
  std::array<Eigen::Vector3d, 3> test = {mesh.vertex_of(j, 0), mesh.vertex_of(j, 1),
                                         mesh.vertex_of(j, 2)};
  std::array<Eigen::Vector3d, 3> ansatz = {mesh.vertex_of(i, 0), mesh.vertex_of(i, 1),
                                           mesh.vertex_of(i, 2)};
  return assemble_entry(test, ansatz, ker, quad, tb.dt(), triangle_rule(quad.outer_degree));
}

std::vector<Eigen::MatrixXd> assemble_all_bands(const Mesh& mesh, const SpatialBasis& sp,
                                                const TemporalBasis& tb,
                                                const QuadratureConfig& quad) {
  quad.validate();
  const int n = sp.n_dof();
  const double dt = tb.dt();
  const int k_max = band_cutoff(mesh_stats(mesh).diameter, dt);
  std::vector<TemporalKernel> kernels = build_kernels(tb, k_max);
  std::vector<Eigen::MatrixXd> bands(k_max + 2, Eigen::MatrixXd::Zero(n, n));
  const TriangleRule& rule = triangle_rule(quad.outer_degree);

  for (int j = 0; j < n; ++j) {
    std::array<Eigen::Vector3d, 3> test = {mesh.vertex_of(j, 0), mesh.vertex_of(j, 1),
                                           mesh.vertex_of(j, 2)};
    for (int i = 0; i <= j; ++i) {
      PairRange pr = pair_band_range(mesh, i, j, dt, -1, k_max);
      if (pr.k_lo > pr.k_hi) continue;
      std::array<Eigen::Vector3d, 3> ansatz = {mesh.vertex_of(i, 0), mesh.vertex_of(i, 1),
                                               mesh.vertex_of(i, 2)};
      for (int k = pr.k_lo; k <= pr.k_hi; ++k) {
        const TemporalKernel& ker = kernels[k + 1];
        if (!kernel_meets_range(ker, pr.dist)) continue;
        double val = assemble_entry(test, ansatz, ker, quad, dt, rule);
        if (val != 0.0) {
          bands[k + 1](j, i) = val;
          bands[k + 1](i, j) = val;  // symmetric kernel
        }
      }
    }
  }
  return bands;
}

Eigen::MatrixXd assemble_rhs(const SpaceTimeFn& f, const Mesh& mesh, const SpatialBasis& sp,
                             const TemporalBasis& tb, const QuadratureConfig& quad) {
  quad.validate();
  const int n = sp.n_dof();
  const int n_steps = tb.grid().n_steps;
  const double dt = tb.dt();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, n_steps);
  const TriangleRule& rule =
      triangle_rule(quad.rhs_space_degree > 0 ? quad.rhs_space_degree : quad.outer_degree);
  const GaussRule1d& gt = gauss_legendre(quad.rhs_time_order);

  for (int j = 0; j < n; ++j) {
    MappedTriangleRule sq =
        map_to_triangle(rule, mesh.vertex_of(j, 0), mesh.vertex_of(j, 1), mesh.vertex_of(j, 2));
    for (int nn = 1; nn <= n_steps; ++nn) {
      double val = 0.0;
      if (tb.degree() == 1) {
        const double pieces[2][3] = {{(nn - 1) * dt, nn * dt, 1.0 / dt},
                                     {nn * dt, (nn + 1) * dt, -1.0 / dt}};
        for (const auto& piece : pieces) {
          double mid = 0.5 * (piece[0] + piece[1]), half = 0.5 * (piece[1] - piece[0]);
          for (int g = 0; g < gt.size(); ++g) {
            double t = mid + half * gt.nodes[g];
            double wt = gt.weights[g] * half * piece[2];
            for (size_t q = 0; q < sq.points.size(); ++q)
              val += wt * sq.weights[q] * f(t, sq.points[q]);
          }
        }
      } else {
        // derivative of the characteristic function: Dirac pair
        for (size_t q = 0; q < sq.points.size(); ++q)
          val += sq.weights[q] * (f((nn - 1) * dt, sq.points[q]) - f(nn * dt, sq.points[q]));
      }
      rhs(j, nn - 1) = val;
    }
  }
  return rhs;
}

double single_layer_triangle_integral(const Eigen::Vector3d& x, const Eigen::Vector3d& a,
                                      const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                                      const PiecewisePolynomial& g, int angular_order) {
  if (g.empty()) return 0.0;
  TemporalKernel ker;
  ker.psi = g;
  ker.psi_anti = g.antiderivative();
  ker.lo = g.support_min();
  ker.hi = g.support_max();
  ker.zero = false;
  QuadratureConfig cfg;
  cfg.angular_order = angular_order;
  cfg.radial_rule = RadialRule::analytic;
  Fan fan = detail::build_fan(x, a, b, c);
  return inner_integral(fan, ker, cfg, 1.0);
}

// ---------------------------------------------------------------------------
// plane-wave enrichment

namespace {

// Segments of the tau integral (tau = t - n dt): test pieces split at 0,
// ansatz pieces split at shift +- dt with shift = r - k dt.
int time_segments(double shift, double dt, double* seg, int max_seg) {
  double cand[6] = {-dt, 0.0, dt, shift - dt, shift, shift + dt};
  double lo = std::max(-dt, shift - dt), hi = std::min(dt, shift + dt);
  if (hi - lo <= 1e-15 * dt) return 0;
  std::sort(cand, cand + 6);
  int n = 0;
  for (double cpt : cand) {
    double cl = std::clamp(cpt, lo, hi);
    if (n == 0 || cl - seg[n - 1] > 1e-14 * dt) {
      if (n < max_seg) seg[n++] = cl;
    }
  }
  return n;
}

inline double hat0(double s, double dt) {
  double u = std::abs(s) / dt;
  return u < 1.0 ? 1.0 - u : 0.0;
}

}  // namespace

Eigen::MatrixXd assemble_band_enriched(const Mesh& mesh, const SpatialBasis& sp,
                                       const TemporalBasis& tb, const Enrichment& e, int k,
                                       const QuadratureConfig& quad) {
  quad.validate();
  if (k < -1) throw std::invalid_argument("assemble_band_enriched: k < -1 rejected");
  if (tb.degree() != 1)
    throw std::invalid_argument("assemble_band_enriched: requires temporal degree 1");
  if (e.size() == 0) throw std::invalid_argument("assemble_band_enriched: empty enrichment");

  const int n_tri = sp.n_dof();
  const int n_e = e.size();
  const double dt = tb.dt();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_e * n_tri, n_e * n_tri);

  TemporalKernel ker = make_kernel(k, tb);  // support/breakpoint geometry only
  if (ker.zero) return out;

  double omega_max = 0.0;
  for (int i = 0; i < n_e; ++i) omega_max = std::max(omega_max, e.frequency(i));
  const int n_t = quad.time_order + static_cast<int>(std::ceil(omega_max * dt));
  const GaussRule1d& gt = gauss_legendre(n_t);
  const GaussRule1d& ga = gauss_legendre(quad.angular_order);
  const GaussRule1d& gr = gauss_legendre(quad.radial_order);
  const TriangleRule& rule = triangle_rule(quad.outer_degree);

  std::vector<double> omg(n_e), phase_x(n_e), phase_y(n_e);
  for (int i = 0; i < n_e; ++i) omg[i] = e.frequency(i);

  Eigen::MatrixXd local(n_e, n_e);

  for (int j = 0; j < n_tri; ++j) {
    std::array<Eigen::Vector3d, 3> test = {mesh.vertex_of(j, 0), mesh.vertex_of(j, 1),
                                           mesh.vertex_of(j, 2)};
    for (int i = 0; i < n_tri; ++i) {
      DistanceRange dist = triangle_distance_range(mesh, i, j);
      if (!(ker.lo < dist.max && ker.hi > dist.min)) continue;
      const Eigen::Vector3d va = mesh.vertex_of(i, 0);
      const Eigen::Vector3d vb = mesh.vertex_of(i, 1);
      const Eigen::Vector3d vc = mesh.vertex_of(i, 2);
      local.setZero();

      auto process_x = [&](const Eigen::Vector3d& x, double wx) {
        for (int bi = 0; bi < n_e; ++bi)
          phase_x[bi] = -e.wave_vectors[bi].dot(x) + e.phases[bi];
        Fan fan = detail::build_fan(x, va, vb, vc);
        const double z = fan.z;
        if (ker.hi <= z) return;
        const double rho_out = std::sqrt(ker.hi * ker.hi - z * z);
        const double rho_in = (ker.lo <= z) ? 0.0 : std::sqrt(ker.lo * ker.lo - z * z);
        if (rho_in >= fan.rho_max) return;
        double circles[8];
        int n_circles = 0;
        for (double rb : ker.psi.breakpoints())
          if (rb > z && n_circles < 8) circles[n_circles++] = std::sqrt(rb * rb - z * z);

        for (int si = 0; si < fan.n_sectors; ++si) {
          const Sector& s = fan.sectors[si];
          for_each_angular_node(
              s, circles, n_circles, ga,
              [&](double theta, double w_theta) {
              double rho_hi = std::min(sector_rho_edge(s, theta), rho_out);
              if (rho_hi <= rho_in) return;
              Eigen::Vector3d dir = std::cos(theta) * fan.e1 + std::sin(theta) * fan.e2;

              // radial subintervals as in the plain assembler
              double pts[12];
              int n_pts = 0;
              pts[n_pts++] = rho_in;
              for (int ci = 0; ci < n_circles; ++ci)
                if (circles[ci] > rho_in + 1e-300 && circles[ci] < rho_hi * (1.0 - 1e-14))
                  pts[n_pts++] = circles[ci];
              pts[n_pts++] = rho_hi;
              const bool grade_first = (rho_in == 0.0 && z < dt);

              auto radial_segment = [&](double ra, double rb2) {
                double midr = 0.5 * (ra + rb2), halfr = 0.5 * (rb2 - ra);
                for (int gg = 0; gg < gr.size(); ++gg) {
                  double rho = midr + halfr * gr.nodes[gg];
                  double r = std::hypot(rho, z);
                  double w_sp = wx * w_theta * gr.weights[gg] * halfr * (rho / r) * kInv2Pi;
                  Eigen::Vector3d y = fan.origin + rho * dir;
                  for (int ai = 0; ai < n_e; ++ai)
                    phase_y[ai] = -e.wave_vectors[ai].dot(y) + e.phases[ai];
                  double shift = r - k * dt;
                  double seg[8];
                  int n_seg = time_segments(shift, dt, seg, 8);
                  for (int sg = 0; sg + 1 < n_seg; ++sg) {
                    double ta = seg[sg], tb2 = seg[sg + 1];
                    if (tb2 - ta <= 1e-15 * dt) continue;
                    double midt = 0.5 * (ta + tb2), halft = 0.5 * (tb2 - ta);
                    for (int tg = 0; tg < gt.size(); ++tg) {
                      double tau = midt + halft * gt.nodes[tg];
                      double w_t = gt.weights[tg] * halft * w_sp;
                      double sarg = tau - shift;
                      double ha = hat0(sarg, dt);
                      if (ha == 0.0) continue;
                      double ht = hat0(tau, dt);
                      double htp = (tau < 0.0 ? 1.0 : -1.0) / dt;
                      for (int ai = 0; ai < n_e; ++ai) {
                        double ansatz = ha * std::cos(omg[ai] * sarg + phase_y[ai]);
                        double wa = w_t * ansatz;
                        for (int bi = 0; bi < n_e; ++bi) {
                          double test = htp * std::cos(omg[bi] * tau + phase_x[bi]) -
                                        omg[bi] * ht * std::sin(omg[bi] * tau + phase_x[bi]);
                          local(bi, ai) += wa * test;
                        }
                      }
                    }
                  }
                }
              };

              for (int seg_i = 0; seg_i + 1 < n_pts; ++seg_i) {
                double ra = pts[seg_i], rb2 = pts[seg_i + 1];
                if (rb2 - ra <= 1e-15 * (1.0 + rb2)) continue;
                if (seg_i == 0 && grade_first) {
                  double edge = rb2;
                  for (int d = 0; d < quad.grading_depth; ++d) {
                    double next = edge * quad.grading_ratio;
                    radial_segment(next, edge);
                    edge = next;
                  }
                  radial_segment(ra, edge);
                } else {
                  radial_segment(ra, rb2);
                }
              }
              },
              omega_max);
        }
      };

      refine_outer_patch(test[0], test[1], test[2], {va, vb, vc}, ker, quad, dt,
                         quad.outer_refine_depth,
                         [&](const Eigen::Vector3d& pa, const Eigen::Vector3d& pb,
                             const Eigen::Vector3d& pc) {
                           MappedTriangleRule mq = map_to_triangle(rule, pa, pb, pc);
                           for (size_t q = 0; q < mq.points.size(); ++q)
                             process_x(mq.points[q], mq.weights[q]);
                         });

      for (int ai = 0; ai < n_e; ++ai)
        for (int bi = 0; bi < n_e; ++bi)
          out(bi * n_tri + j, ai * n_tri + i) = local(bi, ai);
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> assemble_all_bands_enriched(const Mesh& mesh, const SpatialBasis& sp,
                                                         const TemporalBasis& tb,
                                                         const Enrichment& e,
                                                         const QuadratureConfig& quad) {
  const int k_max = band_cutoff(mesh_stats(mesh).diameter, tb.dt());
  std::vector<Eigen::MatrixXd> bands;
  bands.reserve(k_max + 2);
  for (int k = -1; k <= k_max; ++k)
    bands.push_back(assemble_band_enriched(mesh, sp, tb, e, k, quad));
  return bands;
}

Eigen::MatrixXd assemble_rhs_enriched(const SpaceTimeFn& f, const Mesh& mesh,
                                      const SpatialBasis& sp, const TemporalBasis& tb,
                                      const Enrichment& e, const QuadratureConfig& quad) {
  quad.validate();
  if (tb.degree() != 1)
    throw std::invalid_argument("assemble_rhs_enriched: requires temporal degree 1");
  const int n_tri = sp.n_dof();
  const int n_e = e.size();
  const int n_steps = tb.grid().n_steps;
  const double dt = tb.dt();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_e * n_tri, n_steps);

  double omega_max = 0.0;
  for (int i = 0; i < n_e; ++i) omega_max = std::max(omega_max, e.frequency(i));
  const int n_t = std::max(quad.rhs_time_order,
                           quad.rhs_time_order + static_cast<int>(std::ceil(omega_max * dt)));
  const GaussRule1d& gt = gauss_legendre(n_t);
  const TriangleRule& rule =
      triangle_rule(quad.rhs_space_degree > 0 ? quad.rhs_space_degree : quad.outer_degree);
  std::vector<double> omg(n_e);
  for (int i = 0; i < n_e; ++i) omg[i] = e.frequency(i);

  for (int j = 0; j < n_tri; ++j) {
    MappedTriangleRule sq =
        map_to_triangle(rule, mesh.vertex_of(j, 0), mesh.vertex_of(j, 1), mesh.vertex_of(j, 2));
    std::vector<double> phase_x(n_e);
    for (int nn = 1; nn <= n_steps; ++nn) {
      for (size_t q = 0; q < sq.points.size(); ++q) {
        const Eigen::Vector3d& x = sq.points[q];
        for (int bi = 0; bi < n_e; ++bi)
          phase_x[bi] = -e.wave_vectors[bi].dot(x) + e.phases[bi];
        // tau = t - n dt over the test hat's two pieces
        for (int piece = 0; piece < 2; ++piece) {
          double lo = (piece == 0) ? -dt : 0.0;
          double hi = (piece == 0) ? 0.0 : dt;
          double slope = (piece == 0 ? 1.0 : -1.0) / dt;
          double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
          for (int g = 0; g < gt.size(); ++g) {
            double tau = mid + half * gt.nodes[g];
            double t = tau + nn * dt;
            double ht = hat0(tau, dt);
            double w = gt.weights[g] * half * sq.weights[q] * f(t, x);
            for (int bi = 0; bi < n_e; ++bi) {
              double test = slope * std::cos(omg[bi] * tau + phase_x[bi]) -
                            omg[bi] * ht * std::sin(omg[bi] * tau + phase_x[bi]);
              rhs(bi * n_tri + j, nn - 1) += w * test;
            }
          }
        }
      }
    }
  }
  return rhs;
}

}  // namespace tdbem
