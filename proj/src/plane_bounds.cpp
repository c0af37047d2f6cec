#include "rnncert/plane_bounds.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "rnncert/model.hpp"

namespace rnncert {

std::string to_string(CrossKind kind) { return kind == CrossKind::SigZ ? "sigz" : "sigtanh"; }

std::string to_string(CrossStrategy strategy) {
  switch (strategy) {
    case CrossStrategy::Planes2D: return "planes";
    case CrossStrategy::Lines1D: return "lines";
    case CrossStrategy::Constants: return "constants";
  }
  return "?";
}

CrossStrategy parse_strategy(const std::string& text) {
  if (text == "planes" || text == "planes2d") return CrossStrategy::Planes2D;
  if (text == "lines" || text == "lines1d") return CrossStrategy::Lines1D;
  if (text == "constants") return CrossStrategy::Constants;
  throw std::invalid_argument("unknown strategy '" + text + "' (expected planes, lines, constants)");
}

namespace {

double z_factor(CrossKind kind, double z) { return kind == CrossKind::SigZ ? z : std::tanh(z); }

}  // namespace

double eval_cross(CrossKind kind, double v, double z) { return sigmoid(v) * z_factor(kind, z); }

namespace {

constexpr std::size_t kFineGrid = 201;
constexpr std::size_t kCoarseStride = 4;  // 201 -> 51 points
constexpr int kFitSteps = 200;
constexpr double kFitStepSize = 0.05;
constexpr int kDecayEvery = 50;

void check_box(const Box2D& b) {
  if (!std::isfinite(b.l_v) || !std::isfinite(b.u_v) || !std::isfinite(b.l_z) ||
      !std::isfinite(b.u_z)) {
    throw IntervalError("box endpoints must be finite");
  }
  if (b.l_v > b.u_v || b.l_z > b.u_z) throw IntervalError("box lower end exceeds upper end");
}

bool is_point(const Box2D& b) { return b.l_v == b.u_v && b.l_z == b.u_z; }

/// g sampled on a tensor grid. Zero-width axes collapse to a single node.
struct Grid {
  std::vector<double> vs, zs;
  std::vector<double> g;  // g[i * zs.size() + j]
  double dv = 0.0, dz = 0.0;

  Grid(CrossKind kind, const Box2D& b, std::size_t n) {
    const std::size_t nv = b.u_v > b.l_v ? n : 1;
    const std::size_t nz = b.u_z > b.l_z ? n : 1;
    vs = axis(b.l_v, b.u_v, nv);
    zs = axis(b.l_z, b.u_z, nz);
    dv = nv > 1 ? (b.u_v - b.l_v) / static_cast<double>(nv - 1) : 0.0;
    dz = nz > 1 ? (b.u_z - b.l_z) / static_cast<double>(nz - 1) : 0.0;
    std::vector<double> sv(nv), fz(nz);
    for (std::size_t i = 0; i < nv; ++i) sv[i] = sigmoid(vs[i]);
    for (std::size_t j = 0; j < nz; ++j) fz[j] = z_factor(kind, zs[j]);
    g.resize(nv * nz);
    for (std::size_t i = 0; i < nv; ++i)
      for (std::size_t j = 0; j < nz; ++j) g[i * nz + j] = sv[i] * fz[j];
  }

  static std::vector<double> axis(double l, double u, std::size_t n) {
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = n == 1 ? l : l + (u - l) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    if (n > 1) a.back() = u;
    return a;
  }
};

// max |sigmoid''| and max |tanh''| over the reals
constexpr double kSigmoidCurv = 0.0962250448649377;  // 1 / (6 sqrt 3)
constexpr double kTanhCurv = 0.769800358919501;      // 4 / (3 sqrt 3)

/// Smallest gamma making alpha v + beta z + gamma >= sign * g on the grid,
/// plus a margin covering the gaps between nodes. On each cell the plane
/// minus g differs from its bilinear interpolant by at most
/// (dv^2 max|g_vv| + dz^2 max|g_zz|) / 8, and the interpolant never exceeds
/// the largest corner.
double lift_upper(CrossKind kind, const Box2D& b, const Grid& grid, double sign, double alpha, double beta) {
  double worst = -std::numeric_limits<double>::infinity();
  const std::size_t nz = grid.zs.size();
  for (std::size_t i = 0; i < grid.vs.size(); ++i) {
    const double av = alpha * grid.vs[i];
    for (std::size_t j = 0; j < nz; ++j) {
      worst = std::max(worst, sign * grid.g[i * nz + j] - av - beta * grid.zs[j]);
    }
  }
  const double fz_max = std::max(std::abs(z_factor(kind, b.l_z)), std::abs(z_factor(kind, b.u_z)));
  const double g_vv = kSigmoidCurv * fz_max;
  const double g_zz = kind == CrossKind::SigZ ? 0.0 : sigmoid(b.u_v) * kTanhCurv;
  const double margin = (grid.dv * grid.dv * g_vv + grid.dz * grid.dz * g_zz) / 8.0;
  return worst + margin + 1e-12 * (1.0 + std::abs(worst));
}

/// Plane above sign * g: subgradient descent on the integrated gap with the
/// offset re-lifted after each step so every iterate stays valid on the
/// coarse grid. Works in coordinates normalised to [-1, 1]^2.
std::array<double, 3> fit_upper(CrossKind kind, const Box2D& b, const Grid& fine, double sign) {
  const double vc = 0.5 * (b.l_v + b.u_v);
  const double zc = 0.5 * (b.l_z + b.u_z);
  const double hv = 0.5 * (b.u_v - b.l_v);
  const double hz = 0.5 * (b.u_z - b.l_z);

  const std::size_t nv = fine.vs.size();
  const std::size_t nz = fine.zs.size();
  std::vector<double> cs, ct, cg;
  for (std::size_t i = 0; i < nv; i += (nv > 1 ? kCoarseStride : 1)) {
    for (std::size_t j = 0; j < nz; j += (nz > 1 ? kCoarseStride : 1)) {
      cs.push_back(hv > 0.0 ? (fine.vs[i] - vc) / hv : 0.0);
      ct.push_back(hz > 0.0 ? (fine.zs[j] - zc) / hz : 0.0);
      cg.push_back(sign * fine.g[i * nz + j]);
    }
  }

  // Tangent plane at the centre as the starting point.
  const double sc = sigmoid(vc);
  const double fzc = z_factor(kind, zc);
  const double dfz = kind == CrossKind::SigZ ? 1.0 : derivative(ScalarFn::Tanh, zc);
  double a = sign * sc * (1.0 - sc) * fzc * hv;
  double bb = sign * sc * dfz * hz;

  auto offset = [&](double pa, double pb, std::size_t& arg) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cg.size(); ++k) {
      const double d = cg[k] - pa * cs[k] - pb * ct[k];
      if (d > worst) {
        worst = d;
        arg = k;
      }
    }
    return worst;
  };

  std::size_t arg = 0;
  double best_c = offset(a, bb, arg);
  double best_a = a, best_b = bb;
  double step = kFitStepSize;
  for (int it = 0; it < kFitSteps; ++it) {
    if (it > 0 && it % kDecayEvery == 0) step *= 0.5;
    // The gap at the centre equals the offset c(a, b); its subgradient is
    // (-s*, -t*) at the maximising node.
    a += step * cs[arg];
    bb += step * ct[arg];
    const double c = offset(a, bb, arg);
    if (c < best_c) {
      best_c = c;
      best_a = a;
      best_b = bb;
    }
  }

  const double alpha = hv > 0.0 ? best_a / hv : 0.0;
  const double beta = hz > 0.0 ? best_b / hz : 0.0;
  const double gamma = lift_upper(kind, b, fine, sign, alpha, beta);
  return {alpha, beta, gamma};
}

BoundingPlane make_plane(CrossKind kind, Side side, double alpha, double beta, double gamma) {
  return {alpha, beta, gamma, side, kind};
}

PlanePair constants(CrossKind kind, const Box2D& b) {
  // g is monotone in v for fixed z and monotone in z for fixed v, so its
  // extrema over the box sit at the corners.
  const std::array<double, 4> corners = {eval_cross(kind, b.l_v, b.l_z), eval_cross(kind, b.l_v, b.u_z),
                                         eval_cross(kind, b.u_v, b.l_z), eval_cross(kind, b.u_v, b.u_z)};
  const auto [lo, hi] = std::minmax_element(corners.begin(), corners.end());
  return {make_plane(kind, Side::Upper, 0.0, 0.0, *hi), make_plane(kind, Side::Lower, 0.0, 0.0, *lo)};
}

double centre_value(const BoundingPlane& p, const Box2D& b) {
  return p(0.5 * (b.l_v + b.u_v), 0.5 * (b.l_z + b.u_z));
}

/// Keeps the candidate with the smaller integrated gap, i.e. the smaller
/// (upper) or larger (lower) value at the box centre.
void keep_tighter(BoundingPlane& current, const BoundingPlane& candidate, const Box2D& b) {
  const double c0 = centre_value(current, b);
  const double c1 = centre_value(candidate, b);
  if (current.side == Side::Upper ? c1 < c0 : c1 > c0) current = candidate;
}

/// Line in v: sigmoid(v) scaled by the extreme z factor.
BoundingPlane line_in_v(CrossKind kind, const Box2D& b, Side side) {
  const double factor = side == Side::Upper ? z_factor(kind, b.u_z) : z_factor(kind, b.l_z);
  const LinePair sl = bound_activation(ScalarFn::Sigmoid, b.l_v, b.u_v);
  // factor * sigmoid(v): a negative factor swaps which sigmoid line applies.
  const bool use_upper = (side == Side::Upper) == (factor >= 0.0);
  const BoundingLine& line = use_upper ? sl.upper : sl.lower;
  return make_plane(kind, side, factor * line.slope, 0.0, factor * line.intercept);
}

/// Line in z bounding H(z) = max_v g (upper) or min_v g (lower).
BoundingPlane line_in_z(CrossKind kind, const Box2D& b, Side side) {
  const double s_lo = sigmoid(b.l_v);
  const double s_hi = sigmoid(b.u_v);
  auto envelope = [&](double z) {
    const double f = z_factor(kind, z);
    const bool take_hi = (side == Side::Upper) == (f >= 0.0);
    return f * (take_hi ? s_hi : s_lo);
  };
  const double hl = envelope(b.l_z);
  const double hu = envelope(b.u_z);
  if (b.u_z == b.l_z) return make_plane(kind, side, 0.0, 0.0, side == Side::Upper ? hu : hl);
  const double slope = (hu - hl) / (b.u_z - b.l_z);
  double gamma = hl - slope * b.l_z;
  if (kind == CrossKind::SigTanh) {
    // Not piecewise linear: lift the chord over a grid. The envelope is the
    // max (min) of two smooth branches, so the interpolation bound applies.
    const double sign = side == Side::Upper ? 1.0 : -1.0;
    double worst = -std::numeric_limits<double>::infinity();
    const std::vector<double> zs = Grid::axis(b.l_z, b.u_z, kFineGrid);
    for (double z : zs) worst = std::max(worst, sign * (envelope(z) - (slope * z + gamma)));
    const double dz = (b.u_z - b.l_z) / static_cast<double>(kFineGrid - 1);
    gamma += sign * (worst + dz * dz * s_hi * kTanhCurv / 8.0 + 1e-12);
  }
  // For SigZ the envelope is convex (upper) / concave (lower) piecewise
  // linear, so the chord is already valid.
  return make_plane(kind, side, 0.0, slope, gamma);
}

PlanePair lines(CrossKind kind, const Box2D& b) {
  PlanePair best = constants(kind, b);
  keep_tighter(best.upper, line_in_v(kind, b, Side::Upper), b);
  keep_tighter(best.upper, line_in_z(kind, b, Side::Upper), b);
  keep_tighter(best.lower, line_in_v(kind, b, Side::Lower), b);
  keep_tighter(best.lower, line_in_z(kind, b, Side::Lower), b);
  return best;
}

PlanePair planes(CrossKind kind, const Box2D& b) {
  const Grid fine(kind, b, kFineGrid);
  const auto up = fit_upper(kind, b, fine, 1.0);
  const auto dn = fit_upper(kind, b, fine, -1.0);
  PlanePair fitted{make_plane(kind, Side::Upper, up[0], up[1], up[2]),
                   make_plane(kind, Side::Lower, -dn[0], -dn[1], -dn[2])};
  const PlanePair fallback = lines(kind, b);
  keep_tighter(fitted.upper, fallback.upper, b);
  keep_tighter(fitted.lower, fallback.lower, b);
  return fitted;
}

}  // namespace

PlanePair bound_cross(CrossKind kind, const Box2D& box, CrossStrategy strategy) {
  check_box(box);
  if (is_point(box)) {
    const double g = eval_cross(kind, box.l_v, box.l_z);
    return {make_plane(kind, Side::Upper, 0.0, 0.0, g), make_plane(kind, Side::Lower, 0.0, 0.0, g)};
  }
  switch (strategy) {
    case CrossStrategy::Constants: return constants(kind, box);
    case CrossStrategy::Lines1D: return lines(kind, box);
    case CrossStrategy::Planes2D: return planes(kind, box);
  }
  return constants(kind, box);
}

double max_grid_violation(const BoundingPlane& plane, const Box2D& box, std::size_t n) {
  check_box(box);
  const Grid grid(plane.kind, box, n);
  const std::size_t nz = grid.zs.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.vs.size(); ++i) {
    for (std::size_t j = 0; j < nz; ++j) {
      const double h = plane(grid.vs[i], grid.zs[j]);
      const double g = grid.g[i * nz + j];
      worst = std::max(worst, plane.side == Side::Upper ? g - h : h - g);
    }
  }
  return worst;
}

// ---- cache ---------------------------------------------------------------

PlaneCache::Key PlaneCache::make_key(CrossKind kind, const Box2D& box, CrossStrategy strategy) {
  return {static_cast<int>(kind),
          static_cast<int>(strategy),
          std::bit_cast<std::uint64_t>(box.l_v),
          std::bit_cast<std::uint64_t>(box.u_v),
          std::bit_cast<std::uint64_t>(box.l_z),
          std::bit_cast<std::uint64_t>(box.u_z)};
}

PlanePair PlaneCache::get_or_fit(CrossKind kind, const Box2D& box, CrossStrategy strategy) {
  const Key key = make_key(kind, box, strategy);
  {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      ++hits_;
      return it->second;
    }
  }
  PlanePair fitted = bound_cross(kind, box, strategy);
  ++misses_;
  std::unique_lock lock(mutex_);
  entries_.emplace(key, fitted);
  return fitted;
}

std::size_t PlaneCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::size_t PlaneCache::hits() const { return hits_; }
std::size_t PlaneCache::misses() const { return misses_; }

void PlaneCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
  hits_ = 0;
  misses_ = 0;
}

PlaneCache& PlaneCache::global() {
  static PlaneCache cache;
  return cache;
}

void PlaneCache::save(const std::filesystem::path& path) const {
  using nlohmann::json;
  json doc;
  json items = json::array();
  {
    std::shared_lock lock(mutex_);
    for (const auto& [key, pair] : entries_) {
      json e;
      e["kind"] = to_string(static_cast<CrossKind>(std::get<0>(key)));
      e["strategy"] = to_string(static_cast<CrossStrategy>(std::get<1>(key)));
      e["box"] = {std::bit_cast<double>(std::get<2>(key)), std::bit_cast<double>(std::get<3>(key)),
                  std::bit_cast<double>(std::get<4>(key)), std::bit_cast<double>(std::get<5>(key))};
      e["upper"] = {pair.upper.alpha, pair.upper.beta, pair.upper.gamma};
      e["lower"] = {pair.lower.alpha, pair.lower.beta, pair.lower.gamma};
      items.push_back(std::move(e));
    }
  }
  doc["planes"] = std::move(items);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << doc.dump(1) << "\n";
}

std::size_t PlaneCache::load(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.contains("planes") || !doc["planes"].is_array()) {
    throw FormatError(path.string() + ": missing field 'planes'");
  }
  std::size_t accepted = 0;
  for (const auto& e : doc["planes"]) {
    try {
      const std::string kind_text = e.at("kind").get<std::string>();
      const CrossKind kind = kind_text == "sigz" ? CrossKind::SigZ : CrossKind::SigTanh;
      const CrossStrategy strategy = parse_strategy(e.at("strategy").get<std::string>());
      const auto bx = e.at("box").get<std::vector<double>>();
      const auto up = e.at("upper").get<std::vector<double>>();
      const auto lo = e.at("lower").get<std::vector<double>>();
      if (bx.size() != 4 || up.size() != 3 || lo.size() != 3) continue;
      const Box2D box{bx[0], bx[1], bx[2], bx[3]};
      PlanePair pair{make_plane(kind, Side::Upper, up[0], up[1], up[2]),
                     make_plane(kind, Side::Lower, lo[0], lo[1], lo[2])};
      if (max_grid_violation(pair.upper, box, kFineGrid) > 0.0 ||
          max_grid_violation(pair.lower, box, kFineGrid) > 0.0) {
        continue;
      }
      std::unique_lock lock(mutex_);
      entries_.insert_or_assign(make_key(kind, box, strategy), pair);
      ++accepted;
    } catch (const std::exception&) {
      continue;
    }
  }
  return accepted;
}

}  // namespace rnncert
