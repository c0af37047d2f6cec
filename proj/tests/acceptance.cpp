// Acceptance checks, one line per criterion:
//   acceptance            run everything
//   acceptance <name>...  run the named criteria
// Exit status is non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rnncert/baselines.hpp"
#include "rnncert/certify.hpp"
#include "rnncert/plane_bounds.hpp"
#include "rnncert/propagation.hpp"
#include "rnncert/scalar_bounds.hpp"

using namespace rnncert;
using fixtures::Fixture;
using fixtures::Frames;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const std::vector<double> kNorms = {1.0, 2.0, kInfNorm};

const std::vector<Fixture>& all_fixtures() {
  static const std::vector<Fixture> f = fixtures::standard(3);
  return f;
}

// Certificates are reused across criteria within one process.
double certified(std::size_t fi, std::size_t xi, double p, CrossStrategy st = CrossStrategy::Planes2D,
                 std::optional<std::size_t> frame = std::nullopt) {
  static std::map<std::tuple<std::size_t, std::size_t, double, int, std::size_t>, double> memo;
  const auto key = std::make_tuple(fi, xi, p, static_cast<int>(st), frame.value_or(0));
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  const Fixture& f = all_fixtures()[fi];
  const auto r = certify_untargeted(f.model, f.inputs[xi], f.labels[xi], p, frame, st);
  if (!r.verified) throw std::runtime_error("certificate failed its post-hoc check on " + f.name);
  return memo[key] = r.certified_epsilon;
}

// Grid over every perturbed coordinate in [-r, r], keeping points inside
// each frame's lp ball.
void frame_grid(const Frames& x0, double p, double r, std::size_t res, const std::function<void(const Frames&)>& f) {
  const std::size_t m = x0.size(), n = x0[0].size(), dims = m * n;
  std::vector<std::size_t> idx(dims, 0);
  Frames x = x0;
  for (;;) {
    bool inside = true;
    for (std::size_t k = 0; k < m && inside; ++k) {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) {
        d[i] = -r + 2.0 * r * static_cast<double>(idx[k * n + i]) / static_cast<double>(res - 1);
        x[k][i] = x0[k][i] + d[i];
      }
      inside = oracle::lp(d, p) <= r * (1.0 + 1e-12);
    }
    if (inside) f(x);
    std::size_t i = 0;
    while (i < dims && ++idx[i] == res) idx[i++] = 0;
    if (i == dims) break;
  }
}

std::size_t grid_resolution(std::size_t dims) {
  static const std::size_t res[] = {0, 1001, 101, 41, 21};
  return dims <= 4 ? res[dims] : 0;
}

Outcome soundness() {
  const std::vector<double> radii = {0.01, 0.05, 0.1, 0.5};
  std::size_t cases = 0, samples = 0, grid_points = 0, violations = 0;
  std::string first;
  const auto& fx = all_fixtures();
  for (std::size_t fi = 0; fi < fx.size(); ++fi) {
    const Fixture& f = fx[fi];
    const Frames& x0 = f.inputs[0];
    const std::size_t dims = fixtures::perturbed_dims(f.model);
    for (double p : kNorms) {
      for (double eps : radii) {
        ++cases;
        const auto g = compute_global_bounds(f.model, x0, PerturbationSpec::all_frames(p, eps));
        std::size_t bad = 0;
        auto check = [&](const Frames& x) {
          const auto out = oracle::forward(f.model, x);
          for (std::size_t j = 0; j < out.size(); ++j) {
            if (out[j] < g.gamma_L[j] || out[j] > g.gamma_U[j]) {
              ++bad;
              return;
            }
          }
        };
        oracle::BallSampler s(1000 * fi + cases);
        Frames x = x0;
        for (std::size_t i = 0; i < 100000; ++i) {
          for (std::size_t k = 0; k < x.size(); ++k) {
            const auto d = s.draw(f.model.n, p, eps, i % 2 == 1);
            for (std::size_t c = 0; c < d.size(); ++c) x[k][c] = x0[k][c] + d[c];
          }
          check(x);
          ++samples;
        }
        if (const std::size_t res = grid_resolution(dims)) {
          frame_grid(x0, p, eps, res, [&](const Frames& xx) {
            check(xx);
            ++grid_points;
          });
        }
        if (bad && first.empty()) {
          first = " first at " + f.name + " p=" + format_norm(p) + " eps=" + std::to_string(eps);
        }
        violations += bad;
      }
    }
  }
  std::ostringstream os;
  os << fx.size() << " fixtures, " << cases << " cases, " << samples << " samples, " << grid_points
     << " grid points, " << violations << " violations" << first;
  return {violations == 0 && fx.size() >= 20, os.str()};
}

Outcome zero_radius() {
  double worst_rnn = 0.0, worst_gated = 0.0;
  for (const auto& f : all_fixtures()) {
    for (const auto& x : f.inputs) {
      for (double p : kNorms) {
        const auto g = compute_global_bounds(f.model, x, PerturbationSpec::all_frames(p, 0.0));
        const auto out = oracle::forward(f.model, x);
        double& worst = f.model.kind() == CellKind::Vanilla ? worst_rnn : worst_gated;
        for (std::size_t j = 0; j < out.size(); ++j) {
          worst = std::max({worst, std::abs(g.gamma_U[j] - out[j]), std::abs(g.gamma_L[j] - out[j])});
        }
      }
    }
  }
  std::ostringstream os;
  os << "max gap vanilla " << worst_rnn << " (limit 1e-9), lstm/gru " << worst_gated << " (limit 1e-7)";
  return {worst_rnn <= 1e-9 && worst_gated <= 1e-7, os.str()};
}

Outcome relaxations() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> end10(-10.0, 10.0), end5(-5.0, 5.0);
  double worst_line = -INFINITY, worst_plane = -INFINITY;
  std::size_t lines = 0, planes = 0;
  for (ScalarFn fn : {ScalarFn::Sigmoid, ScalarFn::Tanh}) {
    for (int i = 0; i < 200; ++i) {
      double l = end10(gen), u = end10(gen);
      if (l > u) std::swap(l, u);
      const auto lp = bound_activation(fn, l, u);
      for (int k = 0; k < 1000; ++k) {
        const double v = l + (u - l) * k / 999.0;
        const double f = fn == ScalarFn::Tanh ? std::tanh(v) : oracle::sig(v);
        worst_line = std::max({worst_line, f - lp.upper(v), lp.lower(v) - f});
      }
      ++lines;
    }
  }
  for (CrossKind kind : {CrossKind::SigZ, CrossKind::SigTanh}) {
    for (int i = 0; i < 200; ++i) {
      double a = end5(gen), b = end5(gen), c = end5(gen), d = end5(gen);
      const Box2D box{std::min(a, b), std::max(a, b), std::min(c, d), std::max(c, d)};
      for (CrossStrategy st : {CrossStrategy::Planes2D, CrossStrategy::Lines1D, CrossStrategy::Constants}) {
        const auto pp = bound_cross(kind, box, st);
        for (int iv = 0; iv < 201; ++iv) {
          const double v = box.l_v + (box.u_v - box.l_v) * iv / 200.0;
          for (int iz = 0; iz < 201; ++iz) {
            const double z = box.l_z + (box.u_z - box.l_z) * iz / 200.0;
            const double g = oracle::sig(v) * (kind == CrossKind::SigZ ? z : std::tanh(z));
            worst_plane = std::max({worst_plane, g - pp.upper(v, z), pp.lower(v, z) - g});
          }
        }
        ++planes;
      }
    }
  }
  std::ostringstream os;
  os << lines << " line pairs worst violation " << worst_line << ", " << planes << " plane pairs worst violation "
     << worst_plane << " (limit 1e-9)";
  return {worst_line <= 1e-9 && worst_plane <= 1e-9, os.str()};
}

Outcome sandwich() {
  std::size_t checks = 0, grid_hits = 0, gradient_hits = 0, violations = 0;
  std::string first;
  const auto& fx = all_fixtures();
  for (std::size_t fi = 0; fi < fx.size(); ++fi) {
    const Fixture& f = fx[fi];
    const std::size_t dims = fixtures::perturbed_dims(f.model);
    static const std::size_t res_by_dims[] = {0, 2001, 201, 41, 17, 9, 7};
    for (std::size_t xi = 0; xi < f.inputs.size(); ++xi) {
      for (double p : kNorms) {
        const double eps = certified(fi, xi, p);
        GradientAttackConfig cfg;
        cfg.seed = fi * 100 + xi;
        const auto ga = gradient_attack(f.model, f.inputs[xi], f.labels[xi], p, cfg);
        auto record = [&](const AttackResult& a) {
          ++checks;
          if (a.distortion < eps) {
            ++violations;
            if (first.empty()) first = " first at " + f.name + " p=" + format_norm(p);
          }
        };
        if (ga.success) {
          ++gradient_hits;
          record(ga);
        }
        if (dims <= kGridMaxDims) {
          const double radius = ga.success ? ga.distortion : 3.0 * eps + 0.1;
          const auto gr = grid_attack(f.model, f.inputs[xi], f.labels[xi], p, radius, res_by_dims[dims]);
          if (gr.success) {
            ++grid_hits;
            record(gr);
          }
        }
      }
    }
  }
  std::ostringstream os;
  os << checks << " successful attacks (" << gradient_hits << " gradient, " << grid_hits << " grid), " << violations
     << " below the certificate" << first;
  return {violations == 0 && checks > 0, os.str()};
}

Outcome ordering() {
  std::size_t ok = 0, total = 0;
  std::ostringstream bad;
  double sum_c = 0, sum_cl = 0, sum_a = 0;
  const auto& fx = all_fixtures();
  for (std::size_t fi = 0; fi < fx.size(); ++fi) {
    const Fixture& f = fx[fi];
    double c = 0, cl = 0, a = 0;
    std::size_t n = 0;
    for (std::size_t xi = 0; xi < f.inputs.size(); ++xi) {
      GradientAttackConfig cfg;
      cfg.seed = fi * 100 + xi;
      const auto ga = gradient_attack(f.model, f.inputs[xi], f.labels[xi], kInfNorm, cfg);
      if (!ga.success) continue;
      c += certified(fi, xi, kInfNorm);
      cl += clever_rnn(f.model, f.inputs[xi], f.labels[xi], std::nullopt, kInfNorm, 1.0, 1024, fi * 100 + xi).score;
      a += ga.distortion;
      ++n;
    }
    if (n == 0) continue;
    ++total;
    c /= n, cl /= n, a /= n;
    sum_c += c, sum_cl += cl, sum_a += a;
    if (c <= cl && cl <= a) {
      ++ok;
    } else {
      bad << " " << f.name << "(" << c << "," << cl << "," << a << ")";
    }
  }
  std::ostringstream os;
  os << "certified <= clever <= attack on " << ok << " of " << total << " fixtures; means " << sum_c / total << " < "
     << sum_cl / total << " < " << sum_a / total;
  if (ok < total) os << "; out of order:" << bad.str();
  return {total > 0 && ok >= 0.8 * total, os.str()};
}

Outcome strategies() {
  std::size_t ok = 0, total = 0;
  std::ostringstream bad;
  const auto& fx = all_fixtures();
  for (std::size_t fi = 0; fi < fx.size(); ++fi) {
    if (fx[fi].model.kind() != CellKind::Lstm) continue;
    for (double p : kNorms) {
      const double planes = certified(fi, 0, p, CrossStrategy::Planes2D);
      const double lines = certified(fi, 0, p, CrossStrategy::Lines1D);
      const double consts = certified(fi, 0, p, CrossStrategy::Constants);
      ++total;
      if (planes >= lines && lines >= consts) {
        ++ok;
      } else {
        bad << " " << fx[fi].name << " p=" << format_norm(p) << "(" << planes << "," << lines << "," << consts << ")";
      }
    }
  }
  std::ostringstream os;
  os << "planes >= lines >= constants on " << ok << " of " << total << " (fixture, p) pairs";
  if (ok < total) os << "; out of order:" << bad.str();
  return {total > 0 && ok >= 0.9 * total, os.str()};
}

Outcome per_frame() {
  std::size_t ok = 0, total = 0;
  std::ostringstream bad;
  const auto& fx = all_fixtures();
  for (std::size_t fi = 0; fi < fx.size(); ++fi) {
    for (double p : kNorms) {
      const double all = certified(fi, 0, p);
      for (std::size_t k = 1; k <= fx[fi].model.m; ++k) {
        const double one = certified(fi, 0, p, CrossStrategy::Planes2D, k);
        ++total;
        if (one >= all) {
          ++ok;
        } else {
          bad << " " << fx[fi].name << " p=" << format_norm(p) << " k=" << k << "(" << one << "<" << all << ")";
        }
      }
    }
  }
  std::ostringstream os;
  os << "single-frame >= all-frame on " << ok << " of " << total << " (fixture, p, frame) triples";
  if (ok < total) os << ";" << bad.str();
  return {ok == total, os.str()};
}

Outcome gradients() {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> pick(1, 4);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  std::size_t cases = 0;
  for (CellKind kind : {CellKind::Vanilla, CellKind::Lstm, CellKind::Gru}) {
    for (int c = 0; c < 100; ++c) {
      const std::size_t n = pick(gen), s = pick(gen) + 1, m = pick(gen), t = pick(gen) + 1;
      const double scale = 0.3 + std::abs(unit(gen)) * 1.7;
      const auto act = c % 3 == 0 ? Activation::Sigmoid : Activation::Tanh;
      const auto model = generate_random_model(gen(), kind, n, s, m, t, scale, act);
      Frames x(m, Vector(n));
      for (auto& f : x) {
        for (double& e : f) e = 2.0 * unit(gen);
      }
      Vector w(t);
      for (double& e : w) e = unit(gen);
      const auto g = input_gradient(model, x, w);
      const auto fd = oracle::finite_difference(model, x, w, 1e-5);
      double diff = 0.0, mag = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          diff = std::max(diff, std::abs(g[k][i] - fd[k][i]));
          mag = std::max(mag, std::abs(fd[k][i]));
        }
      }
      worst = std::max(worst, diff / std::max(mag, 1e-12));
      ++cases;
    }
  }
  std::ostringstream os;
  os << cases << " cases, worst relative error " << worst << " (limit 1e-6)";
  return {worst <= 1e-6, os.str()};
}

Outcome identity() {
  const SearchConfig cfg;
  double worst = 0.0;
  std::size_t count = 0;
  const auto& fx = all_fixtures();
  for (std::size_t fi = 0; fi < fx.size() && count < 10; fi += 2, ++count) {
    const Fixture& f = fx[fi];
    const double untargeted = certified(fi, 0, 2.0);
    double least = INFINITY;
    for (std::size_t i = 0; i < f.model.t; ++i) {
      if (i == f.labels[0]) continue;
      least = std::min(least, certify_targeted(f.model, f.inputs[0], f.labels[0], i, 2.0, std::nullopt,
                                               CrossStrategy::Planes2D, cfg)
                                  .certified_epsilon);
    }
    worst = std::max(worst, std::abs(untargeted - least));
  }
  std::ostringstream os;
  os << count << " fixtures, worst |untargeted - min targeted| " << worst << " (limit " << 2 * cfg.tol << ")";
  return {count == 10 && worst <= 2 * cfg.tol, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"soundness", soundness},   {"zero_radius", zero_radius}, {"relaxations", relaxations},
      {"sandwich", sandwich},     {"ordering", ordering},       {"strategies", strategies},
      {"per_frame", per_frame},   {"gradients", gradients},     {"identity", identity},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
