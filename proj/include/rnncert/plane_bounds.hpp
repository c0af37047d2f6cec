#pragma once

// Linear bounding planes for the two-variable products that appear in LSTM
// and GRU cells:
//   SigZ     g(v, z) = sigmoid(v) * z
//   SigTanh  g(v, z) = sigmoid(v) * tanh(z)
// over a box [l_v, u_v] x [l_z, u_z].

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <shared_mutex>
#include <string>
#include <tuple>

#include "rnncert/scalar_bounds.hpp"

namespace rnncert {

enum class CrossKind { SigZ, SigTanh };
enum class CrossStrategy { Planes2D, Lines1D, Constants };

std::string to_string(CrossKind kind);
std::string to_string(CrossStrategy strategy);
CrossStrategy parse_strategy(const std::string& text);

double eval_cross(CrossKind kind, double v, double z);

struct Box2D {
  double l_v = 0.0;
  double u_v = 0.0;
  double l_z = 0.0;
  double u_z = 0.0;
};

/// h(v, z) = alpha * v + beta * z + gamma.
struct BoundingPlane {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  Side side = Side::Upper;
  CrossKind kind = CrossKind::SigZ;

  double operator()(double v, double z) const { return alpha * v + beta * z + gamma; }
};

struct PlanePair {
  BoundingPlane upper;
  BoundingPlane lower;
};

/// Sound planes with lower <= g <= upper on the whole box.
///   Constants  alpha = beta = 0, gamma the exact box max / min of g.
///   Lines1D    the tighter of a line in v (beta = 0) or in z (alpha = 0).
///   Planes2D   a fitted plane, falling back to the Lines1D choice if that is
///              tighter at the box centre.
/// Throws IntervalError on an invalid box.
PlanePair bound_cross(CrossKind kind, const Box2D& box, CrossStrategy strategy);

/// Largest violation of the plane on an n x n grid over the box (positive
/// means the plane is on the wrong side somewhere).
double max_grid_violation(const BoundingPlane& plane, const Box2D& box, std::size_t n);

/// Memoises bound_cross by exact box coordinates. Safe for concurrent use.
class PlaneCache {
 public:
  PlanePair get_or_fit(CrossKind kind, const Box2D& box, CrossStrategy strategy);

  std::size_t size() const;
  std::size_t hits() const;
  std::size_t misses() const;
  void clear();

  /// JSON persistence. Loaded entries are re-verified on a grid and dropped
  /// if they fail; returns the number of entries accepted.
  void save(const std::filesystem::path& path) const;
  std::size_t load(const std::filesystem::path& path);

  static PlaneCache& global();

 private:
  using Key = std::tuple<int, int, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;
  static Key make_key(CrossKind kind, const Box2D& box, CrossStrategy strategy);

  mutable std::shared_mutex mutex_;
  std::map<Key, PlanePair> entries_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

}  // namespace rnncert
