#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ak/random.hpp"
#include "json.hpp"

namespace ak {

using Point = std::vector<double>;

/// The sets the kernels live on. Points are flat coordinate vectors:
/// euclidean(d) uses d coordinates, sphere(d) uses d+1 (unit norm), a product
/// concatenates left then right coordinates, and opaque points carry a single
/// integer index.
class PointSpace {
 public:
  enum class Kind { Euclidean, Sphere, Product, Opaque };

  static PointSpace euclidean(int d);
  static PointSpace sphere(int d);
  static PointSpace product(PointSpace left, PointSpace right);
  static PointSpace opaque(std::size_t count);

  Kind kind() const noexcept { return kind_; }
  /// Intrinsic dimension d (euclidean/sphere) or index-set size (opaque).
  int dim() const noexcept { return dim_; }
  std::size_t ambient_dim() const;

  const PointSpace& left() const;
  const PointSpace& right() const;

  /// Throws DomainError when p does not belong to the space (wrong length,
  /// non-finite, sphere norm off by more than tol, opaque index out of range).
  void validate(std::span<const double> p, double sphere_tol = 1e-10) const;

  std::pair<Point, Point> split(std::span<const double> p) const;
  Point join(std::span<const double> left, std::span<const double> right) const;

  Point random_point(CounterRng& rng) const;

  /// Textual descriptor: "euclidean:2", "sphere:2", "opaque:5",
  /// "product:euclidean:1/sphere:2".
  std::string descriptor() const;
  static PointSpace parse(std::string_view descriptor);

  nlohmann::json to_json() const;
  static PointSpace from_json(const nlohmann::json& j);

  bool operator==(const PointSpace& other) const;

 private:
  Kind kind_{Kind::Euclidean};
  int dim_{1};
  std::shared_ptr<const PointSpace> left_;
  std::shared_ptr<const PointSpace> right_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

/// Great-circle distance arccos(<a, b>) between unit vectors.
double geodesic_distance(std::span<const double> a, std::span<const double> b);

}  // namespace ak
