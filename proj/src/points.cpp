#include "ak/points.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ak/errors.hpp"

namespace ak {

PointSpace PointSpace::euclidean(int d) {
  if (d < 1) throw ParamError("euclidean space needs dimension >= 1");
  PointSpace s;
  s.kind_ = Kind::Euclidean;
  s.dim_ = d;
  return s;
}

PointSpace PointSpace::sphere(int d) {
  if (d < 1) throw ParamError("sphere needs dimension >= 1");
  PointSpace s;
  s.kind_ = Kind::Sphere;
  s.dim_ = d;
  return s;
}

PointSpace PointSpace::product(PointSpace left, PointSpace right) {
  PointSpace s;
  s.kind_ = Kind::Product;
  s.dim_ = 0;
  s.left_ = std::make_shared<const PointSpace>(std::move(left));
  s.right_ = std::make_shared<const PointSpace>(std::move(right));
  return s;
}

PointSpace PointSpace::opaque(std::size_t count) {
  if (count < 1) throw ParamError("opaque space needs at least one element");
  PointSpace s;
  s.kind_ = Kind::Opaque;
  s.dim_ = static_cast<int>(count);
  return s;
}

std::size_t PointSpace::ambient_dim() const {
  switch (kind_) {
    case Kind::Euclidean: return static_cast<std::size_t>(dim_);
    case Kind::Sphere: return static_cast<std::size_t>(dim_) + 1;
    case Kind::Product: return left_->ambient_dim() + right_->ambient_dim();
    case Kind::Opaque: return 1;
  }
  return 0;
}

const PointSpace& PointSpace::left() const {
  if (kind_ != Kind::Product) throw DomainError("left(): not a product space");
  return *left_;
}

const PointSpace& PointSpace::right() const {
  if (kind_ != Kind::Product) throw DomainError("right(): not a product space");
  return *right_;
}

void PointSpace::validate(std::span<const double> p, double sphere_tol) const {
  if (p.size() != ambient_dim())
    throw DomainError(descriptor() + ": expected " + std::to_string(ambient_dim()) +
                      " coordinates, got " + std::to_string(p.size()));
  for (double x : p)
    if (!std::isfinite(x)) throw DomainError(descriptor() + ": non-finite coordinate");
  switch (kind_) {
    case Kind::Euclidean: return;
    case Kind::Sphere: {
      const double n = std::sqrt(dot(p, p));
      if (std::abs(n - 1.0) > sphere_tol)
        throw DomainError(descriptor() + ": point norm " + std::to_string(n) + " is not 1");
      return;
    }
    case Kind::Product: {
      const std::size_t k = left_->ambient_dim();
      left_->validate(p.subspan(0, k), sphere_tol);
      right_->validate(p.subspan(k), sphere_tol);
      return;
    }
    case Kind::Opaque: {
      const double idx = p[0];
      if (idx != std::floor(idx) || idx < 0 || idx >= dim_)
        throw DomainError(descriptor() + ": index out of range");
      return;
    }
  }
}

std::pair<Point, Point> PointSpace::split(std::span<const double> p) const {
  if (kind_ != Kind::Product) throw DomainError("split(): not a product space");
  if (p.size() != ambient_dim()) throw DomainError("split(): wrong coordinate count");
  const std::size_t k = left_->ambient_dim();
  return {Point(p.begin(), p.begin() + k), Point(p.begin() + k, p.end())};
}

Point PointSpace::join(std::span<const double> left, std::span<const double> right) const {
  if (kind_ != Kind::Product) throw DomainError("join(): not a product space");
  Point p(left.begin(), left.end());
  p.insert(p.end(), right.begin(), right.end());
  return p;
}

Point PointSpace::random_point(CounterRng& rng) const {
  switch (kind_) {
    case Kind::Euclidean: return rng.normal_vector(static_cast<std::size_t>(dim_));
    case Kind::Sphere: return rng.unit_vector(static_cast<std::size_t>(dim_) + 1);
    case Kind::Product: {
      auto l = left_->random_point(rng);
      auto r = right_->random_point(rng);
      return join(l, r);
    }
    case Kind::Opaque:
      return {static_cast<double>(rng() % static_cast<std::uint64_t>(dim_))};
  }
  return {};
}

std::string PointSpace::descriptor() const {
  switch (kind_) {
    case Kind::Euclidean: return "euclidean:" + std::to_string(dim_);
    case Kind::Sphere: return "sphere:" + std::to_string(dim_);
    case Kind::Opaque: return "opaque:" + std::to_string(dim_);
    case Kind::Product: return "product:" + left_->descriptor() + "/" + right_->descriptor();
  }
  return {};
}

namespace {

int parse_positive(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 1)
    throw SchemaError("bad space descriptor '" + std::string(whole) + "'");
  return v;
}

}  // namespace

PointSpace PointSpace::parse(std::string_view d) {
  if (d.starts_with("product:")) {
    const auto rest = d.substr(8);
    const auto slash = rest.find('/');
    if (slash == std::string_view::npos || rest.find('/', slash + 1) != std::string_view::npos)
      throw SchemaError("bad product descriptor '" + std::string(d) + "'");
    return product(parse(rest.substr(0, slash)), parse(rest.substr(slash + 1)));
  }
  const auto colon = d.find(':');
  if (colon == std::string_view::npos)
    throw SchemaError("bad space descriptor '" + std::string(d) + "'");
  const auto kind = d.substr(0, colon);
  const int n = parse_positive(d.substr(colon + 1), d);
  if (kind == "euclidean") return euclidean(n);
  if (kind == "sphere") return sphere(n);
  if (kind == "opaque") return opaque(static_cast<std::size_t>(n));
  throw SchemaError("unknown space kind '" + std::string(kind) + "'");
}

nlohmann::json PointSpace::to_json() const { return descriptor(); }

PointSpace PointSpace::from_json(const nlohmann::json& j) {
  if (!j.is_string()) throw SchemaError("space descriptor must be a string");
  return parse(j.get<std::string>());
}

bool PointSpace::operator==(const PointSpace& other) const {
  return descriptor() == other.descriptor();
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("squared_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double geodesic_distance(std::span<const double> a, std::span<const double> b) {
  // 2 atan2(|a - b|, |a + b|) equals arccos<a, b> on the sphere and stays
  // accurate (exactly 0 for a == b) where arccos is ill-conditioned.
  if (a.size() != b.size()) throw ShapeError("geodesic_distance: length mismatch");
  double diff = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    sum += (a[i] + b[i]) * (a[i] + b[i]);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

}  // namespace ak
