#include <cmath>
#include <numbers>

#include "ak/builders.hpp"
#include "ak/errors.hpp"
#include "ak/verify.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ak;
using ak::test::rel_err;

namespace {

std::vector<Point> random_points(const PointSpace& space, int n, std::uint64_t seed) {
  CounterRng rng(seed, 99);
  return sample_points(space, n, rng);
}

bool gram_psd(const MatrixKernel& k, const std::vector<Point>& pts) {
  const auto r = classify_gram(assemble_gram(k, pts));
  return r.min_eig >= -1e-8 * std::max(1.0, r.max_abs_eig);
}

double gram_min_eig(const MatrixKernel& k, const std::vector<Point>& pts) {
  return classify_gram(assemble_gram(k, pts)).min_eig;
}

/// Largest |K_mn(z, z') - K_nm(z', z)| over the sampled pairs.
double symmetry_defect(const MatrixKernel& k, const std::vector<Point>& pts) {
  double worst = 0.0;
  for (const auto& z : pts)
    for (const auto& zp : pts)
      for (int m = 0; m < k.p(); ++m)
        for (int n = 0; n < k.p(); ++n) worst = std::max(worst, std::abs(k.entry(m, n, z, zp) - k.entry(n, m, zp, z)));
  return worst;
}

}  // namespace

TEST_CASE("cm_quadratic reduces to the Gaussian kernel for G = I") {
  const auto e3 = PointSpace::euclidean(3);
  const auto k = build_cm_quadratic(catalog_get("exp_neg"), make_G_constant(1, SymMatrix::identity(3)),
                                    make_H_identity(1, 3), e3);
  // det I = 1 and a = |y - y'|^2.
  for (const auto& y : random_points(e3, 6, 1))
    for (const auto& yp : random_points(e3, 6, 2))
      CHECK(k.entry(0, 0, y, yp) == doctest::Approx(std::exp(-squared_distance(y, yp))).epsilon(1e-14));
}

TEST_CASE("cm_quadratic with constant phi is the determinant kernel") {
  const auto e2 = PointSpace::euclidean(2);
  const auto g = make_G_sum_identity(2, {0.5, 1.0});
  const auto k = build_cm_quadratic(catalog_get("constant", {{"value", 3.0}}), g, make_H_identity(2, 2), e2);
  const auto pts = random_points(e2, 5, 3);
  for (const auto& y : pts)
    for (const auto& yp : pts)
      for (int m = 0; m < 2; ++m)
        for (int n = 0; n < 2; ++n)
          CHECK(rel_err(k.entry(m, n, y, yp), 3.0 / std::sqrt(det_and_inverse(g(m, n, y, yp)).determinant)) < 1e-14);
}

TEST_CASE("cm_quadratic Grams are PSD for the sum family") {
  const auto e2 = PointSpace::euclidean(2);
  const auto k =
      build_cm_quadratic(catalog_get("exp_neg"), make_G_sum_identity(2, {0.5, 1.0}), make_H_identity(2, 2), e2);
  for (std::uint64_t s = 0; s < 10; ++s) CHECK(gram_psd(k, random_points(e2, 6, s)));
}

TEST_CASE("gneiting_single") {
  const auto e2 = PointSpace::euclidean(2);
  const auto phi = catalog_get("exp_neg_power", {{"gamma", 0.7}});
  const auto h = make_H_difference_linear({Matrix{{1, 0.5}, {0, 1}}, Matrix{{0.3, 0}, {1, 1}}});
  const auto g = cnd_sqdist(0.5, 2.0);
  const auto single = build_gneiting_single(phi, g, h, e2);
  const auto via = build_cm_quadratic(phi, make_G_scalar_diag(g, 2, 2), h, e2);
  const auto pts = random_points(e2, 20, 4);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        CHECK(std::abs(single.entry(m, n, pts[i], pts[i + 1]) - via.entry(m, n, pts[i], pts[i + 1])) <= 1e-12);

  const auto gauss = build_gneiting_single(catalog_get("exp_neg"), cnd_constant(1.0), make_H_identity(1, 2), e2);
  CHECK(gauss.entry(0, 0, pts[0], pts[1]) == doctest::Approx(std::exp(-squared_distance(pts[0], pts[1]))));

  // g(y,y) + g(y',y') - 2 g(y,y') = -4|y - y'|^2 < 0 off the diagonal: PD Grams.
  for (std::uint64_t s = 0; s < 5; ++s) CHECK(gram_min_eig(single, random_points(e2, 6, 10 + s)) > kDefaultTolPd);
}

TEST_CASE("gneiting_classic") {
  const auto phi = catalog_get("exp_neg");
  const auto one = bernstein_get("affine", {{"a", 1.0}, {"b", 0.0}});
  const auto sep = build_gneiting_classic(phi, one, 1.0, 2, 2);
  const Point z = {0.1, 0.2, 5.0, -1.0}, zp = {1.0, -0.3, 0.0, 2.0};
  // f = 1: separable Gaussian in x, constant in y.
  CHECK(sep.entry(0, 0, z, zp) == doctest::Approx(std::exp(-(0.81 + 0.25))).epsilon(1e-14));

  const auto f = bernstein_get("affine");
  const auto k = build_gneiting_classic(phi, f, 1.0, 2, 2);
  const Point same_x = {1.0, -0.3, 0.5, 0.5};
  // x = x': (1 + |y - y'|^2)^{-r} phi(0).
  CHECK(k.entry(0, 0, zp, same_x) == doctest::Approx(std::pow(1.0 + 2.5, -1.0)).epsilon(1e-14));
  for (std::uint64_t s = 0; s < 5; ++s) CHECK(gram_psd(k, random_points(k.domain(), 8, s)));

  CHECK_THROWS_AS(build_gneiting_classic(phi, f, 0.5, 2, 2), ParamError);
  BuildOptions l2;
  l2.power_l = 2;
  CHECK_THROWS_AS(build_gneiting_classic(phi, f, 1.0, 2, 2, l2), ParamError);
}

TEST_CASE("scale_mixture") {
  const auto e2 = PointSpace::euclidean(2);
  const auto phi = catalog_get("gen_cauchy", {{"nu", 1.5}});
  const auto g = make_G_sum_identity(2, {0.3, 0.8});
  const auto h = make_H_identity(2, 2);
  const auto plain = build_cm_quadratic(phi, g, h, e2);
  const auto unit = build_scale_mixture(phi, g, h, mixture_unit(2), e2);
  const auto pts = random_points(e2, 21, 5);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        CHECK(std::abs(unit.entry(m, n, pts[i], pts[i + 1]) - plain.entry(m, n, pts[i], pts[i + 1])) <= 1e-12);

  const auto two = build_scale_mixture(phi, g, h, mixture_gaussian_diag(2, {{0.5, 1.0}, {3.0, 0.25}}), e2);
  for (std::uint64_t s = 0; s < 5; ++s) CHECK(gram_psd(two, random_points(e2, 6, s)));
}

TEST_CASE("the Matern mixture reproduces matern_eval on the diagonal") {
  const auto e1 = PointSpace::euclidean(1);
  const auto g = make_G_constant(2, SymMatrix::identity(1));
  for (double r : {0.3, 1.0, 3.0}) {
    const auto k = build_scale_mixture(catalog_get("exp_neg"), g, make_H_identity(2, 1), mixture_matern({0.5, 2.0}, r),
                                       e1);
    for (double lag : {0.05, 0.5, 2.0}) {
      CHECK(rel_err(k.entry(0, 0, {0.0}, {lag}), std::tgamma(0.5) * matern_eval(0.5, r, lag * lag)) < 1e-6);
      CHECK(rel_err(k.entry(1, 1, {0.0}, {lag}), std::tgamma(2.0) * matern_eval(2.0, r, lag * lag)) < 1e-6);
    }
  }
}

TEST_CASE("product construction on sphere x time") {
  const auto time = PointSpace::euclidean(1), s2 = PointSpace::sphere(2);
  const auto phi = catalog_get("exp_neg");
  const auto k = build_product(phi, make_G_sphere(2, 1, 2), make_H_identity(2, 1), time, s2);
  CounterRng rng(6, 1);
  for (int t = 0; t < 20; ++t) {
    const Point x = time.random_point(rng), xp = time.random_point(rng);
    const Point y = s2.random_point(rng), yp = s2.random_point(rng);
    const Point z = k.domain().join(x, y), zp = k.domain().join(xp, yp);
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n) {
        const double c = (m + 1) + (n + 1) + geodesic_distance(y, yp);
        const double dx = x[0] - xp[0];
        CHECK(rel_err(k.entry(m, n, z, zp), std::pow(c, -0.5) * std::exp(-dx * dx / c)) < 1e-13);
      }
  }
  for (std::uint64_t s = 0; s < 5; ++s) CHECK(gram_psd(k, random_points(k.domain(), 5, s)));

  // Not a product kernel: the slice [K((x_i, y_j), z0)] has rank > 1.
  const auto p1 = build_product(phi, make_G_sphere(1, 1, 2), make_H_identity(1, 1), time, s2);
  const Point z0 = p1.domain().join(Point{0.0}, Point{0.0, 0.0, 1.0});
  Matrix slice(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double th = 0.7 * j;
      slice(i, j) = p1.entry(0, 0, p1.domain().join(Point{0.5 * i}, Point{std::sin(th), 0.0, std::cos(th)}), z0);
    }
  const auto sv = eig_sym(SymMatrix(slice.transpose() * slice));
  CHECK(sv.eigenvalues[2] > 1e-10 * sv.eigenvalues[3]);
}

TEST_CASE("product with G constant in y is separable") {
  const auto e1 = PointSpace::euclidean(1), e2 = PointSpace::euclidean(2);
  const SymMatrix a{{2.0, 0.3}, {0.3, 1.0}};
  const auto k = build_product(catalog_get("exp_neg"), make_G_constant(1, a), make_H_identity(1, 2), e2, e1);
  const auto inv = det_and_inverse(a);
  CounterRng rng(7, 1);
  for (int t = 0; t < 10; ++t) {
    const Point x = e2.random_point(rng), xp = e2.random_point(rng);
    const Point z = k.domain().join(x, e1.random_point(rng)), zp = k.domain().join(xp, e1.random_point(rng));
    const double d0 = x[0] - xp[0], d1 = x[1] - xp[1];
    const double q = d0 * d0 * inv.inverse(0, 0) + 2 * d0 * d1 * inv.inverse(0, 1) + d1 * d1 * inv.inverse(1, 1);
    CHECK(rel_err(k.entry(0, 0, z, zp), std::exp(-q) / std::sqrt(inv.determinant)) < 1e-13);
  }
}

TEST_CASE("product_mixture") {
  const auto ex = PointSpace::euclidean(2), ey = PointSpace::euclidean(1);
  const auto phi = catalog_get("exp_neg");
  const auto g = make_G_scalar_diag(cnd_sqdist(1.0), 2, 2);
  const auto h = make_H_identity(2, 2);
  const auto plain = build_product(phi, g, h, ex, ey);
  const auto mixed = build_product_mixture(phi, g, h, mixture_unit(2), ex, ey);
  const auto pts = random_points(plain.domain(), 21, 8);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        CHECK(std::abs(mixed.entry(m, n, pts[i], pts[i + 1]) - plain.entry(m, n, pts[i], pts[i + 1])) <= 1e-12);

  // Matern cross-covariance routed through the mixture matches its closed form.
  const std::vector<double> v = {0.5, 1.5};
  const auto via_mix = build_product_mixture(phi, g, h, mixture_matern(v, 1.3), ex, ey);
  const auto closed = build_matern_cross(g, h, v, Matrix(2, 2, 1.3), CrossDomain::product_of(ex, ey));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        CHECK(rel_err(via_mix.entry(m, n, pts[i], pts[i + 1]), closed.entry(m, n, pts[i], pts[i + 1])) < 1e-6);
  for (std::uint64_t s = 0; s < 5; ++s) CHECK(gram_psd(via_mix, random_points(plain.domain(), 6, s)));
}

TEST_CASE("matern_cross") {
  const auto e2 = PointSpace::euclidean(2);
  const auto k = build_matern_cross(make_G_constant(1, SymMatrix::identity(2)), make_H_identity(1, 2), {1.0},
                                    Matrix{{1.0}}, CrossDomain::single(e2));
  const auto pts = random_points(e2, 6, 9);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    CHECK(rel_err(k.entry(0, 0, pts[i], pts[i + 1]), matern_eval(1.0, 1.0, squared_distance(pts[i], pts[i + 1]))) <
          1e-12);

  // Constant r and v: the coefficient matrix is rank one and positive.
  CHECK_NOTHROW(build_matern_cross(make_G_sum_identity(2, {1, 2, 3}), make_H_identity(3, 2), {1.2, 1.2, 1.2},
                                   Matrix(3, 3, 0.7), CrossDomain::single(e2)));
  // r_12 far above r_11 and r_22 breaks positivity.
  CHECK_THROWS_AS(build_matern_cross(make_G_sum_identity(2, {1, 2}), make_H_identity(2, 2), {1.0, 1.0},
                                     Matrix{{1.0, 5.0}, {5.0, 1.0}}, CrossDomain::single(e2)),
                  ParamError);

  // Space-time: G = (1 + |y - y'|^2) I on the time axis.
  const auto ex = PointSpace::euclidean(2), ey = PointSpace::euclidean(1);
  const auto st = build_matern_cross(make_G_scalar_diag(cnd_sqdist(1.0), 2, 2), make_H_identity(2, 2), {0.5, 1.5},
                                     Matrix{{1.0, 1.1}, {1.1, 1.3}}, CrossDomain::product_of(ex, ey));
  for (std::uint64_t s = 0; s < 5; ++s) CHECK(gram_psd(st, random_points(st.domain(), 7, s)));
}

TEST_CASE("cauchy_cross") {
  const auto e2 = PointSpace::euclidean(2);
  const auto k = build_cauchy_cross(make_G_constant(1, SymMatrix::identity(2)), make_H_identity(1, 2), 1.0, 1.0,
                                    constant_smoothness({1.0}), {1.0}, CrossDomain::single(e2));
  const auto pts = random_points(e2, 6, 10);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double d2 = squared_distance(pts[i], pts[i + 1]);
    CHECK(rel_err(k.entry(0, 0, pts[i], pts[i + 1]), 1.0 / ((1.0 + d2) * (1.0 + d2))) < 1e-14);
  }

  const std::vector<double> v = {0.6, 1.4};
  const auto g = make_G_sum_identity(2, {0.5, 1.0});
  const auto zero = build_cauchy_cross(g, make_H_zero(2, 2), 1.0, 0.8, constant_smoothness(v), v, CrossDomain::single(e2));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        CHECK(rel_err(zero.entry(m, n, pts[i], pts[i + 1]),
                      std::tgamma(v[m] + v[n]) / std::sqrt(det_and_inverse(g(m, n, pts[i], pts[i + 1])).determinant)) <
              1e-12);

  const auto full = build_cauchy_cross(g, make_H_identity(2, 2), 2.0, 0.5, constant_smoothness(v), v,
                                       CrossDomain::single(e2));
  for (std::uint64_t s = 0; s < 5; ++s) CHECK(gram_psd(full, random_points(e2, 6, s)));
}

TEST_CASE("det_power") {
  const auto s2 = PointSpace::sphere(2);
  const auto phi = catalog_get("exp_neg");
  const auto g = make_G_sphere(1, 2, 2);
  const auto h = make_H_zero(1, 2);
  const auto base = build_cm_quadratic(phi, g, h, s2);
  const auto l1 = build_det_power(phi, g, h, s2, 1);
  const auto pts = random_points(s2, 6, 11);
  for (const auto& y : pts)
    for (const auto& yp : pts) CHECK(l1.entry(0, 0, y, yp) == base.entry(0, 0, y, yp));

  CHECK(gram_psd(build_det_power(phi, make_G_sphere(2, 2, 2), make_H_zero(2, 2), s2, 3), pts));

  const auto gs = make_G_sum_identity(1, {0.5, 1.5});
  const auto det2 = build_det_power(catalog_get("constant"), gs, make_H_zero(2, 1), PointSpace::euclidean(1), 2);
  const auto e1 = random_points(PointSpace::euclidean(1), 6, 12);
  for (const auto& y : e1)
    for (const auto& yp : e1)
      CHECK(rel_err(det2.entry(0, 1, y, yp), 1.0 / det_and_inverse(gs(0, 1, y, yp)).determinant) < 1e-14);
  CHECK(gram_psd(det2, e1));
}

TEST_CASE("kernels are symmetric: K(z, z') = K(z', z)^T") {
  const auto e2 = PointSpace::euclidean(2);
  const auto h = make_H_difference_linear({Matrix{{1, 0.2}, {0, 1}}, Matrix{{0.5, 0}, {0.1, 2}}}, {{0, 1}, {1, 0}});
  const auto g = make_G_sum_identity(2, {0.4, 0.9});
  const auto pts = random_points(e2, 6, 13);
  CHECK(symmetry_defect(build_cm_quadratic(catalog_get("exp_neg"), g, h, e2), pts) < 1e-15);
  CHECK(symmetry_defect(build_scale_mixture(catalog_get("exp_neg"), g, h, mixture_matern({0.5, 1.0}, 1.0), e2), pts) <
        1e-14);
  CHECK(symmetry_defect(build_cauchy_cross(g, h, 1.0, 0.5, constant_smoothness({1, 2}), {1, 2}, CrossDomain::single(e2)),
                        pts) < 1e-14);
}

TEST_CASE("builders refuse uncertified inputs unless unsafe") {
  const auto e1 = PointSpace::euclidean(1);
  const MatrixFieldFamily custom(1, 1, [](int, int, const Point& y, const Point&) { return SymMatrix{{y[0]}}; },
                                 {{"recipe", "custom"}});
  const auto phi = catalog_get("exp_neg");
  CHECK_THROWS_AS(build_cm_quadratic(phi, custom, make_H_identity(1, 1), e1), ParamError);

  BuildOptions unsafe;
  unsafe.unsafe = true;
  const auto k = build_cm_quadratic(phi, custom, make_H_identity(1, 1), e1, unsafe);
  CHECK(k.provenance().at("unsafe_override") == true);
  CHECK(k.entry(0, 0, {2.0}, {1.0}) > 0.0);
  // G = [y] is not PD at y = -1: evaluation fails with the offending arguments.
  CHECK_THROWS_AS(k.entry(0, 0, {-1.0}, {1.0}), KernelEvalError);

  const auto blocks = make_G_block_diagonal(2, 1, [](int, const Point&, const Point&) { return SymMatrix{{1.0}}; });
  CHECK_THROWS_AS(build_cm_quadratic(phi, blocks, make_H_identity(2, 1), e1, unsafe), ParamError);
  CHECK_THROWS_AS(build_cm_quadratic(phi, make_G_sum_identity(2, {1.0}), make_H_identity(1, 1), e1), ShapeError);
}

TEST_CASE("provenance records the construction and its inputs") {
  const auto k = build_cm_quadratic(catalog_get("exp_neg"), make_G_sum_identity(1, {1.0}), make_H_identity(1, 1),
                                    PointSpace::euclidean(1));
  const auto& p = k.provenance();
  CHECK(p.at("construction") == "cm_quadratic");
  CHECK(p.at("power_l") == 1);
  CHECK(p.at("inputs").contains("phi"));
  CHECK(p.at("certificates").at("G").at("pass") == true);
}

TEST_CASE("random configurations give PSD Grams for every builder") {
  CounterRng rng(31337, 1);
  const char* phis[] = {"exp_neg", "gen_cauchy", "exp_neg_power", "inverse_power"};
  for (int t = 0; t < 40; ++t) {
    const int p = 1 + t % 3, q = 1 + (t / 3) % 3, n = 2 + t % 7;
    const std::string name = phis[t % 4];
    const auto phi = catalog_get(name, name == "gen_cauchy"      ? Params{{"nu", 1.5}, {"gamma", 0.7}}
                                       : name == "exp_neg_power" ? Params{{"gamma", 0.6}}
                                       : name == "inverse_power" ? Params{{"nu", 2.0}}
                                                                 : Params{});
    std::vector<double> offsets(static_cast<std::size_t>(p));
    for (auto& o : offsets) o = rng.uniform(0.2, 2.0);
    const auto ex = PointSpace::euclidean(q), ey = PointSpace::euclidean(2);
    const auto g = make_G_sum_identity(q, offsets);
    const auto h = make_H_identity(p, q);
    const auto seed = static_cast<std::uint64_t>(t);
    CAPTURE(t);
    CHECK(gram_psd(build_cm_quadratic(phi, make_G_sum_identity(q, offsets), h, ex), random_points(ex, n, seed)));
    CHECK(gram_psd(build_scale_mixture(phi, make_G_sum_identity(q, offsets), h,
                                       mixture_gaussian_diag(p, {{0.5, 1.0}, {2.0, 0.5}}), ex),
                   random_points(ex, n, seed)));
    const auto prod = build_product(phi, g, h, ex, ey);
    CHECK(gram_psd(prod, random_points(prod.domain(), n, seed)));
    const auto pm = build_product_mixture(phi, g, h, mixture_gaussian_diag(p, {{1.0, 1.0}}), ex, ey);
    CHECK(gram_psd(pm, random_points(pm.domain(), n, seed)));
  }
}
