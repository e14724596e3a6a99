#include "ak/spec_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ak/errors.hpp"

namespace ak {

using nlohmann::json;

namespace {

// ------------------------------------------------------------ json helpers

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw SchemaError(where + ": " + msg);
}

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::set<std::string>& required, const std::string& where) {
  expect_object(j, where);
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(where, "unknown key '" + k + "'");
  for (const auto& k : required)
    if (!j.contains(k)) fail(where, "missing key '" + k + "'");
}

double number(const json& j, const std::string& key, std::optional<double> def,
              const std::string& where) {
  if (!j.contains(key)) {
    if (def) return *def;
    fail(where, "missing parameter '" + key + "'");
  }
  if (!j.at(key).is_number()) fail(where, "parameter '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> vector_param(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) fail(where, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Matrix matrix_param(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(where, "expected a non-empty array of rows");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = vector_param(j[i], where);
    if (row.size() != cols) fail(where, "rows have different lengths");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = row[k];
  }
  return m;
}

std::vector<Atom> atoms_param(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "atoms must be a non-empty array of [s, weight]");
  std::vector<Atom> out;
  for (const auto& a : j) {
    const auto v = vector_param(a, where);
    if (v.size() != 2) fail(where, "each atom is [s, weight]");
    out.push_back({v[0], v[1]});
  }
  return out;
}

Params params_map(const json& j, const std::string& where) {
  expect_object(j, where);
  Params out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) fail(where, "parameter '" + k + "' must be a number");
    out[k] = v.get<double>();
  }
  return out;
}

struct RecipeRef {
  std::string recipe;
  json params;
};

RecipeRef recipe_ref(const json& j, const std::string& where) {
  expect_keys(j, {"recipe", "params"}, {"recipe"}, where);
  if (!j.at("recipe").is_string()) fail(where, "'recipe' must be a string");
  json params = j.value("params", json::object());
  expect_object(params, where + ".params");
  return {j.at("recipe").get<std::string>(), params};
}

/// Runs a resolver and rewrites library errors as schema errors for `where`.
template <class F>
auto resolving(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

// -------------------------------------------------------------- recipes

struct ConstructionInfo {
  const char* name;
  bool phi;
  bool mixture;
  bool product;  // domain must be a product X x Y
};

constexpr ConstructionInfo kConstructions[] = {
    {"cm_quadratic", true, false, false},    {"gneiting_single", true, false, false},
    {"gneiting_classic", true, false, true}, {"scale_mixture", true, true, false},
    {"product", true, false, true},          {"product_mixture", true, true, true},
    {"matern_cross", false, true, false},    {"cauchy_cross", false, true, false},
};

const ConstructionInfo& construction_info(const std::string& name) {
  for (const auto& c : kConstructions)
    if (name == c.name) return c;
  throw SchemaError("unknown construction");
}

std::string canonical_construction(const std::string& name) {
  if (name == "thm21") return "cm_quadratic";
  if (name == "thm31") return "scale_mixture";
  if (name == "thm41") return "product";
  if (name == "thm42") return "product_mixture";
  for (const auto& c : kConstructions)
    if (name == c.name) return name;
  fail("theorem", "unknown construction '" + name + "'");
}

CMFunction resolve_phi(const json& j) {
  expect_keys(j, {"name", "params"}, {"name"}, "phi");
  if (!j.at("name").is_string()) fail("phi", "'name' must be a string");
  const Params params = params_map(j.value("params", json::object()), "phi.params");
  return resolving("phi", [&] { return catalog_get(j.at("name").get<std::string>(), params); });
}

BernsteinFunction resolve_bernstein(const json& j, const std::string& where) {
  expect_keys(j, {"name", "params"}, {"name"}, where);
  if (!j.at("name").is_string()) fail(where, "'name' must be a string");
  const Params params = params_map(j.value("params", json::object()), where + ".params");
  return resolving(where, [&] { return bernstein_get(j.at("name").get<std::string>(), params); });
}

void only_params(const json& params, const std::set<std::string>& allowed, const std::string& where) {
  expect_keys(params, allowed, {}, where);
}

ScalarCNDKernel resolve_scalar(const json& j, const std::string& where) {
  const auto ref = recipe_ref(j, where);
  const auto& pr = ref.params;
  const std::string pw = where + ".params";
  return resolving(where, [&]() -> ScalarCNDKernel {
    if (ref.recipe == "sqdist") {
      only_params(pr, {"c0", "c1"}, pw);
      return cnd_sqdist(number(pr, "c0", 1.0, pw), number(pr, "c1", 1.0, pw));
    }
    if (ref.recipe == "geodesic") {
      only_params(pr, {"c0", "c1"}, pw);
      return cnd_geodesic(number(pr, "c0", 1.0, pw), number(pr, "c1", 1.0, pw));
    }
    if (ref.recipe == "constant") {
      only_params(pr, {"c"}, pw);
      return cnd_constant(number(pr, "c", std::nullopt, pw));
    }
    if (ref.recipe == "bernstein") {
      only_params(pr, {"f"}, pw);
      if (!pr.contains("f")) fail(pw, "missing parameter 'f'");
      return cnd_bernstein(resolve_bernstein(pr.at("f"), pw + ".f"));
    }
    fail(where, "unknown scalar kernel recipe '" + ref.recipe + "'");
  });
}

MatrixFieldFamily resolve_G(const json& j, int p, int q, const PointSpace& space) {
  const std::string where = "family_G";
  const auto ref = recipe_ref(j, where);
  const auto& pr = ref.params;
  const std::string pw = where + ".params";
  return resolving(where, [&]() -> MatrixFieldFamily {
    if (ref.recipe == "sum_identity") {
      only_params(pr, {"offsets", "scale"}, pw);
      if (!pr.contains("offsets")) fail(pw, "missing parameter 'offsets'");
      const auto offsets = vector_param(pr.at("offsets"), pw + ".offsets");
      if (static_cast<int>(offsets.size()) != p) fail(pw, "offsets must have p entries");
      return make_G_sum_identity(q, offsets, number(pr, "scale", 1.0, pw));
    }
    if (ref.recipe == "scalar_diag") {
      only_params(pr, {"g"}, pw);
      if (!pr.contains("g")) fail(pw, "missing parameter 'g'");
      return make_G_scalar_diag(resolve_scalar(pr.at("g"), pw + ".g"), p, q);
    }
    if (ref.recipe == "sphere") {
      only_params(pr, {"separation"}, pw);
      if (space.kind() != PointSpace::Kind::Sphere)
        fail(where, "recipe 'sphere' needs a sphere space, got " + space.descriptor());
      return make_G_sphere(p, q, space.dim(), number(pr, "separation", 0.0, pw));
    }
    if (ref.recipe == "constant") {
      only_params(pr, {"matrix"}, pw);
      if (!pr.contains("matrix")) fail(pw, "missing parameter 'matrix'");
      const Matrix a = matrix_param(pr.at("matrix"), pw + ".matrix");
      if (a.rows() != static_cast<std::size_t>(q) || a.cols() != static_cast<std::size_t>(q))
        fail(pw, "matrix must be q x q");
      return make_G_constant(p, SymMatrix(a));
    }
    if (ref.recipe == "adversarial_gaussian") {
      only_params(pr, {"scale"}, pw);
      return make_G_adversarial(p, q, number(pr, "scale", 1.0, pw));
    }
    if (ref.recipe == "block_diagonal") {
      only_params(pr, {"offsets"}, pw);
      if (!pr.contains("offsets")) fail(pw, "missing parameter 'offsets'");
      const auto offsets = vector_param(pr.at("offsets"), pw + ".offsets");
      if (static_cast<int>(offsets.size()) != p) fail(pw, "offsets must have p entries");
      return make_G_block_diagonal(p, q, [offsets, q](int m, const Point& y, const Point& yp) {
        Matrix a = Matrix::identity(static_cast<std::size_t>(q));
        return SymMatrix((offsets[m] + squared_distance(y, yp)) * a);
      });
    }
    fail(where, "unknown recipe '" + ref.recipe + "'");
  });
}

VectorFieldFamily resolve_H(const json& j, int p, int q, const PointSpace& space) {
  const std::string where = "family_H";
  const auto ref = recipe_ref(j, where);
  const auto& pr = ref.params;
  const std::string pw = where + ".params";
  return resolving(where, [&]() -> VectorFieldFamily {
    if (ref.recipe == "zero") {
      only_params(pr, {}, pw);
      return make_H_zero(p, q);
    }
    if (ref.recipe == "difference_identity") {
      only_params(pr, {}, pw);
      if (space.ambient_dim() != static_cast<std::size_t>(q))
        fail(where, "difference_identity needs q equal to the point dimension " +
                        std::to_string(space.ambient_dim()));
      return make_H_identity(p, q);
    }
    if (ref.recipe == "difference_first_coord") {
      only_params(pr, {}, pw);
      return make_H_first_coord(p, q);
    }
    if (ref.recipe == "difference_linear") {
      only_params(pr, {"maps", "shifts"}, pw);
      if (!pr.contains("maps") || !pr.at("maps").is_array()) fail(pw, "'maps' must be an array");
      std::vector<Matrix> maps;
      for (const auto& m : pr.at("maps")) maps.push_back(matrix_param(m, pw + ".maps"));
      if (static_cast<int>(maps.size()) != p) fail(pw, "maps must have p entries");
      for (const auto& m : maps)
        if (m.rows() != static_cast<std::size_t>(q) || m.cols() != space.ambient_dim())
          fail(pw, "each map must be q x " + std::to_string(space.ambient_dim()));
      std::vector<std::vector<double>> shifts;
      if (pr.contains("shifts")) {
        if (!pr.at("shifts").is_array()) fail(pw, "'shifts' must be an array");
        for (const auto& s : pr.at("shifts")) shifts.push_back(vector_param(s, pw + ".shifts"));
      }
      return make_H_difference_linear(std::move(maps), std::move(shifts));
    }
    fail(where, "unknown recipe '" + ref.recipe + "'");
  });
}

MixtureSpec resolve_mixture(const json& j, int p) {
  const std::string where = "mixture";
  const auto ref = recipe_ref(j, where);
  const auto& pr = ref.params;
  const std::string pw = where + ".params";
  return resolving(where, [&]() -> MixtureSpec {
    if (ref.recipe == "unit") {
      only_params(pr, {}, pw);
      return mixture_unit(p);
    }
    if (ref.recipe == "constant") {
      only_params(pr, {"atoms", "matrix"}, pw);
      if (!pr.contains("atoms") || !pr.contains("matrix")) fail(pw, "needs 'atoms' and 'matrix'");
      const Matrix c = matrix_param(pr.at("matrix"), pw + ".matrix");
      if (c.rows() != static_cast<std::size_t>(p) || c.cols() != static_cast<std::size_t>(p))
        fail(pw, "matrix must be p x p");
      return mixture_constant(atoms_param(pr.at("atoms"), pw + ".atoms"), SymMatrix(c));
    }
    if (ref.recipe == "gaussian_diag") {
      only_params(pr, {"atoms", "scale"}, pw);
      if (!pr.contains("atoms")) fail(pw, "missing parameter 'atoms'");
      return mixture_gaussian_diag(p, atoms_param(pr.at("atoms"), pw + ".atoms"),
                                   number(pr, "scale", 1.0, pw));
    }
    if (ref.recipe == "matern") {
      only_params(pr, {"v", "r", "grid"}, pw);
      if (!pr.contains("v")) fail(pw, "missing parameter 'v'");
      const auto v = vector_param(pr.at("v"), pw + ".v");
      if (static_cast<int>(v.size()) != p) fail(pw, "v must have p entries");
      LogGrid grid;
      if (pr.contains("grid")) {
        const auto& g = pr.at("grid");
        expect_keys(g, {"below", "above", "step"}, {}, pw + ".grid");
        grid.below = number(g, "below", grid.below, pw + ".grid");
        grid.above = number(g, "above", grid.above, pw + ".grid");
        grid.step = number(g, "step", grid.step, pw + ".grid");
      }
      return mixture_matern(v, number(pr, "r", std::nullopt, pw), grid);
    }
    fail(where, "unknown recipe '" + ref.recipe + "'");
  });
}

/// Everything a spec document resolves to.
struct Resolved {
  const ConstructionInfo* info{nullptr};
  std::optional<CMFunction> phi;
  std::optional<MatrixFieldFamily> G;
  std::optional<ScalarCNDKernel> g;
  std::optional<VectorFieldFamily> H;
  bool h_defaulted{false};
  std::optional<MixtureSpec> mix;
  PointSpace x_space;  // where H is evaluated
  PointSpace y_space;  // where G is evaluated
  std::optional<BernsteinFunction> f;
  double r{0.0};
  std::vector<double> v;
  Matrix rmat;
  double c{1.0};
  double gamma{1.0};
};

Resolved resolve(const KernelSpec& spec) {
  const json& doc = spec.document;
  Resolved out;
  out.info = &construction_info(spec.construction);
  const auto& info = *out.info;
  const int p = spec.p, q = spec.q;
  const bool product = spec.space.kind() == PointSpace::Kind::Product;
  if (info.product && !product)
    fail("dims.space", spec.construction + " needs a product space, got " + spec.space.descriptor());
  // Single-set constructions read the whole point for both G and H; product
  // and cross constructions on X x Y give x to H and y to G.
  const bool cross = spec.construction == "matern_cross" || spec.construction == "cauchy_cross";
  const bool split = product && (info.product || cross);
  out.x_space = split ? spec.space.left() : spec.space;
  out.y_space = split ? spec.space.right() : spec.space;

  if (info.phi) {
    if (!doc.contains("phi")) fail("phi", "required by " + spec.construction);
    out.phi = resolve_phi(doc.at("phi"));
  } else if (doc.contains("phi")) {
    fail("phi", spec.construction + " fixes its own phi; remove 'phi'");
  }
  if (info.mixture && !doc.contains("mixture")) fail("mixture", "required by " + spec.construction);
  if (!info.mixture && doc.contains("mixture"))
    fail("mixture", spec.construction + " does not take a mixture");
  if (!doc.contains("family_G")) fail("family_G", "required");

  if (spec.construction == "gneiting_classic") {
    const auto ref = recipe_ref(doc.at("family_G"), "family_G");
    if (ref.recipe != "gneiting_classic")
      fail("family_G", "gneiting_classic needs recipe 'gneiting_classic'");
    expect_keys(ref.params, {"f", "r"}, {"f", "r"}, "family_G.params");
    out.f = resolve_bernstein(ref.params.at("f"), "family_G.params.f");
    out.r = number(ref.params, "r", std::nullopt, "family_G.params");
    if (doc.contains("family_H")) fail("family_H", "gneiting_classic uses x - x' directly");
    if (p != 1) fail("dims.p", "gneiting_classic is scalar (p = 1)");
    if (out.x_space.kind() != PointSpace::Kind::Euclidean ||
        out.y_space.kind() != PointSpace::Kind::Euclidean)
      fail("dims.space", "gneiting_classic needs product:euclidean:qs/euclidean:d");
    if (q != out.x_space.dim()) fail("dims.q", "gneiting_classic needs q equal to qs");
    return out;
  }

  if (spec.construction == "gneiting_single") {
    const auto ref = recipe_ref(doc.at("family_G"), "family_G");
    if (ref.recipe != "scalar_diag") fail("family_G", "gneiting_single needs recipe 'scalar_diag'");
    expect_keys(ref.params, {"g"}, {"g"}, "family_G.params");
    out.g = resolve_scalar(ref.params.at("g"), "family_G.params.g");
    if (!out.g->positive()) fail("family_G", "gneiting_single needs a positive valued g");
  }
  out.G = resolve_G(doc.at("family_G"), p, q, out.y_space);
  if (doc.contains("family_H")) {
    out.H = resolve_H(doc.at("family_H"), p, q, out.x_space);
  } else {
    out.H = make_H_zero(p, q);
    out.h_defaulted = true;
  }

  if (spec.construction == "matern_cross") {
    const auto ref = recipe_ref(doc.at("mixture"), "mixture");
    if (ref.recipe != "matern_cross") fail("mixture", "matern_cross needs recipe 'matern_cross'");
    expect_keys(ref.params, {"v", "r"}, {"v", "r"}, "mixture.params");
    out.v = vector_param(ref.params.at("v"), "mixture.params.v");
    if (static_cast<int>(out.v.size()) != p) fail("mixture.params", "v must have p entries");
    const auto& r = ref.params.at("r");
    if (r.is_number()) {
      out.rmat = Matrix(static_cast<std::size_t>(p), static_cast<std::size_t>(p), r.get<double>());
    } else {
      out.rmat = matrix_param(r, "mixture.params.r");
      if (out.rmat.rows() != static_cast<std::size_t>(p) || out.rmat.cols() != static_cast<std::size_t>(p))
        fail("mixture.params", "r must be a number or a p x p matrix");
    }
    return out;
  }
  if (spec.construction == "cauchy_cross") {
    const auto ref = recipe_ref(doc.at("mixture"), "mixture");
    if (ref.recipe != "cauchy_cross") fail("mixture", "cauchy_cross needs recipe 'cauchy_cross'");
    expect_keys(ref.params, {"v", "c", "gamma"}, {"v"}, "mixture.params");
    out.v = vector_param(ref.params.at("v"), "mixture.params.v");
    if (static_cast<int>(out.v.size()) != p) fail("mixture.params", "v must have p entries");
    out.c = number(ref.params, "c", 1.0, "mixture.params");
    out.gamma = number(ref.params, "gamma", 1.0, "mixture.params");
    if (!(out.c > 0.0)) fail("mixture.params", "c must be positive");
    if (!(out.gamma > 0.0 && out.gamma <= 1.0)) fail("mixture.params", "gamma must lie in (0, 1]");
    for (double x : out.v)
      if (!(x > 0.0)) fail("mixture.params", "v entries must be positive");
    return out;
  }
  if (info.mixture) out.mix = resolve_mixture(doc.at("mixture"), p);
  return out;
}

CrossDomain cross_domain(const KernelSpec& spec) {
  if (spec.space.kind() == PointSpace::Kind::Product)
    return CrossDomain::product_of(spec.space.left(), spec.space.right());
  return CrossDomain::single(spec.space);
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::vector<std::string> construction_names() {
  std::vector<std::string> out;
  for (const auto& c : kConstructions) out.emplace_back(c.name);
  return out;
}

KernelSpec parse_kernel_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character.
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw SchemaError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": malformed JSON");
  }
  expect_keys(doc, {"theorem", "phi", "family_G", "family_H", "mixture", "power_l", "dims"},
              {"theorem", "dims", "family_G"}, "spec");
  if (!doc.at("theorem").is_string()) fail("theorem", "must be a string");

  KernelSpec spec;
  spec.document = doc;
  spec.construction = canonical_construction(doc.at("theorem").get<std::string>());

  const auto& dims = doc.at("dims");
  expect_keys(dims, {"p", "q", "space"}, {"p", "q", "space"}, "dims");
  if (!dims.at("p").is_number_integer() || dims.at("p").get<int>() < 1)
    fail("dims.p", "must be an integer >= 1");
  if (!dims.at("q").is_number_integer() || dims.at("q").get<int>() < 1)
    fail("dims.q", "must be an integer >= 1");
  spec.p = dims.at("p").get<int>();
  spec.q = dims.at("q").get<int>();
  spec.space = resolving("dims.space", [&] { return PointSpace::from_json(dims.at("space")); });

  if (doc.contains("power_l")) {
    if (!doc.at("power_l").is_number_integer() || doc.at("power_l").get<int>() < 1)
      fail("power_l", "must be an integer >= 1");
    spec.power_l = doc.at("power_l").get<int>();
  }
  if (spec.power_l != 1 && spec.construction == "gneiting_classic")
    fail("power_l", "gneiting_classic takes its exponent from r");
  (void)resolve(spec);
  return spec;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

KernelSpec load_kernel_spec(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_kernel_spec(text);
  } catch (const SchemaError& e) {
    throw SchemaError(path.filename().string() + ": " + e.what());
  }
}

std::string spec_hash(const KernelSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : spec.document.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MatrixKernel build_from_spec(const KernelSpec& spec, const BuildOptions& base) {
  BuildOptions opts = base;
  opts.power_l = spec.power_l;
  const Resolved r = resolve(spec);
  const auto& c = spec.construction;
  MatrixKernel k = [&]() -> MatrixKernel {
    if (c == "cm_quadratic") return build_cm_quadratic(*r.phi, *r.G, *r.H, spec.space, opts);
    if (c == "gneiting_single") return build_gneiting_single(*r.phi, *r.g, *r.H, spec.space, opts);
    if (c == "gneiting_classic")
      return build_gneiting_classic(*r.phi, *r.f, r.r, r.x_space.dim(), r.y_space.dim(), opts);
    if (c == "scale_mixture")
      return build_scale_mixture(*r.phi, *r.G, *r.H, *r.mix, spec.space, opts);
    if (c == "product") return build_product(*r.phi, *r.G, *r.H, r.x_space, r.y_space, opts);
    if (c == "product_mixture")
      return build_product_mixture(*r.phi, *r.G, *r.H, *r.mix, r.x_space, r.y_space, opts);
    if (c == "matern_cross")
      return build_matern_cross(*r.G, *r.H, r.v, r.rmat, cross_domain(spec), opts);
    return build_cauchy_cross(*r.G, *r.H, r.c, r.gamma, constant_smoothness(r.v), r.v,
                              cross_domain(spec), opts);
  }();
  json prov = k.provenance();
  prov["theorem"] = c;
  prov["h_defaulted"] = r.h_defaulted;
  return MatrixKernel(k.p(), k.domain(),
                      [k](int m, int n, const Point& z, const Point& zp) { return k.entry(m, n, z, zp); },
                      std::move(prov));
}

SpecCheckResult check_spec(const KernelSpec& spec, int n_points, int n_freq, std::uint64_t seed) {
  const Resolved r = resolve(spec);
  SpecCheckResult out;
  out.reports = json::array();
  auto add = [&](const ValidityReport& rep, bool informational = false) {
    json j = rep.to_json();
    if (informational) j["informational"] = true;
    else if (!rep.pass) out.pass = false;
    out.reports.push_back(std::move(j));
  };
  CounterRng root(seed, 0x636b);
  auto sub = [&](std::uint64_t k) { return root.split(k)(); };

  if (spec.construction == "gneiting_classic") {
    static constexpr double kGrid[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
    const auto cm = check_bernstein(*r.f, kGrid);
    ValidityReport rep{"bernstein", "f positive with completely monotone derivative", cm.pass,
                       cm.worst_violation, seed, nullptr};
    if (!cm.pass) rep.witness = {{"order", cm.witness_order}, {"t", cm.witness_t}};
    add(rep);
    return out;
  }
  if (r.g) add(check_scalar_cnd(*r.g, r.y_space, n_points, std::max(1, n_freq / 4), sub(1)));
  add(check_G_validity(*r.G, r.y_space, n_points, n_freq, sub(2)));
  add(check_strictness_condition(*r.G, r.y_space, n_points, n_freq, sub(3)), true);
  if (r.h_defaulted) {
    ValidityReport rep{"H_exp_pd", "[exp(i H_mn^T u)] positive definite for every u (PD_p)", true,
                       0.0, seed, {{"note", "no family_H given; H = 0 (determinant-only kernel)"}}};
    rep.skipped = true;
    add(rep);
  } else {
    add(check_H_validity(*r.H, r.x_space, n_points, n_freq, sub(4)));
  }
  if (r.mix) add(check_mixture(*r.mix, spec.space, n_points, sub(5)));
  if (spec.construction == "matern_cross") {
    const std::size_t p = r.v.size();
    Matrix coef(p, p);
    for (std::size_t m = 0; m < p; ++m)
      for (std::size_t n = 0; n < p; ++n) coef(m, n) = std::pow(0.5 * r.rmat(m, n), r.v[m] + r.v[n]);
    bool symmetric = true;
    for (std::size_t m = 0; m < p; ++m)
      for (std::size_t n = 0; n < p; ++n) symmetric = symmetric && r.rmat(m, n) == r.rmat(n, m);
    ValidityReport rep{"matern_coefficients", "[(r_mn/2)^(v_m+v_n)] positive semi-definite", false,
                       0.0, seed, nullptr};
    if (symmetric) {
      const auto s = eig_sym(SymMatrix(coef));
      rep.pass = s.classification != Definiteness::Indefinite;
      rep.margin = s.min_eig;
    } else {
      rep.witness = {{"reason", "r is not symmetric"}};
    }
    add(rep);
  }
  return out;
}

json recipe_catalog() {
  return {
      {"family_G",
       {{{"recipe", "sum_identity"}, {"params", {"offsets", "scale"}}, {"formula", "(o_m + o_n + scale(|y|^2 + |y'|^2)) I_q"}},
        {{"recipe", "scalar_diag"}, {"params", {"g"}}, {"formula", "g(y, y') I_q"}},
        {{"recipe", "sphere"}, {"params", {"separation"}}, {"formula", "(m + n + separation[m != n] + geodesic(y, y')) I_q"}},
        {{"recipe", "constant"}, {"params", {"matrix"}}, {"formula", "A"}},
        {{"recipe", "adversarial_gaussian"}, {"params", {"scale"}}, {"formula", "exp(-|y - y'|^2 / scale) I_q (not CND)"}},
        {{"recipe", "block_diagonal"}, {"params", {"offsets"}}, {"formula", "[m = n](o_m + |y - y'|^2) I_q (checker only)"}},
        {{"recipe", "gneiting_classic"}, {"params", {"f", "r"}}, {"formula", "f(|y - y'|^2) with exponent r"}}}},
      {"scalar_g",
       {{{"recipe", "sqdist"}, {"params", {"c0", "c1"}}, {"formula", "c0 + c1 |y - y'|^2"}},
        {{"recipe", "geodesic"}, {"params", {"c0", "c1"}}, {"formula", "c0 + c1 geodesic(y, y')"}},
        {{"recipe", "constant"}, {"params", {"c"}}, {"formula", "c"}},
        {{"recipe", "bernstein"}, {"params", {"f"}}, {"formula", "f(|y - y'|^2)"}}}},
      {"bernstein_f",
       {{{"name", "affine"}, {"params", {"a", "b"}}, {"formula", "a + b t"}},
        {{"name", "power"}, {"params", {"a", "alpha", "beta"}}, {"formula", "(1 + a t^alpha)^beta"}},
        {{"name", "log"}, {"params", {"a"}}, {"formula", "1 + log(1 + a t)"}}}},
      {"family_H",
       {{{"recipe", "zero"}, {"params", json::array()}, {"formula", "0"}},
        {{"recipe", "difference_identity"}, {"params", json::array()}, {"formula", "x - x'"}},
        {{"recipe", "difference_first_coord"}, {"params", json::array()}, {"formula", "(x_0 - x'_0, 0, ..., 0)"}},
        {{"recipe", "difference_linear"}, {"params", {"maps", "shifts"}}, {"formula", "A_m x + b_m - A_n x' - b_n"}}}},
      {"mixture",
       {{{"recipe", "unit"}, {"params", json::array()}, {"formula", "rho = delta_1, P = 1"}},
        {{"recipe", "constant"}, {"params", {"atoms", "matrix"}}, {"formula", "P^s = C (PSD)"}},
        {{"recipe", "gaussian_diag"}, {"params", {"atoms", "scale"}}, {"formula", "P^s_mn = [m = n] exp(-s |z - z'|^2 / scale)"}},
        {{"recipe", "matern"}, {"params", {"v", "r", "grid"}}, {"formula", "exp(-r^2/4s) ds/s, P^s_mn = (r^2/4s)^{(v_m+v_n)/2}"}},
        {{"recipe", "matern_cross"}, {"params", {"v", "r"}}, {"formula", "closed-form Matern cross-covariance"}},
        {{"recipe", "cauchy_cross"}, {"params", {"v", "c", "gamma"}}, {"formula", "closed-form generalized Cauchy cross-covariance"}}}},
  };
}

// ------------------------------------------------------------------ CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Validates a coordinate block against its space; sphere blocks within 1e-8
/// of unit norm are rescaled onto the sphere.
void conform(const PointSpace& space, std::span<double> p, const std::string& where) {
  switch (space.kind()) {
    case PointSpace::Kind::Euclidean: return;
    case PointSpace::Kind::Sphere: {
      double n = 0.0;
      for (double x : p) n += x * x;
      n = std::sqrt(n);
      if (std::abs(n - 1.0) > 1e-8)
        throw SchemaError(where + ": sphere point has norm " + std::to_string(n) + ", expected 1");
      for (double& x : p) x /= n;
      return;
    }
    case PointSpace::Kind::Product: {
      const std::size_t k = space.left().ambient_dim();
      conform(space.left(), p.subspan(0, k), where);
      conform(space.right(), p.subspan(k), where);
      return;
    }
    case PointSpace::Kind::Opaque: {
      if (p[0] != std::floor(p[0]) || p[0] < 0 || p[0] >= space.dim())
        throw SchemaError(where + ": opaque index out of range");
      return;
    }
  }
}

}  // namespace

PointSet parse_point_csv(std::string_view text) {
  PointSet out;
  bool have_header = false;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const std::string_view raw =
        text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_cells(line);
    const std::string where = "line " + std::to_string(line_no);
    if (!have_header) {
      try {
        out.space = PointSpace::parse(cells[0]);
      } catch (const Error& e) {
        throw SchemaError(where + ", column 1: " + e.what());
      }
      if (cells.size() - 1 != out.space.ambient_dim())
        throw SchemaError(where + ": header names " + std::to_string(cells.size() - 1) +
                          " coordinates, space " + out.space.descriptor() + " has " +
                          std::to_string(out.space.ambient_dim()));
      have_header = true;
      continue;
    }
    const std::string row_where = where + " (row " + std::to_string(out.points.size()) + ")";
    if (cells.size() != out.space.ambient_dim() + 1)
      throw SchemaError(row_where + ": expected " + std::to_string(out.space.ambient_dim() + 1) +
                        " cells, got " + std::to_string(cells.size()));
    Point p;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      const auto cell = cells[c];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw SchemaError(row_where + ", column " + std::to_string(c + 1) + ": bad number '" +
                          std::string(cell) + "'");
      p.push_back(v);
    }
    conform(out.space, p, row_where);
    out.labels.emplace_back(cells[0]);
    out.points.push_back(std::move(p));
  }
  if (!have_header) throw SchemaError("line 1: missing header row");
  if (out.points.empty()) throw SchemaError("point file has no rows");
  return out;
}

PointSet load_point_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_point_csv(text);
  } catch (const SchemaError& e) {
    throw SchemaError(path.filename().string() + ": " + e.what());
  }
}

}  // namespace ak
