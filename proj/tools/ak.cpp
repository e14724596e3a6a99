// ak: batch front-end for building and checking matrix-valued kernels.
//
// Exit codes: 0 success, 1 INDEFINITE Gram or failed check, 2 schema/input
// error, 3 kernel evaluation error.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ak/builders.hpp"
#include "ak/errors.hpp"
#include "ak/gram_io.hpp"
#include "ak/oracle_suites.hpp"
#include "ak/scalar_cm.hpp"
#include "ak/spec_io.hpp"
#include "ak/verify.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInput = 2;
constexpr int kEval = 3;

struct Common {
  std::uint64_t seed{42};
  double tol_psd{ak::kDefaultTolPsd};
  double tol_pd{ak::kDefaultTolPd};
  bool unsafe{false};
};

/// Maps library exceptions onto the exit-code contract.
template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ak::KernelEvalError& e) {
    std::cerr << "kernel evaluation error: " << e.what() << "\n";
    return kEval;
  } catch (const ak::IntegrabilityError& e) {
    std::cerr << "kernel evaluation error: " << e.what() << "\n";
    return kEval;
  } catch (const ak::NotPositiveDefinite& e) {
    std::cerr << "kernel evaluation error: " << e.what() << "\n";
    return kEval;
  } catch (const ak::QuadratureError& e) {
    std::cerr << "kernel evaluation error: " << e.what() << "\n";
    return kEval;
  } catch (const ak::RangeError& e) {
    std::cerr << "kernel evaluation error: " << e.what() << "\n";
    return kEval;
  } catch (const ak::Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  }
}

int cmd_build_gram(const std::string& spec_path, const std::string& points_path,
                   const std::string& out_path, const std::string& encoding, const Common& c) {
  return guarded([&] {
    const auto spec = ak::load_kernel_spec(spec_path);
    const auto pts = ak::load_point_csv(points_path);
    if (!(pts.space == spec.space))
      throw ak::SchemaError("point file space " + pts.space.descriptor() +
                            " does not match spec space " + spec.space.descriptor());
    ak::BuildOptions opts;
    opts.unsafe = c.unsafe;
    const auto kernel = ak::build_from_spec(spec, opts);
    const auto gram = ak::assemble_gram(kernel, pts.points);
    const auto report = ak::classify_gram(gram, c.tol_psd, c.tol_pd);
    json prov = kernel.provenance();
    prov["seed"] = c.seed;
    prov["tol_psd"] = c.tol_psd;
    prov["tol_pd"] = c.tol_pd;
    prov["point_labels"] = pts.labels;
    ak::write_gram_file(out_path, gram, ak::spec_hash(spec), prov, report,
                        encoding == "sidecar" ? ak::GramEncoding::Sidecar : ak::GramEncoding::Base64);
    json summary = ak::spectral_json(report);
    summary["p"] = gram.p;
    summary["N"] = gram.n_points;
    summary["out"] = out_path;
    std::cout << summary.dump(2) << "\n";
    return report.classification == ak::Definiteness::Indefinite ? kFailed : kOk;
  });
}

int cmd_check_validity(const std::string& spec_path, int n_points, int n_freq, const Common& c) {
  return guarded([&] {
    const auto spec = ak::load_kernel_spec(spec_path);
    const auto result = ak::check_spec(spec, n_points, n_freq, c.seed);
    json out = {{"spec", spec_path}, {"theorem", spec.construction}, {"seed", c.seed},
                {"pass", result.pass}, {"reports", result.reports}};
    std::cout << out.dump(2) << "\n";
    return result.pass ? kOk : kFailed;
  });
}

int cmd_verify_oracles(const std::string& suite, int trials, const Common& c) {
  return guarded([&] {
    const auto out = ak::run_oracle_suite(suite, c.seed, trials);
    std::cout << out.dump(2) << "\n";
    return out.at("pass").get<bool>() ? kOk : kFailed;
  });
}

json constructions_json() {
  return json::array({
      {{"name", "cm_quadratic"}, {"aliases", {"thm21"}},
       {"formula", "K_mn = phi(H^T G^-1 H) / sqrt(det G)"},
       {"inputs", {"phi", "family_G", "family_H"}}},
      {{"name", "gneiting_single"}, {"aliases", json::array()},
       {"formula", "K_mn = g^(-q/2) phi(|H|^2 / g)"}, {"inputs", {"phi", "family_G:scalar_diag", "family_H"}}},
      {{"name", "gneiting_classic"}, {"aliases", json::array()},
       {"formula", "f(|y-y'|^2)^(-r) phi(|x-x'|^2 / f(|y-y'|^2)), r >= q/2"},
       {"inputs", {"phi", "family_G:gneiting_classic"}}},
      {{"name", "scale_mixture"}, {"aliases", {"thm31"}},
       {"formula", "K_mn = det(G)^(-1/2) int phi(s H^T G^-1 H) P^s_mn drho(s)"},
       {"inputs", {"phi", "family_G", "family_H", "mixture"}}},
      {{"name", "product"}, {"aliases", {"thm41"}},
       {"formula", "K_mn((x,y),(x',y')) = phi(H(x,x')^T G(y,y')^-1 H(x,x')) / sqrt(det G(y,y'))"},
       {"inputs", {"phi", "family_G", "family_H"}}},
      {{"name", "product_mixture"}, {"aliases", {"thm42"}},
       {"formula", "product construction with a scale mixture over X x Y"},
       {"inputs", {"phi", "family_G", "family_H", "mixture"}}},
      {{"name", "matern_cross"}, {"aliases", json::array()},
       {"formula", "Gamma(v_mn) / sqrt(det G) M_v_mn(r_mn sqrt(H^T G^-1 H))"},
       {"inputs", {"family_G", "family_H", "mixture:matern_cross"}}},
      {{"name", "cauchy_cross"}, {"aliases", json::array()},
       {"formula", "Gamma(v_m+v_n) / sqrt(det G) (1 + c (H^T G^-1 H)^gamma)^-(v_m+v_n)"},
       {"inputs", {"family_G", "family_H", "mixture:cauchy_cross"}}},
  });
}

int cmd_catalog(bool as_json) {
  json phi = json::array();
  for (const auto& e : ak::catalog_entries())
    phi.push_back({{"name", e.name}, {"formula", e.formula}, {"params", e.params},
                   {"measure", e.measure}, {"usage", e.usage}});
  const json doc = {{"version", 1},
                    {"phi", phi},
                    {"recipes", ak::recipe_catalog()},
                    {"constructions", constructions_json()}};
  if (as_json) {
    std::cout << doc.dump(2) << "\n";
    return kOk;
  }
  std::cout << "Completely monotone functions (phi):\n";
  for (const auto& e : doc.at("phi"))
    std::cout << "  " << e.at("name").get<std::string>() << "  " << e.at("formula").get<std::string>()
              << "\n      measure: " << e.at("measure").get<std::string>() << "\n";
  std::cout << "\nRecipes:\n";
  for (const auto& [group, items] : doc.at("recipes").items()) {
    std::cout << "  " << group << ":\n";
    for (const auto& r : items) {
      const std::string name = r.contains("recipe") ? r.at("recipe").get<std::string>()
                                                    : r.at("name").get<std::string>();
      std::cout << "    " << name << "  " << r.at("formula").get<std::string>() << "\n";
    }
  }
  std::cout << "\nConstructions:\n";
  for (const auto& c : doc.at("constructions"))
    std::cout << "  " << c.at("name").get<std::string>() << "  " << c.at("formula").get<std::string>()
              << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-valued kernel builder and verifier"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool with_tolerances) {
    sub->add_option("--seed", common.seed, "Root seed for all randomness")->capture_default_str();
    if (with_tolerances) {
      sub->add_option("--tol-psd", common.tol_psd, "Relative PSD tolerance")->capture_default_str();
      sub->add_option("--tol-pd", common.tol_pd, "Absolute PD threshold")->capture_default_str();
      sub->add_flag("--unsafe", common.unsafe, "Build even without passing certificates");
    }
  };

  std::string spec_path, points_path, out_path, encoding = "base64";
  auto* build = app.add_subcommand("build-gram", "Assemble and classify a block Gram matrix");
  build->add_option("spec", spec_path, "Kernel spec JSON")->required();
  build->add_option("points", points_path, "Point set CSV")->required();
  build->add_option("out", out_path, "Output Gram file")->required();
  build->add_option("--encoding", encoding, "Payload encoding")
      ->check(CLI::IsMember({"base64", "sidecar"}))
      ->capture_default_str();
  add_common(build, true);

  int n_points = 6, n_freq = 16;
  auto* check = app.add_subcommand("check-validity", "Run the family checkers for a spec");
  check->add_option("spec", spec_path, "Kernel spec JSON")->required();
  check->add_option("--points", n_points, "Sample points per check")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  check->add_option("--freqs", n_freq, "Random frequencies u per check")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  add_common(check, false);

  std::string suite = "all";
  int trials = 100;
  auto* oracles = app.add_subcommand("verify-oracles", "Run the analytic identity suites");
  oracles->add_option("--suite", suite, "Suite name")
      ->check(CLI::IsMember(ak::oracle_suite_names()))
      ->capture_default_str();
  oracles->add_option("--trials", trials, "Aitken instances")->check(CLI::Range(1, 100000))->capture_default_str();
  add_common(oracles, false);

  bool as_json = false;
  auto* catalog = app.add_subcommand("catalog", "List functions, recipes and constructions");
  catalog->add_flag("--json", as_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  if (*build) return cmd_build_gram(spec_path, points_path, out_path, encoding, common);
  if (*check) return cmd_check_validity(spec_path, n_points, n_freq, common);
  if (*oracles) return cmd_verify_oracles(suite, trials, common);
  if (*catalog) return cmd_catalog(as_json);
  return kInput;
}
