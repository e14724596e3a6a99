#pragma once

// Declarative kernel specs (JSON) and point sets (CSV).
//
// Kernel spec document:
//   {
//     "theorem":   construction name (see construction_names()),
//     "phi":       {"name": catalog name, "params": {...}},
//     "family_G":  {"recipe": ..., "params": {...}},
//     "family_H":  {"recipe": ..., "params": {...}},      optional, default "zero"
//     "mixture":   {"recipe": ..., "params": {...}},      mixture and cross constructions
//     "power_l":   integer >= 1,                          optional
//     "dims":      {"p": int, "q": int, "space": space descriptor}
//   }
// Unknown keys are rejected at every level.
//
// Point CSV: the first header cell is the space descriptor, the remaining
// header cells name the coordinates (one per ambient coordinate; product
// points concatenate the left then right blocks, split at the left ambient
// dimension). Each data row is a label followed by the coordinates.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ak/builders.hpp"
#include "ak/families.hpp"
#include "ak/points.hpp"
#include "json.hpp"

namespace ak {

struct KernelSpec {
  /// The document as parsed; its compact dump is what spec_hash() hashes.
  nlohmann::json document;
  /// Canonical construction name.
  std::string construction;
  int p{1};
  int q{1};
  int power_l{1};
  PointSpace space;
};

/// Canonical construction names; the short aliases thm21, thm31, thm41 and
/// thm42 are accepted for cm_quadratic, scale_mixture, product and
/// product_mixture.
std::vector<std::string> construction_names();

/// Throws SchemaError; JSON syntax errors report "line L, column C".
KernelSpec parse_kernel_spec(std::string_view text);
KernelSpec load_kernel_spec(const std::filesystem::path& path);

/// FNV-1a 64-bit hash of the compact JSON dump, as 16 hex digits.
std::string spec_hash(const KernelSpec& spec);

/// Resolves recipes and builds the kernel. Recipe parameter errors raise
/// SchemaError; uncertified inputs raise ParamError unless opts.unsafe.
MatrixKernel build_from_spec(const KernelSpec& spec, const BuildOptions& opts);

struct SpecCheckResult {
  bool pass{true};
  /// One entry per checker; entries with "informational": true do not affect pass.
  nlohmann::json reports;
};

/// Runs every checker that applies to the kernel spec's families.
SpecCheckResult check_spec(const KernelSpec& spec, int n_points, int n_freq, std::uint64_t seed);

/// Recipe names and parameters accepted in spec documents.
nlohmann::json recipe_catalog();

struct PointSet {
  PointSpace space;
  std::vector<std::string> labels;
  std::vector<Point> points;
};

/// Throws SchemaError naming the line (and row index) of the first problem.
/// Sphere coordinates must have unit norm within 1e-8.
PointSet parse_point_csv(std::string_view text);
PointSet load_point_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace ak
