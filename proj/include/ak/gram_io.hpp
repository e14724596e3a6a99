#pragma once

// Gram artifact: one JSON document
//   {"version": 1, "spec_hash": ..., "layout": "point-major", "p": p, "N": N,
//    "dtype": "f64", "encoding": "base64" | "sidecar", "provenance": {...},
//    "spectral": {...}, "data": base64 | sidecar file name}
// with the (N p)^2 values stored row-major as little-endian float64. The
// sidecar encoding writes the raw values to "<path>.bin" next to the header.

#include <filesystem>
#include <string>

#include "ak/linalg.hpp"
#include "json.hpp"

namespace ak {

enum class GramEncoding { Base64, Sidecar };

struct GramFile {
  nlohmann::json header;  // everything except "data"
  BlockGram gram;
};

nlohmann::json spectral_json(const SpectralReport& r);

/// Writes atomically (temporary file, then rename). Output bytes depend only
/// on the arguments.
void write_gram_file(const std::filesystem::path& path, const BlockGram& gram,
                     const std::string& spec_hash, const nlohmann::json& provenance,
                     const SpectralReport& spectral, GramEncoding encoding = GramEncoding::Base64);

/// Throws SchemaError on malformed files.
GramFile read_gram_file(const std::filesystem::path& path);

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace ak
