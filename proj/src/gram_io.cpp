#include "ak/gram_io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "ak/errors.hpp"

namespace ak {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "Gram payloads are stored as little-endian float64");

std::string base64_encode(std::span<const unsigned char> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw SchemaError("base64 payload length is not a multiple of 4");
  std::vector<unsigned char> out(3 * (text.size() / 4) + 1);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw SchemaError("malformed base64 payload");
  // EVP_DecodeBlock keeps the zero bytes that padding stands for.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

json spectral_json(const SpectralReport& r) {
  return {{"min_eig", r.min_eig},
          {"max_abs_eig", r.max_abs_eig},
          {"classification", to_string(r.classification)},
          {"tolerance_used", r.tolerance_used}};
}

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SchemaError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string payload_bytes(const BlockGram& gram) {
  const auto data = gram.flattened.matrix().data();
  std::string bytes(data.size() * sizeof(double), '\0');
  std::memcpy(bytes.data(), data.data(), bytes.size());
  return bytes;
}

}  // namespace

void write_gram_file(const std::filesystem::path& path, const BlockGram& gram,
                     const std::string& spec_hash, const json& provenance,
                     const SpectralReport& spectral, GramEncoding encoding) {
  json doc = {{"version", 1},
              {"spec_hash", spec_hash},
              {"layout", BlockGram::kLayout},
              {"p", gram.p},
              {"N", gram.n_points},
              {"dtype", "f64"},
              {"encoding", encoding == GramEncoding::Base64 ? "base64" : "sidecar"},
              {"provenance", provenance},
              {"spectral", spectral_json(spectral)}};
  const std::string bytes = payload_bytes(gram);
  if (encoding == GramEncoding::Base64) {
    doc["data"] = base64_encode(
        std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
  } else {
    const auto sidecar = std::filesystem::path(path.string() + ".bin");
    write_atomically(sidecar, bytes);
    doc["data"] = sidecar.filename().string();
  }
  write_atomically(path, doc.dump(2) + "\n");
}

GramFile read_gram_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": malformed Gram header");
  }
  for (const char* k : {"version", "layout", "p", "N", "dtype", "encoding", "data"})
    if (!doc.contains(k)) throw SchemaError(path.string() + ": missing '" + k + "'");
  if (doc.at("layout") != BlockGram::kLayout || doc.at("dtype") != "f64")
    throw SchemaError(path.string() + ": unsupported layout or dtype");
  const auto p = doc.at("p").get<std::size_t>();
  const auto n = doc.at("N").get<std::size_t>();
  const std::size_t dim = p * n;

  std::vector<unsigned char> bytes;
  const std::string enc = doc.at("encoding").get<std::string>();
  if (enc == "base64") {
    bytes = base64_decode(doc.at("data").get<std::string>());
  } else if (enc == "sidecar") {
    const auto sidecar = path.parent_path() / doc.at("data").get<std::string>();
    std::ifstream bin(sidecar, std::ios::binary);
    if (!bin) throw SchemaError("cannot read sidecar " + sidecar.string());
    bytes.assign(std::istreambuf_iterator<char>(bin), std::istreambuf_iterator<char>());
  } else {
    throw SchemaError(path.string() + ": unknown encoding '" + enc + "'");
  }
  if (bytes.size() != dim * dim * sizeof(double))
    throw SchemaError(path.string() + ": payload size does not match p and N");
  Matrix m(dim, dim);
  std::memcpy(m.data().data(), bytes.data(), bytes.size());
  doc.erase("data");
  return {std::move(doc), BlockGram{p, n, SymMatrix(m)}};
}

}  // namespace ak
