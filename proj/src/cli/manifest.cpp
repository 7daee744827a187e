#include "varireg/cli/manifest.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "varireg/common/error.hpp"

namespace varireg::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error(Errc::io, "sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"config", m.config},
          {"input_digests", m.input_digests},
          {"version", m.version},
          {"seed", m.seed},
          {"threads", m.threads},
          {"deterministic", m.deterministic},
          {"timings", m.timings},
          {"exit_code", m.exit_code}};
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write manifest " + path.string());
  out << to_json(m).dump(2) << "\n";
  if (!out) throw Error(Errc::io, "cannot write manifest " + path.string());
}

}  // namespace varireg::cli
