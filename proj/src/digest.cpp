#include "ncell/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "ncell/error.hpp"

namespace ncell {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "cannot initialise SHA-256 context");
  }
}

Sha256::~Sha256() { EVP_MD_CTX_free(impl_->ctx); }

Sha256& Sha256::update(std::span<const unsigned char> bytes) {
  EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
  return *this;
}

Sha256& Sha256::update(std::string_view text) {
  update_u64(text.size());
  EVP_DigestUpdate(impl_->ctx, text.data(), text.size());
  return *this;
}

Sha256& Sha256::update_u64(std::uint64_t value) {
  std::array<unsigned char, 8> buf{};
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>(value >> (8 * k));
  return update(buf);
}

Sha256& Sha256::update_f64(double value) { return update_u64(std::bit_cast<std::uint64_t>(value)); }

Sha256& Sha256::update_f64s(std::span<const double> values) {
  update_u64(values.size());
  for (double v : values) update_f64(v);
  return *this;
}

std::string Sha256::hex_digest() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(kHex[md[k] >> 4]);
    out.push_back(kHex[md[k] & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
  return h.hex_digest();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got > 0) h.update(std::span(reinterpret_cast<const unsigned char*>(buf.data()), got));
  }
  return h.hex_digest();
}

}  // namespace ncell
