#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace ncell {

// Incremental SHA-256. Numeric feeds are little-endian fixed-width so digests
// are stable across runs and platforms with the same byte order.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const unsigned char> bytes);
  Sha256& update(std::string_view text);
  Sha256& update_u64(std::uint64_t value);
  Sha256& update_i64(std::int64_t value) { return update_u64(static_cast<std::uint64_t>(value)); }
  Sha256& update_f64(double value);
  Sha256& update_f64s(std::span<const double> values);

  // Lower-case hex; the hasher cannot be reused afterwards.
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace ncell
