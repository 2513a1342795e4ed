#include "ncell/grid_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "ncell/atomic_file.hpp"
#include "ncell/error.hpp"

namespace ncell {
namespace {

static_assert(std::endian::native == std::endian::little, "grid files assume a little-endian host");

constexpr char kMagic[4] = {'N', 'C', 'G', '1'};
constexpr std::uint32_t kMaxAxes = 4;

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error(ErrorCode::Io, "truncated grid header in " + path.string());
  return v;
}

}  // namespace

std::size_t Grid::element_count() const {
  std::size_t n = extents.empty() ? 0 : 1;
  for (auto e : extents) n *= e;
  return n;
}

void write_grid(const std::filesystem::path& path, std::span<const std::uint32_t> extents,
                std::span<const double> values) {
  if (extents.empty() || extents.size() > kMaxAxes) {
    throw Error(ErrorCode::InvalidConfig, "grid must have 1.." + std::to_string(kMaxAxes) + " axes");
  }
  std::size_t n = 1;
  for (auto e : extents) n *= e;
  if (n != values.size()) {
    throw Error(ErrorCode::ShapeMismatch, "grid extents describe " + std::to_string(n) +
                                              " values but " + std::to_string(values.size()) +
                                              " were given for " + path.string());
  }
  AtomicFile file(path, std::ios::binary);
  auto& out = file.stream();
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(extents.size()));
  for (auto e : extents) put_u32(out, e);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  file.commit();
}

Grid read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open grid file " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::Io, path.string() + " is not an NCG1 grid file");
  }
  Grid grid;
  const auto axes = get_u32(in, path);
  if (axes == 0 || axes > kMaxAxes) {
    throw Error(ErrorCode::Io, "bad axis count " + std::to_string(axes) + " in " + path.string());
  }
  for (std::uint32_t k = 0; k < axes; ++k) grid.extents.push_back(get_u32(in, path));
  grid.values.resize(grid.element_count());
  in.read(reinterpret_cast<char*>(grid.values.data()),
          static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != grid.values.size() * sizeof(double)) {
    throw Error(ErrorCode::Io, "truncated grid payload in " + path.string());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::Io, "trailing bytes after grid payload in " + path.string());
  }
  return grid;
}

}  // namespace ncell
