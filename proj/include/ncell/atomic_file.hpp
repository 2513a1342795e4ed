#pragma once

#include <filesystem>
#include <fstream>
#include <ios>
#include <system_error>

#include "ncell/error.hpp"

namespace ncell {

// Writes go to "<path>.partial" and are renamed into place on commit(). An
// uncommitted file keeps its .partial suffix, so readers never see a
// truncated output under the final name.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target, std::ios::openmode mode = std::ios::out)
      : target_(std::move(target)), partial_(target_) {
    partial_ += ".partial";
    out_.open(partial_, mode | std::ios::out | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::Io, "cannot open " + partial_.string() + " for writing");
  }

  std::ofstream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw Error(ErrorCode::Io, "write failed for " + partial_.string());
    out_.close();
    std::error_code ec;
    std::filesystem::rename(partial_, target_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot rename " + partial_.string() + ": " + ec.message());
  }

 private:
  std::filesystem::path target_;
  std::filesystem::path partial_;
  std::ofstream out_;
};

}  // namespace ncell
