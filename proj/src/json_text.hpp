#pragma once

// Private helpers for the JSON documents the library reads and writes.

#include <cstddef>
#include <string>
#include <string_view>

#include "json.hpp"

namespace ncell::detail {

// Pretty-printed JSON where any array or object whose compact form fits in
// `inline_width` characters stays on one line. Keeps big node and synapse
// lists to one entry per line instead of one scalar per line.
std::string format_json(const nlohmann::json& j, std::size_t inline_width = 100);

// Byte offset where the value at `pointer` starts in `text`, or npos. The
// text must already be valid JSON.
std::size_t locate_pointer(std::string_view text, const nlohmann::json::json_pointer& pointer);

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset);

}  // namespace ncell::detail
