#include "json_text.hpp"

#include <vector>

namespace ncell::detail {
namespace {

void emit(const nlohmann::json& j, std::size_t width, int depth, std::string& out) {
  const bool container = j.is_array() || j.is_object();
  if (!container || j.empty()) {
    out += j.dump();
    return;
  }
  std::string compact = j.dump();
  if (compact.size() + static_cast<std::size_t>(2 * depth) <= width) {
    out += compact;
    return;
  }
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  out += j.is_array() ? "[\n" : "{\n";
  bool first = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!first) out += ",\n";
    first = false;
    out += pad;
    if (j.is_object()) {
      out += nlohmann::json(it.key()).dump();
      out += ": ";
    }
    emit(it.value(), width, depth + 1, out);
  }
  out += '\n';
  out.append(static_cast<std::size_t>(2 * depth), ' ');
  out += j.is_array() ? "]" : "}";
}

// Minimal scanner over text that nlohmann already accepted.
class Locator {
 public:
  Locator(std::string_view text, const std::vector<std::string>& target) : s_(text), target_(target) {}

  std::size_t run() {
    skip_ws();
    value(0);
    return found_;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\n' || s_[pos_] == '\r' || s_[pos_] == '\t')) {
      ++pos_;
    }
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\') {
        ++pos_;
        if (pos_ < s_.size() && s_[pos_] == 'u') {
          out += "\\u";  // keys with escapes never match a target; fine for locating
          pos_ += 4;
        } else if (pos_ < s_.size()) {
          out += s_[pos_];
        }
        ++pos_;
        continue;
      }
      out += s_[pos_++];
    }
    ++pos_;  // closing quote
    return out;
  }

  // `matched` = number of leading target tokens matched by the current path.
  void value(std::size_t matched) {
    if (found_ != std::string_view::npos) return;
    if (matched == target_.size()) {
      found_ = pos_;
      return;
    }
    const char c = s_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      if (s_[pos_] == '}') {
        ++pos_;
        return;
      }
      while (true) {
        skip_ws();
        const std::string key = string_token();
        skip_ws();
        ++pos_;  // ':'
        skip_ws();
        const bool hit = matched < target_.size() && key == target_[matched];
        if (hit) {
          value(matched + 1);
          if (found_ != std::string_view::npos) return;
        } else {
          skip_value();
        }
        skip_ws();
        if (s_[pos_++] == '}') return;
      }
    }
    if (c == '[') {
      ++pos_;
      skip_ws();
      if (s_[pos_] == ']') {
        ++pos_;
        return;
      }
      for (std::size_t k = 0;; ++k) {
        skip_ws();
        if (std::to_string(k) == target_[matched]) {
          value(matched + 1);
          if (found_ != std::string_view::npos) return;
        } else {
          skip_value();
        }
        skip_ws();
        if (s_[pos_++] == ']') return;
      }
    }
    skip_value();
  }

  void skip_value() {
    const char c = s_[pos_];
    if (c == '"') {
      string_token();
      return;
    }
    if (c == '{' || c == '[') {
      int level = 0;
      while (pos_ < s_.size()) {
        const char d = s_[pos_];
        if (d == '"') {
          string_token();
          continue;
        }
        if (d == '{' || d == '[') ++level;
        if (d == '}' || d == ']') --level;
        ++pos_;
        if (level == 0) return;
      }
      return;
    }
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' && s_[pos_] != ']' && s_[pos_] != ' ' &&
           s_[pos_] != '\n' && s_[pos_] != '\r' && s_[pos_] != '\t') {
      ++pos_;
    }
  }

  std::string_view s_;
  const std::vector<std::string>& target_;
  std::size_t pos_ = 0;
  std::size_t found_ = std::string_view::npos;
};

}  // namespace

std::string format_json(const nlohmann::json& j, std::size_t inline_width) {
  std::string out;
  emit(j, inline_width, 0, out);
  out += '\n';
  return out;
}

std::size_t locate_pointer(std::string_view text, const nlohmann::json::json_pointer& pointer) {
  std::vector<std::string> tokens;
  auto p = pointer;
  while (!p.empty()) {
    tokens.insert(tokens.begin(), p.back());
    p.pop_back();
  }
  if (text.empty()) return std::string_view::npos;
  return Locator(text, tokens).run();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace ncell::detail
