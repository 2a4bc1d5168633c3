#pragma once

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <type_traits>

namespace onoff {

/// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Minimal CSV builder. Fields are numbers or plain tokens (no quoting).
class CsvTable {
 public:
  explicit CsvTable(std::string_view header) : text_(header) { text_ += '\n'; }

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::size_t i = 0;
    ((append(fields, i++)), ...);
    text_ += '\n';
  }

  const std::string& str() const noexcept { return text_; }

 private:
  template <typename T>
  void append(const T& v, std::size_t i) {
    if (i > 0) text_ += ',';
    if constexpr (std::is_same_v<T, bool>) {
      text_ += v ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
      text_ += format_number(static_cast<double>(v));
    } else if constexpr (std::is_integral_v<T>) {
      text_ += std::to_string(v);
    } else {
      text_ += std::string_view(v);
    }
  }

  std::string text_;
};

}  // namespace onoff
