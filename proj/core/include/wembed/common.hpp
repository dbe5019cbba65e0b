#pragma once

#include <fmt/format.h>

#include <stdexcept>
#include <string>

namespace wembed {

// Library-wide error type. Thrown on contract violations (bad dimensions,
// invalid configuration, non-finite inputs, unparsable files).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}

  template <typename... Args>
  static Error format(fmt::format_string<Args...> f, Args&&... args) {
    return Error(fmt::format(f, std::forward<Args>(args)...));
  }
};

}  // namespace wembed
