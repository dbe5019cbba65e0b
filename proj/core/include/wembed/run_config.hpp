#pragma once

#include <string>
#include <vector>

#include "wembed/common.hpp"

namespace wembed {

// Flat key=value settings covering every module default. Values are kept as
// the raw strings they were given as, so parse -> serialize round-trips
// unchanged; typed getters convert on access. Unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();  // registers every known key with its default

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  unsigned long get_ulong(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;

  // `key=value` lines; '#' starts a comment; unknown keys are errors.
  void load_file(const std::string& path);
  void save_file(const std::string& path) const;
  std::string serialize() const;

  const std::vector<std::string>& keys() const { return order_; }

 private:
  void register_key(const std::string& key, const std::string& value);
  std::size_t index_of(const std::string& key) const;

  std::vector<std::string> order_;
  std::vector<std::string> values_;
};

}  // namespace wembed
