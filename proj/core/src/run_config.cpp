#include "wembed/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace wembed {

RunConfig::RunConfig() {
  register_key("seed", "0");
  register_key("deterministic", "true");

  register_key("sinkhorn.lambda", "0.05");
  register_key("sinkhorn.p", "1");
  register_key("sinkhorn.iterations", "50");
  register_key("sinkhorn.stabilization_threshold", "0.01");

  register_key("adam.lr", "0.01");
  register_key("adam.beta1", "0.9");
  register_key("adam.beta2", "0.999");
  register_key("adam.epsilon", "1e-8");

  register_key("init.scale", "0.1");
  register_key("ball.eps", "1e-5");

  register_key("distortion.epochs", "300");
  register_key("distortion.batch_pairs", "0");
  register_key("distortion.lambda", "0.1");
  register_key("distortion.iterations", "50");
  register_key("distortion.lr", "0.01");

  register_key("graph.ba_attach", "2");
  register_key("graph.ws_ring_k", "4");
  register_key("graph.ws_beta", "0.3");
  register_key("graph.sbm_blocks", "4");
  register_key("graph.sbm_p_in", "0.5");
  register_key("graph.sbm_p_out", "0.02");

  register_key("words.window", "2");
  register_key("words.margin", "1");
  register_key("words.neg_rate", "1");
  register_key("words.lambda", "0.05");
  register_key("words.epochs", "3");
  register_key("words.vocab_cap", "8000");
  register_key("words.hidden", "64");
  register_key("words.cloud_points", "16");
  register_key("words.cloud_dim", "4");
  register_key("words.batch_size", "64");
  register_key("words.iterations", "50");
  register_key("words.lr", "0.001");
  register_key("words.init_scale", "0.1");
  register_key("words.tilted_negatives", "false");

  register_key("viz.threshold", "0.05");
  register_key("viz.bandwidth", "0");
  register_key("viz.resolution", "256");
  register_key("viz.bands", "6");
}

void RunConfig::register_key(const std::string& key,
                             const std::string& value) {
  order_.push_back(key);
  values_.push_back(value);
}

std::size_t RunConfig::index_of(const std::string& key) const {
  auto it = std::find(order_.begin(), order_.end(), key);
  if (it == order_.end()) {
    throw Error::format("unknown configuration key '{}'", key);
  }
  return static_cast<std::size_t>(it - order_.begin());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values_[index_of(key)] = value;
}

bool RunConfig::has(const std::string& key) const {
  return std::find(order_.begin(), order_.end(), key) != order_.end();
}

const std::string& RunConfig::raw(const std::string& key) const {
  return values_[index_of(key)];
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error::format("config key '{}': '{}' is not a number", key, v);
  }
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& v = raw(key);
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error::format("config key '{}': '{}' is not an integer", key, v);
  }
  return out;
}

unsigned long RunConfig::get_ulong(const std::string& key) const {
  const std::string& v = raw(key);
  unsigned long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error::format("config key '{}': '{}' is not a nonnegative integer",
                        key, v);
  }
  return out;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error::format("config key '{}': '{}' is not a boolean", key, v);
}

const std::string& RunConfig::get_string(const std::string& key) const {
  return raw(key);
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::format("cannot open config '{}'", path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::size_t eq = line.find('=', first);
    if (eq == std::string::npos) {
      throw Error::format("{}:{}: expected key=value", path, line_no);
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string()
                                    : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(first, eq - first));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set(key, value);
    } catch (const Error& e) {
      throw Error::format("{}:{}: {}", path, line_no, e.what());
    }
  }
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    out << order_[i] << '=' << values_[i] << '\n';
  }
  return out.str();
}

void RunConfig::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::format("cannot write config '{}'", path);
  out << serialize();
  if (!out) throw Error::format("write failed for '{}'", path);
}

}  // namespace wembed
