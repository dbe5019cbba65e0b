#include "wembed/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace wembed {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("failed to format a double");
  return std::string(buf, end);
}

double parse_double(const std::string& token) {
  double out = 0;
  auto [p, ec] =
      std::from_chars(token.data(), token.data() + token.size(), out);
  if (ec != std::errc() || p != token.data() + token.size()) {
    throw Error::format("'{}' is not a decimal number", token);
  }
  return out;
}

void save_model(const EmbeddingModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::format("cannot write model '{}'", path);

  out << "WEMB v1 kind=" << to_string(model.kind) << " n=" << model.n_objects;
  if (model.kind == ModelKind::kWasserstein) {
    out << " M=" << model.points << " k=" << model.ground_dim;
  } else {
    out << " d=" << model.dim;
  }
  out << '\n';

  if (!model.labels.empty()) {
    out << "labels\n";
    for (const auto& l : model.labels) out << l << '\n';
  }
  out << "params\n";
  const int per = model.params_per_object();
  for (int i = 0; i < model.n_objects; ++i) {
    for (int j = 0; j < per; ++j) {
      if (j) out << ' ';
      out << format_double(model.params[static_cast<long>(i) * per + j]);
    }
    out << '\n';
  }
  if (!out) throw Error::format("write failed for '{}'", path);
}

namespace {

std::pair<std::string, std::string> split_kv(const std::string& tok,
                                             const std::string& path) {
  const auto eq = tok.find('=');
  if (eq == std::string::npos) {
    throw Error::format("{}: malformed header token '{}'", path, tok);
  }
  return {tok.substr(0, eq), tok.substr(eq + 1)};
}

int parse_int_field(const std::string& v, const std::string& key,
                    const std::string& path) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || out < 1) {
    throw Error::format("{}: header field {}='{}' is not a positive integer",
                        path, key, v);
  }
  return out;
}

}  // namespace

EmbeddingModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::format("cannot open model '{}'", path);

  std::string header;
  if (!std::getline(in, header)) throw Error::format("{}: empty file", path);
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "WEMB" || version != "v1") {
    throw Error::format("{}: not a WEMB v1 model file", path);
  }

  EmbeddingModel model;
  bool have_kind = false, have_n = false, have_shape = false;
  int M = 0, k = 0, d = 0;
  std::string tok;
  while (hs >> tok) {
    auto [key, value] = split_kv(tok, path);
    if (key == "kind") {
      model.kind = model_kind_from_string(value);
      have_kind = true;
    } else if (key == "n") {
      model.n_objects = parse_int_field(value, key, path);
      have_n = true;
    } else if (key == "M") {
      M = parse_int_field(value, key, path);
    } else if (key == "k") {
      k = parse_int_field(value, key, path);
    } else if (key == "d") {
      d = parse_int_field(value, key, path);
    } else {
      throw Error::format("{}: unknown header field '{}'", path, key);
    }
  }
  if (!have_kind || !have_n) {
    throw Error::format("{}: header must carry kind= and n=", path);
  }
  if (model.kind == ModelKind::kWasserstein) {
    if (M < 1 || k < 1) {
      throw Error::format("{}: wasserstein header needs M= and k=", path);
    }
    model.points = M;
    model.ground_dim = k;
    have_shape = true;
  } else {
    if (d < 1) throw Error::format("{}: vector header needs d=", path);
    model.dim = d;
    have_shape = true;
  }
  (void)have_shape;

  std::string line;
  if (!std::getline(in, line)) {
    throw Error::format("{}: missing body", path);
  }
  if (line == "labels") {
    model.labels.reserve(static_cast<std::size_t>(model.n_objects));
    for (int i = 0; i < model.n_objects; ++i) {
      if (!std::getline(in, line)) {
        throw Error::format("{}: expected {} labels, got {}", path,
                            model.n_objects, i);
      }
      model.labels.push_back(line);
    }
    if (!std::getline(in, line)) {
      throw Error::format("{}: missing params block", path);
    }
  }
  if (line != "params") {
    throw Error::format("{}: expected 'params' block, got '{}'", path, line);
  }

  const int per = model.params_per_object();
  model.params.resize(static_cast<long>(model.n_objects) * per);
  for (int i = 0; i < model.n_objects; ++i) {
    if (!std::getline(in, line)) {
      throw Error::format("{}: expected {} parameter lines, got {}", path,
                          model.n_objects, i);
    }
    std::istringstream ls(line);
    for (int j = 0; j < per; ++j) {
      if (!(ls >> tok)) {
        throw Error::format("{}: object {} has {} parameters, expected {}",
                            path, i, j, per);
      }
      model.params[static_cast<long>(i) * per + j] = parse_double(tok);
    }
    if (ls >> tok) {
      throw Error::format("{}: object {} has more than {} parameters", path, i,
                          per);
    }
  }
  model.validate();
  return model;
}

}  // namespace wembed
