#pragma once

#include <string>

#include "wembed/embedding_model.hpp"

namespace wembed {

// Versioned text persistence for embedding tables.
//
//   WEMB v1 kind=<kind> n=<n> M=<M> k=<k>      (wasserstein)
//   WEMB v1 kind=<kind> n=<n> d=<d>            (vector kinds)
//   labels                                      (optional block)
//   <one label per line, n lines>
//   params
//   <one line per object, space-separated decimals>
//
// Floats are written with the shortest decimal representation that parses
// back to the same bits, so save -> load is exact.
void save_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(const std::string& path);

std::string format_double(double value);   // shortest round-trip decimal
double parse_double(const std::string& token);

}  // namespace wembed
