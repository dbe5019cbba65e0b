#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wembed/ot.hpp"

namespace wembed {

using EdgeList = std::vector<std::pair<std::int64_t, std::int64_t>>;

// Simple undirected graph: vertex ids dense in [0, n), no self-loops,
// no parallel edges.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  std::vector<std::vector<int>> adjacency() const;
  bool connected() const;
  void validate() const;

  // Builds a graph from raw (possibly sparse/arbitrary) vertex ids by
  // compacting them to [0, n) in ascending order; drops self-loops and
  // duplicate edges.
  static Graph from_edge_list(const EdgeList& edges);
};

// All-pairs shortest-path hop distances of a connected graph.
struct MetricMatrix {
  Matrix d;  // n x n, symmetric, zero diagonal, finite

  int n() const { return static_cast<int>(d.rows()); }
  void validate() const;
};

// Preferential attachment starting from a clique on attach+1 vertices.
Graph gen_barabasi_albert(int n, int attach, unsigned long seed);

// Ring lattice with ring_k neighbors, each edge rewired with probability
// beta (avoiding self-loops and duplicates). ring_k must be even.
Graph gen_watts_strogatz(int n, int ring_k, double beta, unsigned long seed);

// Stochastic block model over `blocks` near-equal communities.
Graph gen_sbm(int n, int blocks, double p_in, double p_out,
              unsigned long seed);

// Random tree grown in breadth-first order; each expanded node draws its
// child count uniformly from {2, 3, 4}, truncated to reach exactly n nodes.
Graph gen_random_tree(int n, unsigned long seed);

// Retries a generator with seed, seed+1, ... until it yields a connected
// graph (at most 50 attempts), as the embedded metrics must be finite.
Graph ensure_connected(
    const std::function<Graph(unsigned long)>& gen_with_seed,
    unsigned long seed, int max_retries = 50);

// BFS hop distances from every vertex. Throws on disconnected input,
// naming an unreachable pair.
MetricMatrix apsp(const Graph& g);

// Induced subgraph on the first `size` vertices in BFS order from a random
// start (ties broken by ascending original id), relabeled 0..size-1.
// Restarts from a different vertex (up to 100 draws) if the component of
// the start is too small.
Graph bfs_fragment(const EdgeList& edges, int size, unsigned long seed);

// Whitespace-separated integer pairs, one edge per line; '#' lines are
// comments; blank lines are skipped; self-loops and duplicates dropped.
EdgeList load_edge_list(const std::string& path);

void save_edge_list(const Graph& g, const std::string& path);

// One CSV row per vertex, comma-separated distances.
void save_metric_csv(const MetricMatrix& m, const std::string& path);

}  // namespace wembed
