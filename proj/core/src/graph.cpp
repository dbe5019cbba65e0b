#include "wembed/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace wembed {

namespace {

std::pair<int, int> ordered(int a, int b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (auto [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  return adj;
}

bool Graph::connected() const {
  if (n == 0) return false;
  auto adj = adjacency();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        queue.push_back(w);
      }
    }
  }
  return reached == n;
}

void Graph::validate() const {
  if (n < 1) throw Error("graph must have at least one vertex");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw Error::format("edge ({},{}) references vertex outside [0,{})", a,
                          b, n);
    }
    if (a == b) throw Error::format("self-loop at vertex {}", a);
    if (!seen.insert(ordered(a, b)).second) {
      throw Error::format("duplicate edge ({},{})", a, b);
    }
  }
}

Graph Graph::from_edge_list(const EdgeList& raw) {
  std::map<std::int64_t, int> compact;
  for (auto [a, b] : raw) {
    compact.emplace(a, 0);
    compact.emplace(b, 0);
  }
  int next = 0;
  for (auto& [id, idx] : compact) idx = next++;

  Graph g;
  g.n = next;
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : raw) {
    if (a == b) continue;
    auto e = ordered(compact[a], compact[b]);
    if (seen.insert(e).second) g.edges.push_back(e);
  }
  return g;
}

void MetricMatrix::validate() const {
  const Eigen::Index size = d.rows();
  if (size < 1 || d.cols() != size) throw Error("metric matrix must be square");
  if (!d.allFinite()) throw Error("metric matrix has non-finite entries");
  if (!d.isApprox(d.transpose())) throw Error("metric matrix must be symmetric");
  if (d.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw Error("metric matrix diagonal must be zero");
  }
  if (d.minCoeff() < 0.0) throw Error("metric matrix has negative entries");
}

Graph gen_barabasi_albert(int n, int attach, unsigned long seed) {
  if (attach < 1 || attach >= n) {
    throw Error::format("barabasi-albert requires 1 <= attach < n, got {} / {}",
                        attach, n);
  }
  Graph g;
  g.n = n;
  std::mt19937_64 rng(seed);

  // degree-weighted pool: one slot per edge endpoint
  std::vector<int> pool;
  for (int a = 0; a <= attach; ++a) {
    for (int b = a + 1; b <= attach; ++b) {
      g.edges.emplace_back(a, b);
      pool.push_back(a);
      pool.push_back(b);
    }
  }
  for (int v = attach + 1; v < n; ++v) {
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < attach) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      targets.insert(pool[pick(rng)]);
    }
    for (int t : targets) {
      g.edges.emplace_back(ordered(v, t));
      pool.push_back(v);
      pool.push_back(t);
    }
  }
  return g;
}

Graph gen_watts_strogatz(int n, int ring_k, double beta, unsigned long seed) {
  if (ring_k < 2 || ring_k % 2 != 0 || ring_k >= n) {
    throw Error::format(
        "watts-strogatz requires even ring_k with 2 <= ring_k < n, got {} / {}",
        ring_k, n);
  }
  if (beta < 0.0 || beta > 1.0) {
    throw Error::format("rewiring probability must lie in [0,1], got {}", beta);
  }
  Graph g;
  g.n = n;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any_vertex(0, n - 1);

  std::set<std::pair<int, int>> present;
  for (int j = 1; j <= ring_k / 2; ++j) {
    for (int i = 0; i < n; ++i) {
      present.insert(ordered(i, (i + j) % n));
    }
  }
  // rewire in the deterministic lattice order
  std::set<std::pair<int, int>> result = present;
  for (int j = 1; j <= ring_k / 2; ++j) {
    for (int i = 0; i < n; ++i) {
      auto e = ordered(i, (i + j) % n);
      if (result.count(e) == 0) continue;  // already rewired away
      if (coin(rng) >= beta) continue;
      // replace (i, i+j) by (i, w) for a uniform non-degenerate w
      for (int tries = 0; tries < 1000; ++tries) {
        int w = any_vertex(rng);
        if (w == i) continue;
        auto cand = ordered(i, w);
        if (result.count(cand)) continue;
        result.erase(e);
        result.insert(cand);
        break;
      }
    }
  }
  g.edges.assign(result.begin(), result.end());
  return g;
}

Graph gen_sbm(int n, int blocks, double p_in, double p_out,
              unsigned long seed) {
  if (blocks < 1 || blocks > n) {
    throw Error::format("sbm requires 1 <= blocks <= n, got {} / {}", blocks,
                        n);
  }
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0) {
    throw Error::format("sbm probabilities must lie in [0,1], got {} / {}",
                        p_in, p_out);
  }
  if (p_in < p_out) {
    throw Error::format("sbm requires p_in >= p_out, got {} < {}", p_in,
                        p_out);
  }
  Graph g;
  g.n = n;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto block_of = [&](int v) { return v % blocks; };  // near-equal communities
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double p = block_of(a) == block_of(b) ? p_in : p_out;
      if (coin(rng) < p) g.edges.emplace_back(a, b);
    }
  }
  return g;
}

Graph gen_random_tree(int n, unsigned long seed) {
  if (n < 1) throw Error("tree must have at least one node");
  Graph g;
  g.n = n;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_children(2, 4);
  std::deque<int> frontier{0};
  int next_id = 1;
  while (next_id < n && !frontier.empty()) {
    int parent = frontier.front();
    frontier.pop_front();
    int want = n_children(rng);
    for (int c = 0; c < want && next_id < n; ++c) {
      g.edges.emplace_back(parent, next_id);
      frontier.push_back(next_id);
      ++next_id;
    }
  }
  return g;
}

Graph ensure_connected(
    const std::function<Graph(unsigned long)>& gen_with_seed,
    unsigned long seed, int max_retries) {
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    Graph g = gen_with_seed(seed + static_cast<unsigned long>(attempt));
    if (g.connected()) return g;
  }
  throw Error::format(
      "generator produced no connected graph within {} retries from seed {}",
      max_retries, seed);
}

MetricMatrix apsp(const Graph& g) {
  g.validate();
  auto adj = g.adjacency();
  MetricMatrix out;
  out.d = Matrix::Zero(g.n, g.n);
  std::vector<int> dist(static_cast<std::size_t>(g.n));
  for (int src = 0; src < g.n; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(src)] = 0;
    std::deque<int> queue{src};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] =
              dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(w);
        }
      }
    }
    for (int v = 0; v < g.n; ++v) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        throw Error::format(
            "graph is disconnected: vertex {} is unreachable from {}", v, src);
      }
      out.d(src, v) = dist[static_cast<std::size_t>(v)];
    }
  }
  return out;
}

Graph bfs_fragment(const EdgeList& raw, int size, unsigned long seed) {
  if (size < 1) throw Error("fragment size must be positive");
  Graph whole = Graph::from_edge_list(raw);
  if (whole.n < size) {
    throw Error::format("input graph has {} vertices, fragment needs {}",
                        whole.n, size);
  }
  auto adj = whole.adjacency();
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, whole.n - 1);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const int start = pick(rng);
    std::vector<int> order;
    std::vector<char> seen(static_cast<std::size_t>(whole.n), 0);
    std::deque<int> queue{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!queue.empty() && static_cast<int>(order.size()) < size) {
      int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          queue.push_back(w);
        }
      }
    }
    if (static_cast<int>(order.size()) < size) continue;  // component too small

    std::vector<int> relabel(static_cast<std::size_t>(whole.n), -1);
    for (int idx = 0; idx < size; ++idx) {
      relabel[static_cast<std::size_t>(order[static_cast<std::size_t>(idx)])] =
          idx;
    }
    Graph frag;
    frag.n = size;
    for (auto [a, b] : whole.edges) {
      int ra = relabel[static_cast<std::size_t>(a)];
      int rb = relabel[static_cast<std::size_t>(b)];
      if (ra >= 0 && rb >= 0) frag.edges.emplace_back(ordered(ra, rb));
    }
    std::sort(frag.edges.begin(), frag.edges.end());
    return frag;
  }
  throw Error::format(
      "no BFS component with >= {} vertices found within 100 start draws",
      size);
}

EdgeList load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::format("cannot open edge list '{}'", path);
  EdgeList edges;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    std::istringstream ls(line);
    std::string ta, tb, extra;
    ls >> ta >> tb;
    if (ls >> extra) {
      throw Error::format("{}:{}: expected two vertex ids, got extra token '{}'",
                          path, line_no, extra);
    }
    auto parse_id = [&](const std::string& tok) {
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(),
                                       value);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || value < 0) {
        throw Error::format("{}:{}: '{}' is not a nonnegative integer", path,
                            line_no, tok);
      }
      return value;
    };
    if (tb.empty()) {
      throw Error::format("{}:{}: expected two vertex ids", path, line_no);
    }
    std::int64_t a = parse_id(ta), b = parse_id(tb);
    if (a == b) continue;
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    if (seen.insert(key).second) edges.push_back(key);
  }
  return edges;
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error::format("cannot write edge list '{}'", path);
  out << "# undirected edge list, " << g.n << " vertices, " << g.edges.size()
      << " edges\n";
  for (auto [a, b] : g.edges) out << a << ' ' << b << '\n';
  if (!out) throw Error::format("write failed for '{}'", path);
}

void save_metric_csv(const MetricMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error::format("cannot write metric csv '{}'", path);
  for (Eigen::Index i = 0; i < m.d.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.d.cols(); ++j) {
      if (j) out << ',';
      out << m.d(i, j);
    }
    out << '\n';
  }
  if (!out) throw Error::format("write failed for '{}'", path);
}

}  // namespace wembed
