#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "slaq/error.hpp"

namespace slaq {

using vertex_t = std::uint32_t;

struct Edge {
  vertex_t u;
  vertex_t v;
  double weight = 1.0;
};

/// Immutable undirected graph in CSR form.
///
/// Every undirected edge is stored in both directions, rows are sorted, there
/// are no self-loops or duplicate entries and all weights are positive. The
/// arrays live behind a shared pointer, so copies are cheap and can be handed
/// to any number of readers.
class Graph {
 public:
  /// Canonicalizes an arbitrary edge bag: symmetrizes, drops self-loops and
  /// collapses duplicates keeping the maximum weight. Throws on n == 0, an
  /// out-of-range endpoint or a nonpositive / non-finite weight.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges) {
    if (n == 0) throw InvalidArgument("graph must have at least one vertex");
    if (n > std::size_t{std::numeric_limits<vertex_t>::max()}) {
      throw InvalidArgument("vertex count exceeds 32-bit index range");
    }
    std::vector<Edge> arcs;
    arcs.reserve(2 * edges.size());
    for (const auto& e : edges) {
      if (e.u >= n || e.v >= n) throw InvalidArgument("edge endpoint out of range");
      if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
        throw InvalidArgument("edge weights must be positive and finite");
      }
      if (e.u == e.v) continue;
      arcs.push_back(e);
      arcs.push_back({e.v, e.u, e.weight});
    }
    std::sort(arcs.begin(), arcs.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v != b.v ? a.v < b.v : a.weight > b.weight;
    });
    // After sorting, the first arc of each (u, v) run has the largest weight.
    auto last = std::unique(arcs.begin(), arcs.end(), [](const Edge& a, const Edge& b) {
      return a.u == b.u && a.v == b.v;
    });
    arcs.erase(last, arcs.end());

    auto s = std::make_shared<Storage>();
    s->n = n;
    s->row_offsets.assign(n + 1, 0);
    s->col_indices.reserve(arcs.size());
    s->weights.reserve(arcs.size());
    for (const auto& a : arcs) {
      ++s->row_offsets[a.u + 1];
      s->col_indices.push_back(a.v);
      s->weights.push_back(a.weight);
    }
    for (std::size_t i = 0; i < n; ++i) s->row_offsets[i + 1] += s->row_offsets[i];
    return Graph(std::move(s));
  }

  static Graph empty(std::size_t n) { return from_edges(n, {}); }

  std::size_t n() const noexcept { return s_->n; }
  std::size_t m() const noexcept { return s_->col_indices.size() / 2; }

  std::span<const std::size_t> row_offsets() const noexcept { return s_->row_offsets; }
  std::span<const vertex_t> col_indices() const noexcept { return s_->col_indices; }
  std::span<const double> weights() const noexcept { return s_->weights; }

  std::span<const vertex_t> neighbors(std::size_t i) const noexcept {
    return std::span(s_->col_indices).subspan(s_->row_offsets[i], degree_count(i));
  }
  std::span<const double> neighbor_weights(std::size_t i) const noexcept {
    return std::span(s_->weights).subspan(s_->row_offsets[i], degree_count(i));
  }
  std::size_t degree_count(std::size_t i) const noexcept {
    return s_->row_offsets[i + 1] - s_->row_offsets[i];
  }

  bool is_weighted() const noexcept {
    return std::any_of(s_->weights.begin(), s_->weights.end(), [](double w) { return w != 1.0; });
  }

  /// Original vertex ids when the parser compacted them; empty means identity.
  std::span<const std::uint64_t> original_ids() const noexcept { return s_->original_ids; }

  /// Each undirected edge once, as (u < v) in row-major order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(m());
    for (std::size_t i = 0; i < n(); ++i) {
      auto cols = neighbors(i);
      auto ws = neighbor_weights(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] > i) out.push_back({static_cast<vertex_t>(i), cols[k], ws[k]});
      }
    }
    return out;
  }

  Graph with_original_ids(std::vector<std::uint64_t> ids) const {
    auto s = std::make_shared<Storage>(*s_);
    s->original_ids = std::move(ids);
    return Graph(std::move(s));
  }

  /// Structural equality; the id remap table is reporting metadata and is ignored.
  friend bool operator==(const Graph& a, const Graph& b) {
    return a.s_->n == b.s_->n && a.s_->row_offsets == b.s_->row_offsets &&
           a.s_->col_indices == b.s_->col_indices && a.s_->weights == b.s_->weights;
  }

 private:
  struct Storage {
    std::size_t n = 0;
    std::vector<std::size_t> row_offsets;
    std::vector<vertex_t> col_indices;
    std::vector<double> weights;
    std::vector<std::uint64_t> original_ids;
  };

  explicit Graph(std::shared_ptr<const Storage> s) : s_(std::move(s)) {}

  std::shared_ptr<const Storage> s_;
};

/// 64-bit FNV-1a over the CSR arrays, rendered as 16 hex digits.
inline std::string graph_hash(const Graph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t n = g.n();
  mix(&n, sizeof n);
  for (auto o : g.row_offsets()) {
    const std::uint64_t v = o;
    mix(&v, sizeof v);
  }
  mix(g.col_indices().data(), g.col_indices().size_bytes());
  mix(g.weights().data(), g.weights().size_bytes());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kHex[h & 0xf];
  return out;
}

// ---------------------------------------------------------------------------
// Edge-list text format

struct ParseOptions {
  /// Field separator; nullopt splits on any run of spaces or tabs.
  std::optional<char> separator;
  std::string comment_prefix = "#";
  bool weighted = false;
  /// Renumber the distinct ids densely (ascending) and keep the remap table.
  bool compact_ids = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line, std::optional<char> sep) {
  std::vector<std::string_view> out;
  if (sep) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(*sep, start);
      out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

inline bool is_comment(std::string_view line, const std::string& prefix) {
  return !prefix.empty() && line.substr(0, prefix.size()) == prefix;
}

inline std::uint64_t parse_vertex(std::string_view field, std::size_t line_no) {
  auto id = parse_number<std::uint64_t>(field);
  if (!id) {
    throw ParseError(line_no, "vertex id '" + std::string(field) + "' is not a nonnegative integer");
  }
  if (*id >= std::numeric_limits<vertex_t>::max()) throw ParseError(line_no, "vertex id too large");
  return *id;
}

}  // namespace detail

/// Reads a SNAP-style edge list. Vertex count is max id + 1 unless
/// `compact_ids` is set.
inline Graph parse_edge_list(std::istream& in, const ParseOptions& opts = {}) {
  struct RawEdge {
    std::uint64_t u, v;
    double w;
  };
  std::vector<RawEdge> raw;
  std::string line;
  std::size_t line_no = 0;
  const std::size_t expected = opts.weighted ? 3 : 2;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || detail::is_comment(body, opts.comment_prefix)) continue;
    const auto fields = detail::split_fields(body, opts.separator);
    if (fields.size() != expected) {
      throw ParseError(line_no, "expected " + std::to_string(expected) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    RawEdge e{detail::parse_vertex(fields[0], line_no), detail::parse_vertex(fields[1], line_no), 1.0};
    if (opts.weighted) {
      auto w = detail::parse_number<double>(fields[2]);
      if (!w) throw ParseError(line_no, "weight '" + std::string(fields[2]) + "' is not a number");
      if (!(*w > 0.0) || !std::isfinite(*w)) throw ParseError(line_no, "weight must be positive");
      e.w = *w;
    }
    raw.push_back(e);
  }
  if (raw.empty()) throw InvalidArgument("edge list contains no edges (zero vertices)");

  std::vector<std::uint64_t> ids;
  if (opts.compact_ids) {
    for (const auto& e : raw) {
      ids.push_back(e.u);
      ids.push_back(e.v);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
  auto index_of = [&](std::uint64_t id) -> vertex_t {
    if (!opts.compact_ids) return static_cast<vertex_t>(id);
    return static_cast<vertex_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  std::size_t n = 0;
  for (const auto& e : raw) {
    const auto u = index_of(e.u);
    const auto v = index_of(e.v);
    n = std::max<std::size_t>(n, std::max(u, v) + std::size_t{1});
    edges.push_back({u, v, e.w});
  }
  auto g = Graph::from_edges(n, edges);
  return opts.compact_ids ? g.with_original_ids(std::move(ids)) : g;
}

/// Writes each undirected edge once as "u v" (or "u v w"); weights use the
/// shortest round-trip representation. Isolated trailing vertices are not
/// representable in this format.
inline void write_edge_list(std::ostream& out, const Graph& g, bool with_weights = false) {
  char buf[64];
  for (const auto& e : g.edges()) {
    out << e.u << ' ' << e.v;
    if (with_weights) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.weight);
      out << ' ' << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic graphs

/// G(n, p) with p = avg_degree / (n - 1), sampled by geometric skipping over
/// the lexicographic pair order so the cost is O(n + m).
inline Graph erdos_renyi(std::size_t n, double avg_degree, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("erdos_renyi: n must be at least 1");
  const double max_degree = static_cast<double>(n - 1);
  if (!(avg_degree >= 0.0) || avg_degree > max_degree) {
    throw InvalidArgument("erdos_renyi: avg_degree must lie in [0, n-1]");
  }
  std::vector<Edge> edges;
  if (n == 1 || avg_degree == 0.0) return Graph::from_edges(n, edges);
  const double p = avg_degree / max_degree;
  if (p >= 1.0) {
    for (std::size_t v = 1; v < n; ++v)
      for (std::size_t w = 0; w < v; ++w)
        edges.push_back({static_cast<vertex_t>(w), static_cast<vertex_t>(v), 1.0});
    return Graph::from_edges(n, edges);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_q = std::log1p(-p);
  edges.reserve(static_cast<std::size_t>(p * max_degree * n / 2 * 1.1) + 16);
  // Batagelj & Brandes: walk rows v, columns w < v.
  std::int64_t v = 1, w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    const double r = unif(rng);
    w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) edges.push_back({static_cast<vertex_t>(w), static_cast<vertex_t>(v), 1.0});
  }
  return Graph::from_edges(n, edges);
}

/// Vertex-disjoint union, second graph's ids shifted by a.n().
inline Graph disjoint_union(const Graph& a, const Graph& b) {
  auto edges = a.edges();
  const auto shift = static_cast<vertex_t>(a.n());
  for (auto e : b.edges()) edges.push_back({e.u + shift, e.v + shift, e.weight});
  return Graph::from_edges(a.n() + b.n(), edges);
}

/// Applies a vertex relabeling: vertex i becomes perm[i].
inline Graph relabel(const Graph& g, std::span<const vertex_t> perm) {
  if (perm.size() != g.n()) throw InvalidArgument("relabel: permutation size mismatch");
  auto edges = g.edges();
  for (auto& e : edges) {
    e.u = perm[e.u];
    e.v = perm[e.v];
  }
  return Graph::from_edges(g.n(), edges);
}

// ---------------------------------------------------------------------------
// Temporal edge streams

/// Cumulative graphs of a timestamped event stream, one per time bucket.
struct SnapshotSeries {
  std::vector<Graph> graphs;
  /// Inclusive upper timestamp of each bucket.
  std::vector<std::int64_t> timestamps;
  /// Cumulative count of edges actually inserted / deleted up to each snapshot.
  std::vector<std::size_t> added;
  std::vector<std::size_t> removed;
  /// Deletions of absent edges (ignored).
  std::size_t ignored_deletions = 0;

  std::size_t size() const noexcept { return graphs.size(); }
};

namespace detail {
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
}  // namespace detail

/// Parses "timestamp op src dst" lines (op is `add` or `del`) and replays
/// them into cumulative snapshots, one per `granularity`-wide bucket from the
/// first event's bucket to the last one's. Empty buckets repeat the previous
/// snapshot. Edges are unweighted and undirected; every snapshot shares the
/// same vertex count (max id over the whole stream + 1).
inline SnapshotSeries load_snapshots(std::istream& in, std::int64_t granularity,
                                     const std::string& comment_prefix = "#") {
  if (granularity <= 0) throw InvalidArgument("granularity must be positive");
  struct Event {
    std::int64_t t;
    bool add;
    vertex_t u, v;
  };
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t max_id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || detail::is_comment(body, comment_prefix)) continue;
    const auto f = detail::split_fields(body, std::nullopt);
    if (f.size() != 4) throw ParseError(line_no, "expected 'timestamp op src dst'");
    auto t = detail::parse_number<std::int64_t>(f[0]);
    if (!t) throw ParseError(line_no, "timestamp '" + std::string(f[0]) + "' is not an integer");
    bool add;
    if (f[1] == "add") {
      add = true;
    } else if (f[1] == "del") {
      add = false;
    } else {
      throw ParseError(line_no, "unknown op '" + std::string(f[1]) + "'");
    }
    if (!events.empty() && *t < events.back().t) throw ParseError(line_no, "timestamps not sorted");
    const auto u = detail::parse_vertex(f[2], line_no);
    const auto v = detail::parse_vertex(f[3], line_no);
    max_id = std::max({max_id, u, v});
    events.push_back({*t, add, static_cast<vertex_t>(std::min(u, v)), static_cast<vertex_t>(std::max(u, v))});
  }
  if (events.empty()) throw InvalidArgument("event stream contains no events");

  const std::size_t n = max_id + 1;
  SnapshotSeries series;
  std::set<std::pair<vertex_t, vertex_t>> live;
  std::size_t added = 0, removed = 0;
  auto emit = [&](std::int64_t bucket) {
    std::vector<Edge> edges;
    edges.reserve(live.size());
    for (auto [u, v] : live) edges.push_back({u, v, 1.0});
    series.graphs.push_back(Graph::from_edges(n, edges));
    series.timestamps.push_back((bucket + 1) * granularity - 1);
    series.added.push_back(added);
    series.removed.push_back(removed);
  };

  std::int64_t bucket = detail::floor_div(events.front().t, granularity);
  for (const auto& e : events) {
    const auto b = detail::floor_div(e.t, granularity);
    while (bucket < b) emit(bucket++);
    if (e.u == e.v) continue;
    const std::pair key{e.u, e.v};
    if (e.add) {
      if (live.insert(key).second) ++added;
    } else if (live.erase(key)) {
      ++removed;
    } else {
      ++series.ignored_deletions;
    }
  }
  emit(bucket);
  return series;
}

}  // namespace slaq
