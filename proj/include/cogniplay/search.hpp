#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cogniplay/features.hpp"
#include "cogniplay/game.hpp"
#include "cogniplay/policy.hpp"
#include "cogniplay/rng.hpp"

namespace cogniplay {

struct SearchConfig {
  int iterations = 2000;           // B
  int node_cap = 1'000'000;        // C, hard bound on live nodes
  std::optional<int> depth_cap;    // D plies below the root; none = unbounded
  double c_puct = 1.5;
  double epsilon = 0.25;           // uniform-move probability in playouts
  std::optional<int> playout_cap;  // none = min(cells, 60)
  std::uint64_t seed = 0;
  bool focus = false;              // expand only System-1 good actions
  bool focus_root_only = false;    // ablation: apply focus at the root only
  double time_limit_ms = 0.0;      // soft wall-clock budget, 0 = off

  // Throws Error("invalid-config").
  void validate() const;
  int playout_plies(const GameSpec& spec) const;

  // C = 1e6, no depth cap, focus off.
  static SearchConfig vanilla();
  // C = 2000, D = 5, focus on.
  static SearchConfig human();
  // Throws Error("unknown-preset").
  static SearchConfig preset(std::string_view name);

  bool operator==(const SearchConfig&) const = default;
};

nlohmann::json search_config_to_json(const SearchConfig& cfg);
// Fields absent from `j` keep their value from `base`.
SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig base = {});

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct Edge {
  std::int32_t action;  // row-major cell index
  NodeId child;
};

struct Candidate {
  std::int32_t action;
  double prior;
};

struct Node {
  NodeId parent = kNoNode;
  std::int32_t action = -1;  // move from the parent, row-major index
  std::int32_t depth = 0;
  std::int64_t visits = 0;
  double value_sum = 0.0;  // for the player who moved into this node
  double prior = 0.0;
  std::uint64_t last_touch = 0;
  bool opened = false;
  bool decisive = false;  // terminal win for the player who moved into it
  // Actions this node may expand, in expansion order (prior desc, index asc),
  // priors renormalized over the set.
  std::vector<Candidate> candidates;
  std::vector<Edge> children;  // sorted by action

  NodeId older = kNoNode;
  NodeId newer = kNoNode;
  bool in_recency_list = false;
  bool live = false;

  double q() const noexcept { return visits > 0 ? value_sum / static_cast<double>(visits) : 0.0; }
};

// Arena of at most `capacity` live nodes. Non-root nodes sit on a recency
// list ordered by last touch; recycling reclaims the least recently touched
// leaf outside the protected set.
class NodePool {
 public:
  explicit NodePool(int capacity);

  int capacity() const noexcept { return capacity_; }
  int live() const noexcept { return live_; }
  int peak_live() const noexcept { return peak_live_; }
  bool full() const noexcept { return live_ >= capacity_; }
  std::int64_t recycled() const noexcept { return recycled_; }
  NodeId root() const noexcept { return root_; }

  Node& operator[](NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& operator[](NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }

  // Throws Error("pool-exhausted") when at capacity.
  NodeId allocate();
  void set_root(NodeId id);
  // Marks `id` as most recently used. The root is never listed.
  void touch(NodeId id, std::uint64_t stamp);

  // Frees the oldest-touched leaf that is not the root and not in `protect`,
  // deleting its parent's edge. Returns the freed id, which the next
  // allocate() hands out. Throws Error("pool-exhausted") if none qualifies.
  NodeId recycle(std::span<const NodeId> protect);

  // Least recently touched node still listed, kNoNode if none.
  NodeId oldest() const noexcept { return oldest_; }

  void clear();

 private:
  void unlink(NodeId id);
  void release(NodeId id);

  int capacity_;
  int live_ = 0;
  int peak_live_ = 0;
  std::int64_t recycled_ = 0;
  NodeId root_ = kNoNode;
  NodeId oldest_ = kNoNode;
  NodeId newest_ = kNoNode;
  std::vector<Node> nodes_;
  std::vector<NodeId> free_;
};

struct SearchStats {
  int iterations = 0;
  int expanded = 0;
  std::int64_t recycled = 0;
  int pool_exhausted = 0;  // iterations that could not expand
  int max_depth_reached = 0;
  int peak_live = 0;
  double elapsed_ms = 0.0;

  // Everything except timing.
  bool same_counts(const SearchStats& o) const noexcept {
    return iterations == o.iterations && expanded == o.expanded && recycled == o.recycled &&
           pool_exhausted == o.pool_exhausted && max_depth_reached == o.max_depth_reached &&
           peak_live == o.peak_live;
  }
};

struct SearchResult {
  Action chosen;
  // Root good set in row-major order; recycled root children count 0.
  std::vector<std::pair<Action, std::int64_t>> visits;
  double root_value = 0.0;  // for the side to move at the root
  // Over all legal root actions: visit-proportional inside the good set, 0 outside.
  PolicyDist target;
  SearchStats stats;

  // Bit-identical comparison of everything but wall-clock time.
  bool same_outcome(const SearchResult& o) const noexcept {
    return chosen == o.chosen && visits == o.visits && root_value == o.root_value &&
           target == o.target && stats.same_counts(o.stats);
  }
};

// Focused, memory-bounded MCTS. One instance is single-threaded and reuses
// its pool across calls.
class Searcher {
 public:
  explicit Searcher(SearchConfig cfg, PartitionParams partition = {});

  // Throws Error("terminal-state").
  SearchResult run(const GameState& root, const FeatureSet& fs);

  const SearchConfig& config() const noexcept { return cfg_; }
  const NodePool& pool() const noexcept { return pool_; }

  // Called after every node allocation.
  void set_allocation_observer(std::function<void(const NodePool&)> observer) {
    on_allocate_ = std::move(observer);
  }

 private:
  void open(NodeId id, const GameState& state, const FeatureSet& fs);
  std::optional<Candidate> next_candidate(const Node& node) const;
  NodeId select_child(const Node& node) const;
  NodeId make_child(NodeId parent, const Candidate& cand, std::span<const NodeId> path,
                    SearchStats& stats);
  void touch_path(std::span<const NodeId> path);

  SearchConfig cfg_;
  PartitionParams partition_;
  NodePool pool_;
  std::uint64_t stamp_ = 0;
  std::function<void(const NodePool&)> on_allocate_;
};

SearchResult search(const GameState& state, const FeatureSet& fs, const SearchConfig& cfg,
                    const PartitionParams& partition = {});

// Plays from `state` until terminal or `cap` plies: each ply is uniform with
// probability epsilon, otherwise drawn from the System-1 policy. Returns
// +1/0/-1 for the side to move in `state`; reaching the cap scores 0.
int playout(const GameState& state, const FeatureSet& fs, double epsilon, int cap, Rng& rng);

// GameState-based playout; same random stream consumption and result as
// playout() for freestyle boards. Kept as the reference implementation.
int playout_reference(const GameState& state, const FeatureSet& fs, double epsilon, int cap,
                      Rng& rng);

}  // namespace cogniplay
