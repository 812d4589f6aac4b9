#include "cogniplay/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cogniplay {
namespace {

constexpr int kDefaultPlayoutPlies = 60;

// Mutable scratch board for playouts on freestyle boards. Scores per empty
// cell are cached for both sides and refreshed only around new stones.
class Rollout {
 public:
  Rollout(const GameState& state, const FeatureSet& fs)
      : spec_(state.spec()),
        fs_(fs),
        cells_(state.cells().begin(), state.cells().end()),
        to_move_(state.to_move()),
        trivial_(fs.all_weights_zero()) {
    empties_.reserve(cells_.size());
    for (int i = 0; i < static_cast<int>(cells_.size()); ++i) {
      if (cells_[static_cast<std::size_t>(i)] == Cell::Empty) empties_.push_back(i);
    }
    if (!trivial_) {
      for (auto& s : scores_) s.assign(cells_.size(), 0.0);
      for (auto& d : dirty_) d.assign(cells_.size(), 1);
    }
  }

  int run(double epsilon, int cap, Rng& rng) {
    const Player start = to_move_;
    std::vector<double> buffer;
    for (int ply = 0; ply < cap; ++ply) {
      const std::size_t n = empties_.size();
      std::size_t pick;
      if (uniform01(rng) < epsilon) {
        pick = uniform_index(rng, n);
      } else if (trivial_) {
        pick = uniform_index(rng, n);
      } else {
        refresh(to_move_);
        const auto& scores = scores_[side(to_move_)];
        buffer.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          buffer[i] = scores[static_cast<std::size_t>(empties_[i])];
        }
        pick = sample_softmax(buffer, rng);
      }
      const int idx = empties_[pick];
      const Cell stone = stone_of(to_move_);
      cells_[static_cast<std::size_t>(idx)] = stone;
      empties_.erase(empties_.begin() + static_cast<std::ptrdiff_t>(pick));
      if (completes_line(spec_, cells_, idx, stone)) return to_move_ == start ? 1 : -1;
      if (empties_.empty()) return 0;
      if (!trivial_) mark_dirty(idx);
      to_move_ = opponent(to_move_);
    }
    return 0;
  }

 private:
  static std::size_t side(Player p) { return p == Player::P1 ? 0 : 1; }

  void refresh(Player p) {
    auto& scores = scores_[side(p)];
    auto& dirty = dirty_[side(p)];
    const Cell friendly = stone_of(p);
    for (int idx : empties_) {
      const auto i = static_cast<std::size_t>(idx);
      if (!dirty[i]) continue;
      scores[i] = fs_.score(fs_.pattern(spec_, cells_, idx, friendly));
      dirty[i] = 0;
    }
  }

  void mark_dirty(int idx) {
    const int r = fs_.radius();
    const int col = idx % spec_.columns;
    const int row = idx / spec_.columns;
    for (int y = std::max(0, row - r); y <= std::min(spec_.rows - 1, row + r); ++y) {
      for (int x = std::max(0, col - r); x <= std::min(spec_.columns - 1, col + r); ++x) {
        const auto j = static_cast<std::size_t>(y * spec_.columns + x);
        dirty_[0][j] = 1;
        dirty_[1][j] = 1;
      }
    }
  }

  const GameSpec& spec_;
  const FeatureSet& fs_;
  std::vector<Cell> cells_;
  Player to_move_;
  bool trivial_;
  std::vector<int> empties_;  // row-major, matches legal_actions()
  std::array<std::vector<double>, 2> scores_;
  std::array<std::vector<char>, 2> dirty_;
};

}  // namespace

void SearchConfig::validate() const {
  if (iterations < 1) throw Error("invalid-config", "iterations must be at least 1");
  if (node_cap < 2) throw Error("invalid-config", "node cap must be at least 2");
  if (depth_cap && *depth_cap < 1) throw Error("invalid-config", "depth cap must be at least 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("invalid-config", "epsilon must lie in [0, 1]");
  if (!(c_puct >= 0.0)) throw Error("invalid-config", "c_puct must be non-negative");
  if (playout_cap && *playout_cap < 0) throw Error("invalid-config", "playout cap must be >= 0");
  if (time_limit_ms < 0.0) throw Error("invalid-config", "time limit must be >= 0");
}

int SearchConfig::playout_plies(const GameSpec& spec) const {
  return playout_cap ? *playout_cap : std::min(spec.cells(), kDefaultPlayoutPlies);
}

SearchConfig SearchConfig::vanilla() {
  SearchConfig cfg;
  cfg.node_cap = 1'000'000;
  cfg.depth_cap.reset();
  cfg.focus = false;
  return cfg;
}

SearchConfig SearchConfig::human() {
  SearchConfig cfg;
  cfg.node_cap = 2000;
  cfg.depth_cap = 5;
  cfg.focus = true;
  return cfg;
}

SearchConfig SearchConfig::preset(std::string_view name) {
  if (name == "vanilla") return vanilla();
  if (name == "human") return human();
  throw Error("unknown-preset", std::string(name));
}

nlohmann::json search_config_to_json(const SearchConfig& cfg) {
  nlohmann::json j{{"iterations", cfg.iterations},
                   {"node_cap", cfg.node_cap},
                   {"depth_cap", nullptr},
                   {"c_puct", cfg.c_puct},
                   {"epsilon", cfg.epsilon},
                   {"playout_cap", nullptr},
                   {"seed", cfg.seed},
                   {"focus", cfg.focus},
                   {"focus_root_only", cfg.focus_root_only},
                   {"time_limit_ms", cfg.time_limit_ms}};
  if (cfg.depth_cap) j["depth_cap"] = *cfg.depth_cap;
  if (cfg.playout_cap) j["playout_cap"] = *cfg.playout_cap;
  return j;
}

SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig base) {
  SearchConfig cfg = std::move(base);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.node_cap = j.value("node_cap", cfg.node_cap);
  if (j.contains("depth_cap")) {
    if (j["depth_cap"].is_null()) {
      cfg.depth_cap.reset();
    } else {
      cfg.depth_cap = j["depth_cap"].get<int>();
    }
  }
  cfg.c_puct = j.value("c_puct", cfg.c_puct);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  if (j.contains("playout_cap")) {
    if (j["playout_cap"].is_null()) {
      cfg.playout_cap.reset();
    } else {
      cfg.playout_cap = j["playout_cap"].get<int>();
    }
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.focus = j.value("focus", cfg.focus);
  cfg.focus_root_only = j.value("focus_root_only", cfg.focus_root_only);
  cfg.time_limit_ms = j.value("time_limit_ms", cfg.time_limit_ms);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// NodePool

NodePool::NodePool(int capacity) : capacity_(capacity) {
  if (capacity < 2) throw Error("invalid-config", "node cap must be at least 2");
}

void NodePool::clear() {
  nodes_.clear();
  free_.clear();
  live_ = 0;
  peak_live_ = 0;
  recycled_ = 0;
  root_ = oldest_ = newest_ = kNoNode;
}

NodeId NodePool::allocate() {
  if (full()) throw Error("pool-exhausted", "node pool at capacity");
  NodeId id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
    nodes_[static_cast<std::size_t>(id)] = Node{};
  } else {
    id = static_cast<NodeId>(nodes_.size());
    nodes_.emplace_back();
  }
  nodes_[static_cast<std::size_t>(id)].live = true;
  ++live_;
  peak_live_ = std::max(peak_live_, live_);
  if (live_ > capacity_) throw std::logic_error("node pool exceeded its capacity");
  return id;
}

void NodePool::set_root(NodeId id) {
  unlink(id);
  root_ = id;
}

void NodePool::unlink(NodeId id) {
  Node& n = (*this)[id];
  if (!n.in_recency_list) return;
  if (n.older != kNoNode) (*this)[n.older].newer = n.newer; else oldest_ = n.newer;
  if (n.newer != kNoNode) (*this)[n.newer].older = n.older; else newest_ = n.older;
  n.older = n.newer = kNoNode;
  n.in_recency_list = false;
}

void NodePool::touch(NodeId id, std::uint64_t stamp) {
  Node& n = (*this)[id];
  n.last_touch = stamp;
  if (id == root_) return;
  unlink(id);
  n.older = newest_;
  n.newer = kNoNode;
  if (newest_ != kNoNode) (*this)[newest_].newer = id; else oldest_ = id;
  newest_ = id;
  n.in_recency_list = true;
}

void NodePool::release(NodeId id) {
  unlink(id);
  Node& n = (*this)[id];
  n.live = false;
  n.candidates.clear();
  n.candidates.shrink_to_fit();
  n.children.clear();
  n.children.shrink_to_fit();
  free_.push_back(id);
  --live_;
}

NodeId NodePool::recycle(std::span<const NodeId> protect) {
  NodeId id = oldest_;
  while (id != kNoNode) {
    const Node& n = (*this)[id];
    const bool guarded = std::find(protect.begin(), protect.end(), id) != protect.end();
    if (!guarded && n.children.empty() && id != root_) break;
    id = n.newer;
  }
  if (id == kNoNode) throw Error("pool-exhausted", "no recyclable leaf");
  Node& victim = (*this)[id];
  if (victim.parent != kNoNode) {
    auto& edges = (*this)[victim.parent].children;
    edges.erase(std::remove_if(edges.begin(), edges.end(),
                               [id](const Edge& e) { return e.child == id; }),
                edges.end());
  }
  release(id);
  ++recycled_;
  return id;
}

// ---------------------------------------------------------------------------
// Searcher

Searcher::Searcher(SearchConfig cfg, PartitionParams partition)
    : cfg_(std::move(cfg)), partition_(partition), pool_(cfg_.node_cap) {
  cfg_.validate();
  partition_.validate();
}

void Searcher::open(NodeId id, const GameState& state, const FeatureSet& fs) {
  const PolicyDist dist = policy(fs, state);
  const bool focused = cfg_.focus && (!cfg_.focus_root_only || id == pool_.root());
  std::vector<Candidate> cands;
  if (focused) {
    const Partition part = partition(dist, partition_);
    double total = 0.0;
    for (const auto& a : part.good) total += dist.prob(a);
    for (const auto& a : part.good) {
      cands.push_back(Candidate{a.index(state.spec().columns), dist.prob(a) / total});
    }
  } else {
    cands.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
      cands.push_back(Candidate{dist.actions[i].index(state.spec().columns), dist.probs[i]});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.prior != b.prior ? a.prior > b.prior : a.action < b.action;
  });
  Node& node = pool_[id];
  node.candidates = std::move(cands);
  node.opened = true;
}

std::optional<Candidate> Searcher::next_candidate(const Node& node) const {
  if (node.children.size() >= node.candidates.size()) return std::nullopt;
  for (const auto& cand : node.candidates) {
    const auto it = std::lower_bound(
        node.children.begin(), node.children.end(), cand.action,
        [](const Edge& e, std::int32_t action) { return e.action < action; });
    if (it == node.children.end() || it->action != cand.action) return cand;
  }
  return std::nullopt;
}

NodeId Searcher::select_child(const Node& node) const {
  const double sqrt_parent = std::sqrt(static_cast<double>(node.visits));
  NodeId best = kNoNode;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& edge : node.children) {
    const Node& child = pool_[edge.child];
    // A known immediate win is always taken (the solver rule for wins).
    if (child.decisive) return edge.child;
    const double u = child.q() + cfg_.c_puct * child.prior * sqrt_parent /
                                     (1.0 + static_cast<double>(child.visits));
    if (u > best_score) {
      best_score = u;
      best = edge.child;
    }
  }
  return best;
}

void Searcher::touch_path(std::span<const NodeId> path) {
  for (auto it = path.rbegin(); it != path.rend(); ++it) pool_.touch(*it, ++stamp_);
}

NodeId Searcher::make_child(NodeId parent, const Candidate& cand, std::span<const NodeId> path,
                            SearchStats& stats) {
  if (pool_.full()) {
    try {
      pool_.recycle(path);
    } catch (const Error&) {
      return kNoNode;
    }
  }
  const NodeId id = pool_.allocate();
  Node& child = pool_[id];
  const Node& par = pool_[parent];
  child.parent = parent;
  child.action = cand.action;
  child.prior = cand.prior;
  child.depth = par.depth + 1;
  auto& edges = pool_[parent].children;
  const auto pos = std::lower_bound(edges.begin(), edges.end(), cand.action,
                                    [](const Edge& e, std::int32_t a) { return e.action < a; });
  edges.insert(pos, Edge{cand.action, id});
  pool_.touch(id, ++stamp_);
  ++stats.expanded;
  stats.max_depth_reached = std::max(stats.max_depth_reached, pool_[id].depth);
  if (on_allocate_) on_allocate_(pool_);
  return id;
}

SearchResult Searcher::run(const GameState& root_state, const FeatureSet& fs) {
  if (root_state.terminal()) throw Error("terminal-state");
  const auto t0 = std::chrono::steady_clock::now();
  const int columns = root_state.spec().columns;
  const int plies = cfg_.playout_plies(root_state.spec());

  pool_.clear();
  stamp_ = 0;
  Rng rng(cfg_.seed);
  SearchStats stats;

  const NodeId root = pool_.allocate();
  pool_.set_root(root);
  if (on_allocate_) on_allocate_(pool_);
  open(root, root_state, fs);

  std::vector<NodeId> path;
  for (int it = 0; it < cfg_.iterations; ++it) {
    if (cfg_.time_limit_ms > 0.0 && it > 0) {
      const std::chrono::duration<double, std::milli> spent = std::chrono::steady_clock::now() - t0;
      if (spent.count() >= cfg_.time_limit_ms) break;
    }
    path.assign(1, root);
    GameState state = root_state;
    NodeId node = root;
    while (!state.terminal()) {
      if (cfg_.depth_cap && pool_[node].depth >= *cfg_.depth_cap) break;
      if (!pool_[node].opened) open(node, state, fs);
      if (auto cand = next_candidate(pool_[node])) {
        touch_path(path);
        const NodeId child = make_child(node, *cand, path, stats);
        if (child == kNoNode) {
          ++stats.pool_exhausted;
          break;
        }
        state = state.apply(Action::from_index(cand->action, columns));
        pool_[child].decisive = state.terminal() && state.outcome().value_for(state.to_move()) < 0;
        path.push_back(child);
        break;
      }
      const NodeId child = select_child(pool_[node]);
      if (child == kNoNode) break;
      state = state.apply(Action::from_index(pool_[child].action, columns));
      node = child;
      path.push_back(child);
    }

    double v = state.terminal() ? state.outcome().value_for(state.to_move())
                                : playout(state, fs, cfg_.epsilon, plies, rng);
    for (auto p = path.rbegin(); p != path.rend(); ++p) {
      Node& n = pool_[*p];
      ++n.visits;
      n.value_sum -= v;
      v = -v;
      pool_.touch(*p, ++stamp_);
    }
    ++stats.iterations;
  }

  SearchResult result;
  const Node& r = pool_[root];
  const auto legal = root_state.legal_actions();
  std::vector<std::int32_t> good;
  for (const auto& c : r.candidates) good.push_back(c.action);
  std::sort(good.begin(), good.end());
  std::int64_t total = 0;
  for (std::int32_t a : good) {
    std::int64_t n = 0;
    for (const auto& e : r.children) {
      if (e.action == a) n = pool_[e.child].visits;
    }
    result.visits.emplace_back(Action::from_index(a, columns), n);
    total += n;
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < result.visits.size(); ++i) {
    if (result.visits[i].second > result.visits[best].second) best = i;
  }
  if (total == 0) {
    // Degenerate: no surviving root child. Fall back to the highest prior.
    result.chosen = Action::from_index(r.candidates.front().action, columns);
  } else {
    result.chosen = result.visits[best].first;
  }
  result.target.actions = legal;
  result.target.probs.assign(legal.size(), 0.0);
  for (const auto& [a, n] : result.visits) {
    const auto pos = std::lower_bound(legal.begin(), legal.end(), a) - legal.begin();
    result.target.probs[static_cast<std::size_t>(pos)] =
        total > 0 ? static_cast<double>(n) / static_cast<double>(total)
                  : (a == result.chosen ? 1.0 : 0.0);
  }
  result.root_value = r.visits > 0 ? -r.value_sum / static_cast<double>(r.visits) : 0.0;
  stats.recycled = pool_.recycled();
  stats.peak_live = pool_.peak_live();
  stats.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  result.stats = stats;
  return result;
}

SearchResult search(const GameState& state, const FeatureSet& fs, const SearchConfig& cfg,
                    const PartitionParams& partition) {
  Searcher searcher(cfg, partition);
  return searcher.run(state, fs);
}

int playout(const GameState& state, const FeatureSet& fs, double epsilon, int cap, Rng& rng) {
  if (state.terminal()) return state.outcome().value_for(state.to_move());
  if (state.spec().rules != RuleSet::Freestyle) {
    return playout_reference(state, fs, epsilon, cap, rng);
  }
  Rollout rollout(state, fs);
  return rollout.run(epsilon, cap, rng);
}

int playout_reference(const GameState& state, const FeatureSet& fs, double epsilon, int cap,
                      Rng& rng) {
  if (state.terminal()) return state.outcome().value_for(state.to_move());
  const Player start = state.to_move();
  GameState s = state;
  for (int ply = 0; ply < cap; ++ply) {
    const auto legal = s.legal_actions();
    if (legal.empty()) return 0;  // every empty point forbidden for Black
    std::size_t pick;
    if (uniform01(rng) < epsilon) {
      pick = uniform_index(rng, legal.size());
    } else {
      pick = sample_softmax(action_scores(fs, s, legal), rng);
    }
    s = s.apply(legal[pick]);
    if (s.terminal()) return s.outcome().value_for(start);
  }
  return 0;
}

}  // namespace cogniplay
