#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cogniplay/game.hpp"

namespace cogniplay {

// Largest supported neighbourhood radius; (2R+1)^2 - 1 offsets at 2 bits each
// must fit in a 128-bit pattern.
inline constexpr int kMaxRadius = 3;

struct Constraint {
  int dx = 0;
  int dy = 0;
  Relation req = Relation::Empty;

  auto operator<=>(const Constraint&) const = default;
};

struct Feature {
  // Sorted, unique offsets. Empty only for the bias feature.
  std::vector<Constraint> constraints;
  double weight = 0.0;
  int generation = 0;
  std::optional<std::pair<int, int>> parents;

  bool is_bias() const noexcept { return constraints.empty(); }
};

// Neighbourhood of an anchor cell packed as 2-bit Relation codes, one slot per
// offset in the radius (anchor excluded).
struct Pattern {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool operator==(const Pattern&) const = default;
};

// Exchanges Friend and Foe codes; Empty and OffBoard are unchanged.
constexpr Pattern swap_sides(Pattern p) noexcept {
  constexpr std::uint64_t kLowBits = 0x5555555555555555ULL;
  const std::uint64_t dlo = (p.lo ^ (p.lo >> 1)) & kLowBits;
  const std::uint64_t dhi = (p.hi ^ (p.hi >> 1)) & kLowBits;
  return Pattern{p.lo ^ (dlo | (dlo << 1)), p.hi ^ (dhi | (dhi << 1))};
}

char relation_letter(Relation r);
Relation relation_from_letter(char c);

// Canonical serialization of a constraint set; equal for sets that are images
// of each other under the 8 symmetries of the square.
std::string orbit_key(std::span<const Constraint> constraints);

// Spatial state-action features with learnable weights. A feature is active
// at an anchor when any of its 8 symmetric variants matches the neighbourhood.
class FeatureSet {
 public:
  FeatureSet(int radius, int max_features);

  // Bias plus one feature per (offset, Friend|Foe|Empty) inside the radius.
  static FeatureSet atomic(int radius, int max_features = 2000);

  int radius() const noexcept { return radius_; }
  int max_features() const noexcept { return max_features_; }
  int size() const noexcept { return static_cast<int>(features_.size()); }
  bool full() const noexcept { return size() >= max_features_; }

  const Feature& operator[](int id) const { return features_[static_cast<std::size_t>(id)]; }
  std::span<const Feature> features() const noexcept { return features_; }

  void set_weight(int id, double w) { features_[static_cast<std::size_t>(id)].weight = w; }
  void add_to_weight(int id, double delta) {
    features_[static_cast<std::size_t>(id)].weight += delta;
  }
  bool all_weights_zero() const noexcept;

  // Rejects (returns nullopt) sets with an offset outside the radius or at the
  // anchor, conflicting requirements on one offset, a duplicate under
  // symmetry, or when the set is full. Constraints are normalized first.
  std::optional<int> insert(std::vector<Constraint> constraints, int generation,
                            std::optional<std::pair<int, int>> parents = std::nullopt);

  bool contains(std::span<const Constraint> constraints) const;

  // Neighbourhood of `anchor` relative to the side to move.
  Pattern pattern(const GameState& state, Action anchor) const;
  // Neighbourhood of cell `index` with `friendly` stones coded as Friend.
  Pattern pattern(const GameSpec& spec, std::span<const Cell> cells, int index,
                  Cell friendly) const;

  bool active(int id, Pattern p) const noexcept;
  Relation relation_at(Pattern p, int dx, int dy) const noexcept;
  // Constraints of feature `id` mapped by the first symmetry (in
  // dihedral_group() order) under which they match `p`; nullopt if inactive.
  std::optional<std::vector<Constraint>> matched_image(int id, Pattern p) const;
  // Sum of weights of active features, accumulated in id order.
  double score(Pattern p) const noexcept;
  void active_ids(Pattern p, std::vector<int>& out) const;

 private:
  struct Variant {
    Pattern mask;
    Pattern value;
  };

  friend FeatureSet feature_set_from_json(const nlohmann::json& j);

  int slot(int dx, int dy) const noexcept;
  int add_feature(Feature f);

  int radius_;
  int max_features_;
  std::vector<Feature> features_;
  std::vector<std::array<int, 2>> offsets_;
  std::vector<Variant> variants_;
  // variants_[variant_begin_[i] .. variant_begin_[i+1]) belong to feature i.
  std::vector<std::uint32_t> variant_begin_{0};
  std::unordered_set<std::string> exact_keys_;
  std::unordered_set<std::string> orbit_keys_;
};

// Ids of the features active for `a` in `state`, ascending.
std::vector<int> active_features(const FeatureSet& fs, const GameState& state, Action a);

// Checkpoint: {"radius", "max_features", "features": [{"constraints":
// [[dx, dy, "F|O|E|X"]], "weight", "generation"}]} in id order.
nlohmann::json feature_set_to_json(const FeatureSet& fs);
FeatureSet feature_set_from_json(const nlohmann::json& j);
void save_feature_set(const FeatureSet& fs, const std::filesystem::path& path);
FeatureSet load_feature_set(const std::filesystem::path& path);

}  // namespace cogniplay
