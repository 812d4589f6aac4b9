#include "cogniplay/features.hpp"

#include <algorithm>
#include <fstream>

namespace cogniplay {
namespace {

std::string exact_key(std::span<const Constraint> constraints) {
  std::string key;
  for (const auto& c : constraints) {
    key += std::to_string(c.dx);
    key += ',';
    key += std::to_string(c.dy);
    key += relation_letter(c.req);
    key += ';';
  }
  return key;
}

void set_slot(Pattern& p, int slot, std::uint64_t code) {
  if (slot < 32) {
    p.lo |= code << (2 * slot);
  } else {
    p.hi |= code << (2 * (slot - 32));
  }
}

}  // namespace

char relation_letter(Relation r) {
  switch (r) {
    case Relation::Friend:
      return 'F';
    case Relation::Foe:
      return 'O';
    case Relation::Empty:
      return 'E';
    case Relation::OffBoard:
      return 'X';
  }
  return '?';
}

Relation relation_from_letter(char c) {
  switch (c) {
    case 'F':
      return Relation::Friend;
    case 'O':
      return Relation::Foe;
    case 'E':
      return Relation::Empty;
    case 'X':
      return Relation::OffBoard;
    default:
      throw Error("bad-checkpoint", std::string("unknown relation letter ") + c);
  }
}

std::string orbit_key(std::span<const Constraint> constraints) {
  std::string best;
  bool first = true;
  std::vector<Constraint> image(constraints.begin(), constraints.end());
  for (const auto& sym : dihedral_group()) {
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto [x, y] = sym.map(constraints[i].dx, constraints[i].dy);
      image[i] = Constraint{x, y, constraints[i].req};
    }
    std::sort(image.begin(), image.end());
    std::string key = exact_key(image);
    if (first || key < best) {
      best = std::move(key);
      first = false;
    }
  }
  return best;
}

FeatureSet::FeatureSet(int radius, int max_features)
    : radius_(radius), max_features_(max_features) {
  if (radius < 1 || radius > kMaxRadius) throw Error("invalid-radius", std::to_string(radius));
  if (max_features < 1) throw Error("invalid-capacity", std::to_string(max_features));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx != 0 || dy != 0) offsets_.push_back({dx, dy});
    }
  }
}

FeatureSet FeatureSet::atomic(int radius, int max_features) {
  FeatureSet fs(radius, max_features);
  fs.add_feature(Feature{});
  for (const auto& [dx, dy] : fs.offsets_) {
    for (Relation req : {Relation::Friend, Relation::Foe, Relation::Empty}) {
      if (fs.full()) return fs;
      fs.add_feature(Feature{{Constraint{dx, dy, req}}, 0.0, 0, std::nullopt});
    }
  }
  return fs;
}

bool FeatureSet::all_weights_zero() const noexcept {
  return std::all_of(features_.begin(), features_.end(),
                     [](const Feature& f) { return f.weight == 0.0; });
}

int FeatureSet::slot(int dx, int dy) const noexcept {
  // Row-major over the (2R+1)^2 square with the anchor removed.
  const int width = 2 * radius_ + 1;
  const int raw = (dy + radius_) * width + (dx + radius_);
  const int centre = radius_ * width + radius_;
  return raw < centre ? raw : raw - 1;
}

int FeatureSet::add_feature(Feature f) {
  const int id = size();
  for (const auto& sym : dihedral_group()) {
    Variant v;
    for (const auto& c : f.constraints) {
      const auto [x, y] = sym.map(c.dx, c.dy);
      const int s = slot(x, y);
      set_slot(v.mask, s, 3);
      set_slot(v.value, s, static_cast<std::uint64_t>(c.req));
    }
    const auto begin = variants_.begin() + variant_begin_.back();
    const bool seen = std::any_of(begin, variants_.end(), [&](const Variant& o) {
      return o.mask == v.mask && o.value == v.value;
    });
    if (!seen) variants_.push_back(v);
  }
  variant_begin_.push_back(static_cast<std::uint32_t>(variants_.size()));
  exact_keys_.insert(exact_key(f.constraints));
  if (f.constraints.size() > 1) orbit_keys_.insert(orbit_key(f.constraints));
  features_.push_back(std::move(f));
  return id;
}

std::optional<int> FeatureSet::insert(std::vector<Constraint> constraints, int generation,
                                      std::optional<std::pair<int, int>> parents) {
  if (full() || constraints.empty()) return std::nullopt;
  std::sort(constraints.begin(), constraints.end());
  constraints.erase(std::unique(constraints.begin(), constraints.end()), constraints.end());
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    if (c.dx == 0 && c.dy == 0) return std::nullopt;
    if (std::max(std::abs(c.dx), std::abs(c.dy)) > radius_) return std::nullopt;
    if (i > 0 && constraints[i - 1].dx == c.dx && constraints[i - 1].dy == c.dy) {
      return std::nullopt;  // conflicting requirements on one offset
    }
  }
  if (exact_keys_.contains(exact_key(constraints))) return std::nullopt;
  if (constraints.size() > 1 && orbit_keys_.contains(orbit_key(constraints))) return std::nullopt;
  return add_feature(Feature{std::move(constraints), 0.0, generation, parents});
}

bool FeatureSet::contains(std::span<const Constraint> constraints) const {
  std::vector<Constraint> sorted(constraints.begin(), constraints.end());
  std::sort(sorted.begin(), sorted.end());
  return exact_keys_.contains(exact_key(sorted));
}

Pattern FeatureSet::pattern(const GameState& state, Action anchor) const {
  return pattern(state.spec(), state.cells(), anchor.index(state.spec().columns),
                 stone_of(state.to_move()));
}

Pattern FeatureSet::pattern(const GameSpec& spec, std::span<const Cell> cells, int index,
                            Cell friendly) const {
  Pattern p;
  const int col = index % spec.columns;
  const int row = index / spec.columns;
  int s = 0;
  for (const auto& [dx, dy] : offsets_) {
    const int c = col + dx;
    const int r = row + dy;
    std::uint64_t code;
    if (c < 0 || r < 0 || c >= spec.columns || r >= spec.rows) {
      code = static_cast<std::uint64_t>(Relation::OffBoard);
    } else {
      const Cell cell = cells[static_cast<std::size_t>(r * spec.columns + c)];
      code = cell == Cell::Empty  ? static_cast<std::uint64_t>(Relation::Empty)
             : cell == friendly ? static_cast<std::uint64_t>(Relation::Friend)
                                : static_cast<std::uint64_t>(Relation::Foe);
    }
    set_slot(p, s++, code);
  }
  return p;
}

bool FeatureSet::active(int id, Pattern p) const noexcept {
  const auto begin = variant_begin_[static_cast<std::size_t>(id)];
  const auto end = variant_begin_[static_cast<std::size_t>(id) + 1];
  for (auto v = begin; v < end; ++v) {
    const Variant& var = variants_[v];
    if ((p.lo & var.mask.lo) == var.value.lo && (p.hi & var.mask.hi) == var.value.hi) return true;
  }
  return false;
}

Relation FeatureSet::relation_at(Pattern p, int dx, int dy) const noexcept {
  const int s = slot(dx, dy);
  const std::uint64_t word = s < 32 ? p.lo : p.hi;
  return static_cast<Relation>((word >> (2 * (s % 32))) & 3);
}

std::optional<std::vector<Constraint>> FeatureSet::matched_image(int id, Pattern p) const {
  const Feature& f = (*this)[id];
  for (const auto& sym : dihedral_group()) {
    std::vector<Constraint> image;
    image.reserve(f.constraints.size());
    bool ok = true;
    for (const auto& c : f.constraints) {
      const auto [x, y] = sym.map(c.dx, c.dy);
      if (relation_at(p, x, y) != c.req) {
        ok = false;
        break;
      }
      image.push_back(Constraint{x, y, c.req});
    }
    if (ok) return image;
  }
  return std::nullopt;
}

double FeatureSet::score(Pattern p) const noexcept {
  double total = 0.0;
  const int n = size();
  for (int id = 0; id < n; ++id) {
    const double w = features_[static_cast<std::size_t>(id)].weight;
    if (w != 0.0 && active(id, p)) total += w;
  }
  return total;
}

void FeatureSet::active_ids(Pattern p, std::vector<int>& out) const {
  out.clear();
  const int n = size();
  for (int id = 0; id < n; ++id) {
    if (active(id, p)) out.push_back(id);
  }
}

std::vector<int> active_features(const FeatureSet& fs, const GameState& state, Action a) {
  std::vector<int> ids;
  fs.active_ids(fs.pattern(state, a), ids);
  return ids;
}

nlohmann::json feature_set_to_json(const FeatureSet& fs) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : fs.features()) {
    nlohmann::json constraints = nlohmann::json::array();
    for (const auto& c : f.constraints) {
      constraints.push_back({c.dx, c.dy, std::string(1, relation_letter(c.req))});
    }
    nlohmann::json entry{{"constraints", constraints},
                         {"weight", f.weight},
                         {"generation", f.generation}};
    if (f.parents) entry["parents"] = {f.parents->first, f.parents->second};
    features.push_back(std::move(entry));
  }
  return nlohmann::json{
      {"radius", fs.radius()}, {"max_features", fs.max_features()}, {"features", features}};
}

FeatureSet feature_set_from_json(const nlohmann::json& j) {
  FeatureSet fs(j.at("radius").get<int>(), j.value("max_features", 2000));
  bool first = true;
  for (const auto& entry : j.at("features")) {
    std::vector<Constraint> constraints;
    for (const auto& c : entry.at("constraints")) {
      const auto letter = c.at(2).get<std::string>();
      if (letter.size() != 1) throw Error("bad-checkpoint", "relation must be one letter");
      constraints.push_back(
          Constraint{c.at(0).get<int>(), c.at(1).get<int>(), relation_from_letter(letter[0])});
    }
    std::optional<std::pair<int, int>> parents;
    if (entry.contains("parents")) {
      parents = std::pair{entry["parents"].at(0).get<int>(), entry["parents"].at(1).get<int>()};
    }
    const int generation = entry.value("generation", 0);
    int id;
    if (constraints.empty()) {
      if (!first) throw Error("bad-checkpoint", "bias feature must come first");
      id = fs.add_feature(Feature{});
    } else if (constraints.size() == 1) {
      // Atomic features may be symmetric images of each other.
      if (fs.contains(constraints)) throw Error("bad-checkpoint", "duplicate feature");
      id = fs.add_feature(Feature{constraints, 0.0, generation, parents});
    } else {
      auto inserted = fs.insert(constraints, generation, parents);
      if (!inserted) throw Error("bad-checkpoint", "invalid or duplicate feature");
      id = *inserted;
    }
    fs.set_weight(id, entry.at("weight").get<double>());
    first = false;
  }
  return fs;
}

void save_feature_set(const FeatureSet& fs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot write " + path.string());
  out << feature_set_to_json(fs).dump(1) << '\n';
}

FeatureSet load_feature_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot read " + path.string());
  return feature_set_from_json(nlohmann::json::parse(in));
}

}  // namespace cogniplay
