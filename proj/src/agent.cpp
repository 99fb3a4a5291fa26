#include "shallowrl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "shallowrl/offsets.hpp"

namespace shallowrl {

namespace {
constexpr std::string_view kSnapshotMagic = "SAWTv001";
}

void Hyperparameters::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (!(trace_threshold >= 0.0 && trace_threshold < 1.0))
    throw std::invalid_argument("trace threshold must lie in [0, 1)");
}

LinearQ::LinearQ(int action_count, Hyperparameters hp) : action_count_(action_count), hp_(hp) {
  if (action_count < 1) throw std::invalid_argument("action count must be at least 1");
  hp_.validate();
  weights_.resize(action_count);
  traces_.resize(action_count);
  traced_.resize(action_count);
  if (hp_.bias) intern(FeatureFamilyLayout::kBiasId);
}

void LinearQ::set_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  hp_.epsilon = epsilon;
}

void LinearQ::check_action(int action) const {
  if (action < 0 || action >= action_count_)
    throw std::out_of_range("action " + std::to_string(action) + " outside [0, " + std::to_string(action_count_) + ")");
}

std::optional<std::uint32_t> LinearQ::slot_of(FeatureId id) const {
  auto it = slot_map_.find(id);
  if (it == slot_map_.end()) return std::nullopt;
  return it->second;
}

double LinearQ::weight(int action, std::uint32_t slot) const {
  check_action(action);
  return weights_[action].at(slot);
}

void LinearQ::set_weight(int action, std::uint32_t slot, double value) {
  check_action(action);
  weights_[action].at(slot) = value;
}

std::uint32_t LinearQ::intern(FeatureId id) {
  auto [it, inserted] = slot_map_.try_emplace(id, static_cast<std::uint32_t>(slot_ids_.size()));
  if (inserted) {
    slot_ids_.push_back(id);
    for (int a = 0; a < action_count_; ++a) {
      weights_[a].push_back(0.0);
      traces_[a].push_back(0.0);
    }
  }
  return it->second;
}

std::size_t LinearQ::active_count(const ActiveFeatureSet& features) const noexcept {
  return features.size() + (hp_.bias ? 1 : 0);
}

double LinearQ::q_value(const ActiveFeatureSet& features, int action) const {
  check_action(action);
  const auto& w = weights_[action];
  double sum = hp_.bias ? w[0] : 0.0;
  for (FeatureId id : features) {
    auto it = slot_map_.find(id);
    if (it != slot_map_.end()) sum += w[it->second];
  }
  return sum;
}

std::vector<double> LinearQ::q_values(const ActiveFeatureSet& features) const {
  std::vector<double> out(action_count_, 0.0);
  if (hp_.bias)
    for (int a = 0; a < action_count_; ++a) out[a] = weights_[a][0];
  for (FeatureId id : features) {
    auto it = slot_map_.find(id);
    if (it == slot_map_.end()) continue;
    for (int a = 0; a < action_count_; ++a) out[a] += weights_[a][it->second];
  }
  return out;
}

int LinearQ::select_action(const ActiveFeatureSet& features, Rng& rng) const {
  return select_action(q_values(features), rng);
}

int LinearQ::select_action(std::span<const double> values, Rng& rng) const {
  if (static_cast<int>(values.size()) != action_count_) throw std::invalid_argument("one value per action expected");
  if (uniform_unit(rng) < hp_.epsilon) return static_cast<int>(uniform_index(rng, action_count_));
  const double best = *std::max_element(values.begin(), values.end());
  int ties = 0;
  for (double v : values) ties += v == best;
  if (ties == 1) return static_cast<int>(std::find(values.begin(), values.end(), best) - values.begin());
  auto pick = uniform_index(rng, static_cast<std::uint64_t>(ties));
  for (int a = 0; a < action_count_; ++a) {
    if (values[a] == best && pick-- == 0) return a;
  }
  return 0;
}

void LinearQ::sarsa_update(const Transition& t) {
  check_action(t.action);
  if (!t.terminal) check_action(t.next_action);

  // e <- gamma * lambda * e, dropping traces that fall below the threshold.
  const double decay = hp_.gamma * hp_.lambda;
  for (int a = 0; a < action_count_; ++a) {
    auto& e = traces_[a];
    auto& live = traced_[a];
    std::size_t kept = 0;
    for (std::uint32_t slot : live) {
      double v = e[slot] * decay;
      if (v < hp_.trace_threshold || v == 0.0) {
        e[slot] = 0.0;
      } else {
        e[slot] = v;
        live[kept++] = slot;
      }
    }
    live.resize(kept);
  }

  // Replacing traces for the features of (s, a).
  scratch_slots_.clear();
  if (hp_.bias) scratch_slots_.push_back(0);
  for (FeatureId id : t.features) scratch_slots_.push_back(intern(id));
  auto& e = traces_[t.action];
  for (std::uint32_t slot : scratch_slots_) {
    if (e[slot] == 0.0) traced_[t.action].push_back(slot);
    e[slot] = 1.0;
  }

  double q_sa = 0.0;
  for (std::uint32_t slot : scratch_slots_) q_sa += weights_[t.action][slot];
  const double q_next = t.terminal ? 0.0 : q_value(t.next_features, t.next_action);
  const double delta = t.reward + hp_.gamma * q_next - q_sa;

  const double step = hp_.alpha / static_cast<double>(std::max<std::size_t>(1, scratch_slots_.size())) * delta;
  for (int a = 0; a < action_count_; ++a) {
    auto& w = weights_[a];
    const auto& ea = traces_[a];
    for (std::uint32_t slot : traced_[a]) w[slot] += step * ea[slot];
  }
}

void LinearQ::reset_traces() {
  for (int a = 0; a < action_count_; ++a) {
    for (std::uint32_t slot : traced_[a]) traces_[a][slot] = 0.0;
    traced_[a].clear();
  }
}

double LinearQ::trace(int action, std::uint32_t slot) const {
  check_action(action);
  return traces_[action].at(slot);
}

std::size_t LinearQ::trace_count() const noexcept {
  std::size_t n = 0;
  for (const auto& live : traced_) n += live.size();
  return n;
}

std::vector<std::uint8_t> LinearQ::save() const {
  detail::ByteWriter w;
  w.tag(kSnapshotMagic);
  w.u32(static_cast<std::uint32_t>(action_count_));
  w.u64(slot_ids_.size());
  w.f64(hp_.alpha);
  w.f64(hp_.gamma);
  w.f64(hp_.lambda);
  w.f64(hp_.epsilon);
  for (FeatureId id : slot_ids_) w.u64(id);
  for (const auto& row : weights_)
    for (double v : row) w.f64(v);
  return w.take();
}

LinearQ LinearQ::load(std::span<const std::uint8_t> snapshot) {
  detail::ByteReader r(snapshot);
  r.expect_tag(kSnapshotMagic, "snapshot magic");
  const std::size_t count_at = r.position();
  const auto actions = r.u32("action count");
  if (actions == 0 || actions > 1024) throw FormatError("implausible action count", count_at);
  const std::size_t slots_at = r.position();
  const auto slots = r.u64("slot count");
  Hyperparameters hp;
  hp.alpha = r.f64("alpha");
  hp.gamma = r.f64("gamma");
  hp.lambda = r.f64("lambda");
  hp.epsilon = r.f64("epsilon");
  // Slot table plus weights must fit in what is left.
  if (slots > r.remaining() / 8 / (1 + static_cast<std::uint64_t>(actions)))
    throw FormatError("slot count exceeds snapshot size", slots_at);

  std::vector<FeatureId> ids(slots);
  for (auto& id : ids) id = r.u64("slot id");
  hp.bias = !ids.empty() && ids.front() == FeatureFamilyLayout::kBiasId;
  try {
    hp.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid hyperparameters: ") + e.what(), count_at);
  }

  LinearQ q(static_cast<int>(actions), hp);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t at = r.position();
    if (q.intern(ids[i]) != i) throw FormatError("duplicate slot id", at);
  }
  for (std::uint32_t a = 0; a < actions; ++a)
    for (std::size_t i = 0; i < ids.size(); ++i) q.weights_[a][i] = r.f64("weight");
  r.expect_end();
  return q;
}

void LinearQ::save_file(const std::filesystem::path& path) const { detail::write_file(path, save()); }

LinearQ LinearQ::load_file(const std::filesystem::path& path) { return load(detail::read_file(path)); }

}  // namespace shallowrl
