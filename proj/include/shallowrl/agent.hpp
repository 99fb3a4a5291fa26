#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "shallowrl/features.hpp"

namespace shallowrl {

using Rng = std::mt19937_64;

/// Uniform draw in [0, n) that does not depend on the standard library's
/// distribution implementations.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) { return rng() % n; }
/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Hyperparameters {
  double alpha = 0.5;
  double gamma = 0.99;
  double lambda = 0.9;
  double epsilon = 0.01;
  /// Traces decayed below this are dropped.
  double trace_threshold = 1e-4;
  bool bias = true;

  void validate() const;
};

/// One on-policy step (s, a, r, s', a'). For terminal steps the successor
/// fields are ignored.
struct Transition {
  const ActiveFeatureSet& features;
  int action;
  double reward;
  const ActiveFeatureSet& next_features;
  int next_action;
  bool terminal;
};

/// Linear action values over sparse binary features, learned with Sarsa(lambda)
/// and replacing traces.
///
/// Feature ids are mapped to dense slots the first time they are learned from;
/// evaluation never creates slots. With the bias enabled, slot 0 holds the
/// reserved bias id and is active in every state.
class LinearQ {
 public:
  LinearQ(int action_count, Hyperparameters hp = {});

  int action_count() const noexcept { return action_count_; }
  const Hyperparameters& hyperparameters() const noexcept { return hp_; }
  void set_epsilon(double epsilon);

  std::size_t slot_count() const noexcept { return slot_ids_.size(); }
  std::optional<std::uint32_t> slot_of(FeatureId id) const;
  std::span<const FeatureId> slot_ids() const noexcept { return slot_ids_; }
  double weight(int action, std::uint32_t slot) const;
  void set_weight(int action, std::uint32_t slot, double value);
  /// Number of features counted as active for a state, bias included.
  std::size_t active_count(const ActiveFeatureSet& features) const noexcept;

  double q_value(const ActiveFeatureSet& features, int action) const;
  std::vector<double> q_values(const ActiveFeatureSet& features) const;

  /// Epsilon-greedy; greedy ties are broken uniformly at random.
  int select_action(const ActiveFeatureSet& features, Rng& rng) const;
  /// Same policy over precomputed action values.
  int select_action(std::span<const double> values, Rng& rng) const;

  void sarsa_update(const Transition& t);
  void reset_traces();

  double trace(int action, std::uint32_t slot) const;
  std::size_t trace_count() const noexcept;

  /// Assigns a slot to id, creating one if needed (learning path only).
  std::uint32_t intern(FeatureId id);

  std::vector<std::uint8_t> save() const;
  static LinearQ load(std::span<const std::uint8_t> snapshot);
  void save_file(const std::filesystem::path& path) const;
  static LinearQ load_file(const std::filesystem::path& path);

 private:
  void check_action(int action) const;

  int action_count_;
  Hyperparameters hp_;
  std::unordered_map<FeatureId, std::uint32_t> slot_map_;
  std::vector<FeatureId> slot_ids_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> traces_;
  std::vector<std::vector<std::uint32_t>> traced_;
  std::vector<std::uint32_t> scratch_slots_;
};

}  // namespace shallowrl
