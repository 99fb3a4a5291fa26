#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "shallowrl/features.hpp"

namespace shallowrl {

/// Block offsets span [-dc_max, dc_max] columns by [-dr_max, dr_max] rows.
struct OffsetRange {
  int dc_max;
  int dr_max;

  static OffsetRange for_geometry(const GridGeometry& g) { return {g.cols - 1, g.rows - 1}; }

  constexpr int width() const noexcept { return 2 * dc_max + 1; }
  constexpr int count() const noexcept { return (2 * dc_max + 1) * (2 * dr_max + 1); }
  constexpr int index(int dc, int dr) const noexcept { return (dr + dr_max) * width() + (dc + dc_max); }
  /// Id space of one pairwise family: 128^2 color pairs times every offset.
  constexpr FeatureId family_span() const noexcept { return FeatureId{128} * 128 * static_cast<FeatureId>(count()); }
};

/// Disjoint id ranges for every feature family, laid out back to back.
struct FeatureFamilyLayout {
  static constexpr FeatureId kBasicSpan = FeatureId{16} * 14 * 128;
  static constexpr FeatureId kBasicPairSpan = OffsetRange{15, 13}.family_span();
  static constexpr FeatureId kBlobSpan = FeatureId{40} * 30 * 128;
  static constexpr FeatureId kBlobPairSpan = OffsetRange{39, 29}.family_span();

  static constexpr FeatureId kBasicBase = 0;
  static constexpr FeatureId kBProsBase = kBasicBase + kBasicSpan;
  static constexpr FeatureId kBProtBase = kBProsBase + kBasicPairSpan;
  static constexpr FeatureId kBlobBase = kBProtBase + kBasicPairSpan;
  static constexpr FeatureId kBlobProsBase = kBlobBase + kBlobSpan;
  static constexpr FeatureId kBlobProtBase = kBlobProsBase + kBlobPairSpan;
  static constexpr FeatureId kEnd = kBlobProtBase + kBlobPairSpan;
  /// Reserved always-on feature used by the agent's bias term.
  static constexpr FeatureId kBiasId = kEnd;
};

enum class PairFamily { kSpatial, kTemporal };

struct OffsetFeature {
  int k1;
  int k2;
  int dc;
  int dr;
  PairFamily family = PairFamily::kSpatial;

  friend bool operator==(const OffsetFeature&, const OffsetFeature&) = default;
};

/// Picks the representative of {(k1,k2,dc,dr), (k2,k1,-dc,-dr)}: k1 < k2, or
/// for equal colors the offset with dr > 0, or dr == 0 and dc >= 0.
OffsetFeature canonicalize_pros(int k1, int k2, int dc, int dr);
bool is_canonical_pros(const OffsetFeature& f);

/// base + (k1 * 128 + k2) * |offsets| + offset index.
FeatureId pair_feature_id(const OffsetFeature& f, const OffsetRange& range, FeatureId base);
OffsetFeature decode_pair_feature(FeatureId id, const OffsetRange& range, FeatureId base, PairFamily family);

/// Pairwise relative offsets in space within one grid, canonicalized.
ActiveFeatureSet pros_features(const PresenceGrid& grid, const OffsetRange& range, FeatureId base);

/// Pairwise relative offsets in time: color k1 at block (c + dc, r + dr) in the
/// past grid and color k2 at block (c, r) in the current grid.
ActiveFeatureSet prot_features(const PresenceGrid& past, const PresenceGrid& current, const OffsetRange& range,
                               FeatureId base);

enum class FeatureSetKind { kBasic, kBPros, kBProst, kBlobProst };

FeatureSetKind parse_feature_set(std::string_view name);
std::string_view feature_set_name(FeatureSetKind kind);
/// Whether the feature set consumes background-subtracted frames.
bool uses_background(FeatureSetKind kind);

/// Number of distinct ids a feature set can emit.
std::uint64_t count_distinct_features(FeatureSetKind kind);
std::uint64_t count_distinct_features(std::string_view name);

}  // namespace shallowrl
