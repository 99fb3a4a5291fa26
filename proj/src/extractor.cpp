#include "shallowrl/extractor.hpp"

namespace shallowrl {

FeatureExtractor::FeatureExtractor(FeatureSetKind kind, std::optional<BackgroundModel> background,
                                   int blob_tolerance)
    : kind_(kind), background_(std::move(background)), detector_(blob_tolerance) {
  if (uses_background(kind_) && !background_)
    throw FeatureError(std::string(feature_set_name(kind_)) + " features need a background model");
}

ActiveFeatureSet FeatureExtractor::extract(const Frame& frame) {
  using L = FeatureFamilyLayout;
  if (kind_ == FeatureSetKind::kBlobProst) {
    last_blobs_ = detector_.detect(frame);
    const auto geometry = blob_geometry();
    const auto range = OffsetRange::for_geometry(geometry);
    PresenceGrid grid = blob_presence_grid(last_blobs_, geometry);
    ActiveFeatureSet out = basic_features(grid);
    out.append(pros_features(grid, range, L::kBlobProsBase));
    out.append(prot_features(past_ ? *past_ : grid, grid, range, L::kBlobProtBase));
    past_ = std::move(grid);
    return out;
  }

  const auto geometry = basic_geometry();
  const auto range = OffsetRange::for_geometry(geometry);
  PresenceGrid grid = build_presence_grid(subtract_background(frame, *background_), geometry);
  ActiveFeatureSet out = basic_features(grid);
  if (kind_ == FeatureSetKind::kBasic) return out;
  out.append(pros_features(grid, range, L::kBProsBase));
  if (kind_ == FeatureSetKind::kBProst) {
    out.append(prot_features(past_ ? *past_ : grid, grid, range, L::kBProtBase));
    past_ = std::move(grid);
  }
  return out;
}

}  // namespace shallowrl
