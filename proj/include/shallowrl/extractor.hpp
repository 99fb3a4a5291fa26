#pragma once

#include <optional>
#include <vector>

#include "shallowrl/blobs.hpp"
#include "shallowrl/features.hpp"
#include "shallowrl/offsets.hpp"
#include "shallowrl/screen.hpp"

namespace shallowrl {

/// Turns the decision-level frame stream of one episode into feature sets.
///
/// Temporal families pair the current grid with the grid from the previous
/// call, which under a frame skip of x is the screen x frames in the past.
/// The first frame of an episode has no predecessor and is paired with itself.
class FeatureExtractor {
 public:
  FeatureExtractor(FeatureSetKind kind, std::optional<BackgroundModel> background,
                   int blob_tolerance = kDefaultBlobTolerance);

  FeatureSetKind kind() const noexcept { return kind_; }
  const std::optional<BackgroundModel>& background() const noexcept { return background_; }

  void begin_episode() { past_.reset(); }
  ActiveFeatureSet extract(const Frame& frame);

  /// Blobs found by the last extract() call (blob-prost only).
  const std::vector<Blob>& last_blobs() const noexcept { return last_blobs_; }

 private:
  FeatureSetKind kind_;
  std::optional<BackgroundModel> background_;
  BlobDetector detector_;
  std::optional<PresenceGrid> past_;
  std::vector<Blob> last_blobs_;
};

}  // namespace shallowrl
