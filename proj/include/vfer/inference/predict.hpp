#pragma once

#include <cstddef>
#include <vector>

#include "vfer/core/numeric.hpp"
#include "vfer/dataio/annotation.hpp"
#include "vfer/dataio/frame_store.hpp"
#include "vfer/dataio/windows.hpp"
#include "vfer/models/model.hpp"

namespace vfer::inference {

// (T-1)/2. Throws ConfigError for even or zero T.
std::size_t middle_frame_index(std::size_t window);

// Per-frame probabilities for every frame of `ann`, in frame order.
// Temporal models: one edge-replicated window centred on each frame, keeping
// only the middle output. Static models: one forward per frame.
// Backbone features are computed once per frame and reused across windows;
// each frame's features do not depend on what it is batched with, so the
// result is identical to a full forward on each window.
std::vector<ProbVector> predict_video(models::ModelBundle& model, const dataio::VideoAnnotation& ann,
                                      dataio::FrameStore& frames, std::size_t window = dataio::kDefaultWindow);

// Same as above, starting from precomputed (1, n, D) features.
std::vector<ProbVector> predict_from_features(models::ModelBundle& model, const Tensor& features,
                                              std::size_t window = dataio::kDefaultWindow);

// (1, n, D) backbone features for all frames of a video, in chunks.
Tensor video_features(models::ModelBundle& model, const dataio::VideoAnnotation& ann, dataio::FrameStore& frames);

// Packs the listed frames of one video into a (1, k, 112, 112, 3) tensor.
Tensor load_frames(dataio::FrameStore& frames, const std::string& video_id, const std::vector<std::size_t>& indices);

}  // namespace vfer::inference
