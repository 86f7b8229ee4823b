#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "depthrefine/consistency_loss.hpp"
#include "depthrefine/edge_loss.hpp"
#include "depthrefine/flow.hpp"
#include "depthrefine/geometry.hpp"

namespace depthrefine {

// Test-time refinement of per-pixel depth. The optimized quantity is inverse
// depth per pixel per view, standing in for the weights of a depth network;
// the losses, masks and schedules are applied unchanged.

inline constexpr int kDefaultEpochs = 20;
inline constexpr double kStereoInitLearningRate = 4e-5;
inline constexpr double kMonocularInitLearningRate = 4e-4;

enum class FrameSampling { Consecutive, Hierarchical };

struct FramePair {
  PairKind kind = PairKind::Temporal;
  int source = 0;
  int target = 0;

  auto operator<=>(const FramePair&) const = default;
};

std::string describe(const FramePair& pair);

struct PairSets {
  std::vector<FramePair> left_right;
  std::vector<FramePair> temporal;
};

// Left-right pairs (i, i) for every timestamp, plus temporal pairs per the
// sampling mode: consecutive (i-1, i) or every power-of-two gap.
PairSets build_pair_sets(int frame_count, FrameSampling sampling);

struct PairFlows {
  FlowField forward;
  FlowField backward;
  // Optional externally supplied validity, intersected with the
  // forward-backward check.
  std::optional<ValidityMask> mask;
};

struct VideoBundle {
  StereoRig rig;
  std::vector<RigidTransform> trajectory;  // world-from-left-camera, one per frame
  std::vector<DepthMap> left_depth;        // initial estimates
  std::vector<DepthMap> right_depth;       // empty, or one per frame
  std::vector<Image> left_images;          // optional, for photometric evaluation
  std::vector<Image> right_images;
  std::map<FramePair, PairFlows> flows;

  int frame_count() const { return static_cast<int>(left_depth.size()); }
  bool has_right_depth() const { return !right_depth.empty(); }
  // Throws DomainError naming the first inconsistency found.
  void validate(const PairSets& pairs) const;
};

struct RefinerConfig {
  int epochs = kDefaultEpochs;
  double learning_rate = kStereoInitLearningRate;
  LossWeights weights;
  EdgeLossKind edge = EdgeLossKind::None;
  EdgeLossConfig edge_config;
  FrameSampling sampling = FrameSampling::Consecutive;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double min_depth = 0.1;
  double max_depth = 1000.0;
  double flow_threshold = kFlowConsistencyThreshold;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-timestamp inverse-depth grids (1/m). Pixels whose initial depth was
// invalid keep a 0 entry and are never evaluated or updated.
struct ParameterField {
  std::vector<Grid<double>> left;
  std::vector<Grid<double>> right;

  static ParameterField from_depths(const std::vector<DepthMap>& left, const std::vector<DepthMap>& right);
  std::vector<DepthMap> left_depths() const;
  std::vector<DepthMap> right_depths() const;
};

struct EpochLoss {
  double left_right = 0.0;
  double temporal = 0.0;
  double edge = 0.0;
  double total = 0.0;
};

struct TotalLossReport {
  GeometricLossReport geometric;
  std::vector<EdgeLossReport> edge_per_frame;
  double edge = 0.0;  // unweighted sum over frames
  double total = 0.0;

  EpochLoss summary() const { return {geometric.left_right, geometric.temporal, edge, total}; }
};

struct DepthGradient {
  std::vector<Grid<double>> left;   // dL/dD
  std::vector<Grid<double>> right;
};

class RefineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precomputed per-run state: pair sets, joint validity masks, transforms and
// the edge-loss anchor depths.
class RefinementProblem {
 public:
  RefinementProblem(const VideoBundle& bundle, const RefinerConfig& cfg);

  const PairSets& pairs() const { return pairs_; }
  const ValidityMask& joint_mask(const FramePair& pair) const { return masks_.at(pair); }
  const std::vector<DepthMap>& anchors() const { return bundle_.left_depth; }

  // L = L_geometric + w_edge * sum_i L_edge(D_i^0, D_i). When `grad` is given,
  // it receives dL/dD for every left and right pixel.
  TotalLossReport evaluate(const std::vector<DepthMap>& left, const std::vector<DepthMap>& right,
                           DepthGradient* grad) const;

 private:
  const VideoBundle& bundle_;
  RefinerConfig cfg_;
  PairSets pairs_;
  std::map<FramePair, ValidityMask> masks_;
  std::map<FramePair, RigidTransform> transforms_;
};

TotalLossReport total_loss(const ParameterField& params, const VideoBundle& bundle, const RefinerConfig& cfg);

struct RefineReport {
  std::vector<EpochLoss> history;  // loss before each epoch's update
  EpochLoss final_loss;            // after the last update
  std::vector<DepthMap> left_depth;
  std::vector<DepthMap> right_depth;
  double wall_seconds = 0.0;
};

RefineReport refine(const VideoBundle& bundle, const RefinerConfig& cfg);

struct GradientCheckOptions {
  int samples = 200;
  double relative_step = 1e-6;
  // Multiplicative log-normal jitter applied to the initial depths to obtain
  // the evaluation point, so edge losses are away from their minimum.
  double jitter = 0.05;
  // Samples whose one-sided differences disagree by more than this fraction
  // straddle a kink and are excluded. A kink that slips under it biases the
  // central difference by at most half this fraction.
  double kink_tolerance = 1e-4;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  int evaluated = 0;
  int excluded = 0;
  int zero_both = 0;  // both gradients below the central difference's round-off resolution
};

GradientCheckResult gradient_check(const VideoBundle& bundle, const RefinerConfig& cfg,
                                   const GradientCheckOptions& options = {});

}  // namespace depthrefine
