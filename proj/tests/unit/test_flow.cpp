#include <gtest/gtest.h>

#include "depthrefine/flow.hpp"
#include "depthrefine/synth.hpp"

using namespace depthrefine;

TEST(Displace, ZeroFlow) {
  const FlowField F(8, 6);
  EXPECT_EQ(displace({3, 4}, F), (Pixel{3, 4}));
  EXPECT_EQ(displace({2.5, 1.25}, F), (Pixel{2.5, 1.25}));
}

TEST(Displace, IntegralReadsGridPoint) {
  FlowField F(20, 20);
  F(10, 10) = {3, 4};
  F(11, 10) = {100, 100};
  EXPECT_EQ(displace({10, 10}, F), (Pixel{13, 14}));
}

TEST(Displace, OutOfBounds) {
  const FlowField F(8, 6);
  EXPECT_THROW(displace({-0.5, 0}, F), DomainError);
  EXPECT_THROW(displace({0, 5.5}, F), DomainError);
  EXPECT_THROW(displace({8, 0}, F), DomainError);
}

TEST(SampleBilinear, GridPointMidpointConstant) {
  Grid<double> g(4, 3, 0.0);
  g(1, 1) = 2.0;
  g(2, 1) = 4.0;
  auto s = sample_bilinear(g, {1, 1});
  ASSERT_TRUE(s.ok);
  EXPECT_EQ(s.value, 2.0);
  s = sample_bilinear(g, {1.5, 1});
  ASSERT_TRUE(s.ok);
  EXPECT_EQ(s.value, 3.0);

  const Grid<double> c(5, 5, 7.25);
  for (double u = 0; u <= 4; u += 0.37) {
    for (double v = 0; v <= 4; v += 0.41) {
      const auto r = sample_bilinear(c, {u, v});
      ASSERT_TRUE(r.ok);
      EXPECT_EQ(r.value, 7.25);
    }
  }
}

TEST(SampleBilinear, ExactForAffineFields) {
  Grid<double> g(9, 7);
  for (int v = 0; v < 7; ++v) {
    for (int u = 0; u < 9; ++u) g(u, v) = 0.3 * u - 1.7 * v + 4.0;
  }
  for (double u = 0; u <= 8; u += 0.29) {
    for (double v = 0; v <= 6; v += 0.33) {
      const auto r = sample_bilinear(g, {u, v});
      ASSERT_TRUE(r.ok);
      EXPECT_NEAR(r.value, 0.3 * u - 1.7 * v + 4.0, 1e-9);
    }
  }
}

TEST(SampleBilinear, OutOfBoundsAndInvalidTaps) {
  DepthMap d(4, 4, 1.0);
  EXPECT_FALSE(sample_bilinear(d, {-0.1, 1}).ok);
  EXPECT_FALSE(sample_bilinear(d, {3.01, 1}).ok);
  EXPECT_TRUE(sample_bilinear(d, {3, 3}).ok);
  d(2, 2) = 0.0;
  EXPECT_FALSE(sample_bilinear(d, {1.5, 1.5}).ok);
  EXPECT_TRUE(sample_bilinear(d, {1, 1}).ok);
  // Zero-weight taps are not consulted.
  EXPECT_TRUE(sample_bilinear(d, {1.5, 1.0}).ok);
}

TEST(ConsistencyMask, ThresholdCases) {
  FlowField fwd(10, 1), bwd(10, 1);
  fwd(0, 0) = {5, 0};
  bwd(5, 0) = {-5, 0};
  fwd(1, 0) = {5, 0};
  bwd(6, 0) = {-3, 0};
  fwd(2, 0) = {5, 0};
  bwd(7, 0) = {-4, 0};  // error exactly 1 px, kept
  fwd(3, 0) = {20, 0};  // lands outside
  const ValidityMask m = consistency_mask(fwd, bwd);
  EXPECT_EQ(m(0, 0), 1);
  EXPECT_EQ(m(1, 0), 0);
  EXPECT_EQ(m(2, 0), 1);
  EXPECT_EQ(m(3, 0), 0);
  EXPECT_EQ(consistency_mask(fwd, bwd, 0.5)(2, 0), 0);
  EXPECT_DOUBLE_EQ(kFlowConsistencyThreshold, 1.0);
  EXPECT_THROW(consistency_mask(fwd, FlowField(9, 1)), DomainError);
}

TEST(Intersect, Laws) {
  ValidityMask a(3, 2, 0), b(3, 2, 0);
  a[0] = a[2] = a[5] = 1;
  b[1] = b[2] = b[4] = 1;
  EXPECT_EQ(intersect(a, ValidityMask(3, 2, 1)), a);
  EXPECT_EQ(intersect(a, ValidityMask(3, 2, 0)), ValidityMask(3, 2, 0));
  EXPECT_EQ(intersect(a, b), intersect(b, a));
  EXPECT_EQ(count_valid(intersect(a, b)), 1u);
  EXPECT_THROW(intersect(a, ValidityMask(2, 3)), DomainError);
}

TEST(SyntheticFlow, DisplaceMatchesReprojection) {
  const SceneSpec spec = SceneSpec::desk("mixed", 1);
  const ViewId src{1, View::Left}, tgt{3, View::Left};
  const ExactFlow f = exact_flow(spec, src, tgt);
  const DepthMap depth = render_depth(spec, src);
  const RigidTransform Q = relative_pose(spec.pose(src), spec.pose(tgt));
  const CameraIntrinsics& K = spec.rig.intrinsics;
  std::size_t checked = 0;
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      if (!f.mask(u, v)) continue;
      const Pixel x{double(u), double(v)};
      const Pixel p = project(K, transform_point(Q, lift(x, depth(u, v), K)));
      const Pixel d = displace(x, f.forward);
      EXPECT_NEAR(d.u, p.u, 1e-6);
      EXPECT_NEAR(d.v, p.v, 1e-6);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(SyntheticFlow, OcclusionFreeSceneMostlyValid) {
  SceneSpec spec = SceneSpec::desk("planes", 0);
  spec.primitives = {Primitive{FrontoPlane{12.0}, Texture{}}};
  const ExactFlow f = exact_flow(spec, {0, View::Left}, {1, View::Left});
  const ValidityMask m = consistency_mask(f.forward, f.backward);
  std::size_t in_bounds = 0, valid = 0;
  for (int v = 0; v < m.height(); ++v) {
    for (int u = 0; u < m.width(); ++u) {
      const Pixel p{u + f.forward(u, v).du, v + f.forward(u, v).dv};
      if (!bilinear_stencil(m.width(), m.height(), p)) continue;
      ++in_bounds;
      valid += m(u, v);
    }
  }
  ASSERT_GT(in_bounds, 1000u);
  EXPECT_GE(static_cast<double>(valid), 0.99 * in_bounds);
}

TEST(SyntheticFlow, MaskAgreesWithCovisibility) {
  for (const auto& preset : SceneSpec::presets()) {
    const SceneSpec spec = SceneSpec::desk(preset, 0);
    for (const auto& [src, tgt] : {std::pair{ViewId{0, View::Left}, ViewId{0, View::Right}},
                                   std::pair{ViewId{1, View::Left}, ViewId{2, View::Left}}}) {
      const ExactFlow f = exact_flow(spec, src, tgt);
      const ValidityMask m = consistency_mask(f.forward, f.backward);
      std::size_t agree = 0;
      for (std::size_t i = 0; i < m.size(); ++i) agree += (m[i] != 0) == (f.mask[i] != 0);
      EXPECT_GE(static_cast<double>(agree), 0.99 * m.size()) << preset;
    }
  }
}

TEST(SyntheticFlow, MaskSymmetricOnCovisibleRegion) {
  const SceneSpec spec = SceneSpec::desk("mixed", 2);
  const ExactFlow ab = exact_flow(spec, {1, View::Left}, {2, View::Left});
  const ExactFlow ba = exact_flow(spec, {2, View::Left}, {1, View::Left});
  const ValidityMask fwd = consistency_mask(ab.forward, ab.backward);
  const ValidityMask bwd = consistency_mask(ba.forward, ba.backward);
  std::size_t checked = 0, agree = 0;
  for (int v = 0; v < fwd.height(); ++v) {
    for (int u = 0; u < fwd.width(); ++u) {
      if (!ab.mask(u, v)) continue;
      const Pixel p = displace({double(u), double(v)}, ab.forward);
      const int pu = static_cast<int>(std::lround(p.u));
      const int pv = static_cast<int>(std::lround(p.v));
      if (!fwd.contains(pu, pv) || !ba.mask(pu, pv)) continue;
      ++checked;
      agree += fwd(u, v) == bwd(pu, pv);
    }
  }
  ASSERT_GT(checked, 1000u);
  EXPECT_GE(static_cast<double>(agree), 0.99 * checked);
}

TEST(SyntheticFlow, IdentityPoseGivesZeroFlow) {
  const SceneSpec spec = SceneSpec::desk("sphere", 0);
  const ExactFlow f = exact_flow(spec, {2, View::Left}, {2, View::Left});
  for (const auto& fv : f.forward.values()) {
    EXPECT_NEAR(fv.du, 0.0, 1e-9);
    EXPECT_NEAR(fv.dv, 0.0, 1e-9);
  }
}
