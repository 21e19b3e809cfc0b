#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "laserpath/coarse_align.hpp"
#include "laserpath/error.hpp"
#include "laserpath/fpfh.hpp"
#include "laserpath/pipeline.hpp"
#include "laserpath/scene.hpp"
#include "oracles.hpp"

using namespace laserpath;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

PointCloud curved_patch(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    pts.push_back({x, y, 0.3 * std::sin(2 * x) * std::cos(3 * y)});
  }
  return estimate_normals(PointCloud(pts), 12, Point3(0, 0, 5));
}

FpfhDescriptor random_descriptor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 10);
  FpfhDescriptor d;
  for (int i = 0; i < kFpfhSize; ++i) d[i] = u(rng);
  return d;
}

}  // namespace

TEST(PairFeatures, RangesAndSymmetry) {
  std::mt19937_64 rng(20);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 500; ++i) {
    const Point3 a(n(rng), n(rng), n(rng));
    const Point3 b(n(rng), n(rng), n(rng));
    const Vector3 na = Vector3(n(rng), n(rng), n(rng)).normalized();
    const Vector3 nb = Vector3(n(rng), n(rng), n(rng)).normalized();
    const auto f = compute_pair_features(a, na, b, nb);
    const auto g = compute_pair_features(b, nb, a, na);
    ASSERT_TRUE(f && g);
    EXPECT_LE(std::abs(f->alpha), 1.0 + 1e-12);
    EXPECT_LE(std::abs(f->phi), 1.0 + 1e-12);
    EXPECT_LE(std::abs(f->theta), std::numbers::pi);
    EXPECT_NEAR(f->alpha, g->alpha, 1e-12);
    EXPECT_NEAR(f->phi, g->phi, 1e-12);
    EXPECT_NEAR(f->theta, g->theta, 1e-12);
  }
  EXPECT_FALSE(compute_pair_features(Point3::Zero(), Vector3::UnitZ(), Point3::Zero(),
                                     Vector3::UnitZ()));
}

TEST(PairFeatures, BinEdges) {
  EXPECT_EQ(feature_bin(-1.0, -1.0, 1.0), 0);
  EXPECT_EQ(feature_bin(1.0, -1.0, 1.0), kFpfhBinsPerFeature - 1);
  EXPECT_EQ(feature_bin(0.0, -1.0, 1.0), 5);
  EXPECT_EQ(feature_bin(-1.0 + 2.0 / 11.0 + 1e-12, -1.0, 1.0), 1);
}

TEST(Fpfh, Errors) {
  EXPECT_EQ(code_of([] { compute_fpfh(PointCloud({{0, 0, 0}}), 0.1); }),
            ErrorCode::kMissingNormals);
  EXPECT_EQ(code_of([] { compute_fpfh(PointCloud({{0, 0, 0}}, {{0, 0, 1}}), 0.0); }),
            ErrorCode::kNonPositiveRadius);
}

TEST(Fpfh, IsolatedPointIsAllZero) {
  const PointCloud c({{0, 0, 0}, {1, 0, 0}, {5, 5, 5}}, {{0, 0, 1}, {0, 0, 1}, {0, 1, 0}});
  const auto d = compute_fpfh(c, 1.5);
  EXPECT_EQ(d[2], FpfhDescriptor::Zero());
  EXPECT_NE(d[0], FpfhDescriptor::Zero());
}

TEST(Fpfh, BlocksSumToHundred) {
  std::mt19937_64 rng(21);
  const auto d = compute_fpfh(curved_patch(rng, 1500), 0.15);
  for (const auto& h : d) {
    for (int b = 0; b < 3; ++b) {
      const double sum = h.segment<kFpfhBinsPerFeature>(b * kFpfhBinsPerFeature).sum();
      EXPECT_TRUE(std::abs(sum - 100.0) < 1e-6 || sum == 0.0);
    }
    EXPECT_GE(h.minCoeff(), 0.0);
  }
}

TEST(Fpfh, InteriorOfPlaneIsUniform) {
  const auto pts = fixtures::plane_grid(30, 0.01);
  const PointCloud c(pts, std::vector<Vector3>(pts.size(), Vector3::UnitZ()));
  const auto d = compute_fpfh(c, 0.035);
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].x() > 0.08 && pts[i].x() < 0.21 && pts[i].y() > 0.08 && pts[i].y() < 0.21) {
      interior.push_back(i);
    }
  }
  ASSERT_GT(interior.size(), 50u);
  for (std::size_t i : interior) {
    EXPECT_LT((d[i] - d[interior.front()]).lpNorm<1>(), 1e-3);
  }
}

TEST(Fpfh, RigidInvariance) {
  std::mt19937_64 rng(22);
  const PointCloud c = curved_patch(rng, 2000);
  for (int trial = 0; trial < 3; ++trial) {
    const auto t = fixtures::random_transform(rng);
    const auto a = compute_fpfh(c, 0.12);
    const auto b = compute_fpfh(apply_transform(c, t), 0.12);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_LE((a[i] - b[i]).lpNorm<1>(), 1e-6) << i;
    }
  }
}

TEST(SalientFeatures, PicksOutliersFromUniformBackground) {
  std::vector<FpfhDescriptor> d(100, FpfhDescriptor::Constant(3.0));
  d[17] = FpfhDescriptor::Zero();
  d[60] = FpfhDescriptor::Constant(9.0);
  EXPECT_EQ(salient_features(d, 1.0), (std::vector<std::size_t>{17, 60}));
  const std::vector<FpfhDescriptor> same(10, FpfhDescriptor::Constant(1.0));
  EXPECT_TRUE(salient_features(same, 1.0).empty());
}

TEST(Matching, IdenticalListsPairWithThemselves) {
  std::mt19937_64 rng(23);
  std::vector<FpfhDescriptor> d;
  for (int i = 0; i < 40; ++i) d.push_back(random_descriptor(rng));
  const auto pairs = match_correspondences(d, d);
  ASSERT_EQ(pairs.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(pairs[i], (Correspondence{i, i, 0.0}));
}

TEST(Matching, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(24);
  std::uniform_int_distribution<int> size(1, 500);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FpfhDescriptor> src;
    std::vector<FpfhDescriptor> dst;
    for (int i = size(rng); i > 0; --i) src.push_back(random_descriptor(rng));
    for (int i = size(rng); i > 0; --i) dst.push_back(random_descriptor(rng));
    // Duplicated targets exercise the lower-id tie rule.
    dst.push_back(dst.front());
    const auto pairs = match_correspondences(src, dst);
    ASSERT_EQ(pairs.size(), src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      const auto [id, dist] = oracle::nearest(std::span<const FpfhDescriptor>(dst), src[i]);
      EXPECT_EQ(pairs[i].source, i);
      EXPECT_EQ(pairs[i].target, id);
      EXPECT_NEAR(pairs[i].distance, dist, 1e-12);
    }
  }
}

TEST(Matching, OneSourceManyTargets) {
  std::mt19937_64 rng(25);
  std::vector<FpfhDescriptor> dst;
  for (int i = 0; i < 200; ++i) dst.push_back(random_descriptor(rng));
  const std::vector<FpfhDescriptor> src{random_descriptor(rng)};
  const auto pairs = match_correspondences(src, dst);
  ASSERT_EQ(pairs.size(), 1u);
  double best = oracle::kInf;
  for (const auto& d : dst) best = std::min(best, (d - src[0]).norm());
  EXPECT_DOUBLE_EQ(pairs[0].distance, best);
}

TEST(Matching, EmptyDescriptors) {
  const std::vector<FpfhDescriptor> none;
  const std::vector<FpfhDescriptor> one(1, FpfhDescriptor::Zero());
  EXPECT_EQ(code_of([&] { match_correspondences(none, one); }), ErrorCode::kEmptyDescriptors);
  EXPECT_EQ(code_of([&] { match_correspondences(one, none); }), ErrorCode::kEmptyDescriptors);
}

TEST(Matching, MutualFilterKeepsReciprocalPairs) {
  std::vector<FpfhDescriptor> src{FpfhDescriptor::Constant(0.0), FpfhDescriptor::Constant(0.1)};
  std::vector<FpfhDescriptor> dst{FpfhDescriptor::Constant(0.05)};
  const auto fwd = match_correspondences(src, dst);
  const auto mutual = mutual_filter(fwd, src, dst);
  ASSERT_EQ(mutual.size(), 1u);
  EXPECT_EQ(mutual[0].source, 0u);  // equal distances: lower source id wins
}

TEST(Svd, IdentityForEqualSets) {
  const std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {0.3, 0.1, 1}};
  const auto t = estimate_rigid_svd(pts, pts);
  EXPECT_LT((t.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Svd, RecoversQuarterTurnAndShift) {
  std::mt19937_64 rng(26);
  const auto truth = RigidTransform::from_axis_angle(Vector3::UnitZ(), std::numbers::pi / 2, {1, 0, 0});
  const auto src = fixtures::uniform_points(rng, 30, -1, 1);
  std::vector<Point3> dst;
  for (const auto& p : src) dst.push_back(truth.apply(p));
  const auto t = estimate_rigid_svd(src, dst);
  EXPECT_LT((t.matrix() - truth.matrix()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Svd, UsesCorrespondenceIds) {
  std::mt19937_64 rng(27);
  const auto truth = fixtures::random_transform(rng);
  const auto src = fixtures::uniform_points(rng, 10);
  std::vector<Point3> dst(src.size());
  CorrespondenceSet pairs;
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[src.size() - 1 - i] = truth.apply(src[i]);
    pairs.push_back({i, src.size() - 1 - i, 0.0});
  }
  const auto t = estimate_rigid_svd(src, dst, pairs);
  EXPECT_LT((t.matrix() - truth.matrix()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Svd, DegenerateInputs) {
  const std::vector<Point3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  EXPECT_EQ(code_of([&] { estimate_rigid_svd(line, line); }), ErrorCode::kDegenerateGeometry);
  const std::vector<Point3> two{{0, 0, 0}, {1, 0, 0}};
  EXPECT_EQ(code_of([&] { estimate_rigid_svd(two, two); }), ErrorCode::kDegenerateGeometry);
}

TEST(Svd, ExactAndProperOnRandomInstances) {
  std::mt19937_64 rng(28);
  for (int trial = 0; trial < 200; ++trial) {
    const auto truth = fixtures::random_transform(rng);
    const auto src = fixtures::uniform_points(rng, 3 + trial % 20, -2, 2);
    std::vector<Point3> dst;
    for (const auto& p : src) dst.push_back(truth.apply(p));
    const auto t = estimate_rigid_svd(src, dst);
    double sq = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) sq += (t.apply(src[i]) - dst[i]).squaredNorm();
    EXPECT_LE(std::sqrt(sq / src.size()), 1e-10);
    EXPECT_NEAR(t.rotation().determinant(), 1.0, 1e-12);
  }
}

TEST(Svd, NeverReturnsReflection) {
  // A mirrored target is best fit by a reflection; the estimator must stay in SO(3).
  std::mt19937_64 rng(29);
  const auto src = fixtures::uniform_points(rng, 20, -1, 1);
  std::vector<Point3> dst;
  for (const auto& p : src) dst.push_back({p.x(), p.y(), -p.z()});
  const auto t = estimate_rigid_svd(src, dst);
  EXPECT_NEAR(t.rotation().determinant(), 1.0, 1e-12);
}

TEST(OrientationPrior, RangeChecked) {
  EXPECT_EQ(code_of([] { OrientationPrior{0, 0, 4.0}.rotation(); }), ErrorCode::kInvalidArgument);
  const auto r = OrientationPrior{0.1, -0.2, 0.3}.rotation();
  EXPECT_TRUE(r.matrix().isApprox(RigidTransform::from_rpy(0.1, -0.2, 0.3).matrix()));
}

TEST(CoarseAlign, IdenticalCloudsGiveIdentity) {
  std::mt19937_64 rng(30);
  const PointCloud c = curved_patch(rng, 1500);
  CoarseAlignParams params;
  params.feature_radius = 0.15;
  params.iterations = 2000;
  params.inlier_threshold = 0.02;
  const auto r = coarse_align(c, c, params);
  EXPECT_LT((r.transform.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_DOUBLE_EQ(r.inlier_fraction, 1.0);
}

TEST(CoarseAlign, RejectsBadParams) {
  CoarseAlignParams params;
  params.min_inlier_fraction = 1.5;
  const PointCloud c({{0, 0, 0}}, {{0, 0, 1}});
  EXPECT_EQ(code_of([&] { coarse_align(c, c, params); }), ErrorCode::kInvalidArgument);
}

class CoarseSceneTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    RandomSceneParams p;
    p.seed = 3;
    p.points_per_scan = 20000;
    scene_ = new Scene(generate_scene(random_scene_spec(p)));
    const PipelineConfig config;
    source_ = new PreparedScan(prepare_scan(config, scene_->scans[1]));
    target_ = new PreparedScan(prepare_scan(config, scene_->scans[0]));
  }
  static void TearDownTestSuite() {
    delete scene_;
    delete source_;
    delete target_;
  }
  static Scene* scene_;
  static PreparedScan* source_;
  static PreparedScan* target_;
};

Scene* CoarseSceneTest::scene_ = nullptr;
PreparedScan* CoarseSceneTest::source_ = nullptr;
PreparedScan* CoarseSceneTest::target_ = nullptr;

TEST_F(CoarseSceneTest, LandsInsideIcpBasin) {
  const PipelineConfig config;
  const auto r = coarse_align_with_features(source_->cloud, source_->features, target_->cloud,
                                            target_->features, config.coarse);
  const auto e = transform_error(r.transform, scene_->ground_truth[1]);
  EXPECT_LT(e.rotation_deg, 10.0);
  EXPECT_LT(e.translation_m, 0.10);
}

TEST_F(CoarseSceneTest, ExactPriorKeepsRotationClose) {
  const PipelineConfig config;
  const Eigen::Vector3d ypr = scene_->ground_truth[1].rotation().eulerAngles(2, 1, 0);
  const OrientationPrior prior{ypr[2], ypr[1], ypr[0]};
  ASSERT_TRUE(prior.rotation().rotation().isApprox(scene_->ground_truth[1].rotation(), 1e-9));
  const auto r = coarse_align_with_features(source_->cloud, source_->features, target_->cloud,
                                            target_->features, config.coarse, prior);
  EXPECT_LT(transform_error(r.transform, scene_->ground_truth[1]).rotation_deg, 5.0);
}

TEST_F(CoarseSceneTest, DeterministicForASeed) {
  const PipelineConfig config;
  const auto a = coarse_align_with_features(source_->cloud, source_->features, target_->cloud,
                                            target_->features, config.coarse);
  const auto b = coarse_align(source_->cloud, target_->cloud, config.coarse);
  EXPECT_EQ(a.transform.matrix(), b.transform.matrix());
  EXPECT_EQ(a.inliers, b.inliers);
}
