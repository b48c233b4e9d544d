#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "objrel/matching.hpp"
#include "test_support.hpp"

using namespace objrel;
using objrel::testing::random_quat;
using objrel::testing::random_state;
using objrel::testing::random_vec;

namespace {

double assignment_cost(const Eigen::MatrixXd& c, const std::vector<int>& a) {
  double sum = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r)
    if (a[r] >= 0) sum += c(static_cast<Eigen::Index>(r), a[r]);
  return sum;
}

/// Minimum over all injective maps of rows into columns (rows <= cols).
double brute_force(const Eigen::MatrixXd& c) {
  std::vector<int> cols(static_cast<std::size_t>(c.cols()));
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (int r = 0; r < c.rows(); ++r) sum += c(r, cols[static_cast<std::size_t>(r)]);
    best = std::min(best, sum);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

Eigen::Matrix4d homogeneous(const Mat3& r, const Vec3& p) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = r;
  t.topRightCorner<3, 1>() = p;
  return t;
}

ObjectState object(int id, const std::string& cls, const Vec3& p) {
  ObjectState o;
  o.id = id;
  o.object_class = cls;
  o.p_wo = p;
  return o;
}

}  // namespace

TEST(Matching, ProjectionOfIdentityAndTranslation) {
  FullState s;
  PoseMeasurement m;
  m.p_co = Vec3(0, 0, 2);
  m.q_co = quat_exp(Vec3(0.1, 0.2, 0.3));
  const Pose a = project_measurement(s, m);
  EXPECT_EQ(a.p, m.p_co);
  EXPECT_LT((a.q.coeffs() - m.q_co.coeffs()).norm(), 1e-15);
  s.core.p_wi = Vec3(1, 0, 0);
  EXPECT_LT((project_measurement(s, m).p - Vec3(1, 0, 2)).norm(), 1e-15);
}

TEST(Matching, ProjectionMatchesHomogeneousProduct) {
  std::mt19937_64 rng(113);
  for (int i = 0; i < 200; ++i) {
    const FullState s = random_state(rng, 0);
    PoseMeasurement m;
    m.p_co = random_vec(rng, 2.0);
    m.q_co = random_quat(rng);
    const Eigen::Matrix4d t = homogeneous(rot_of(s.core.q_wi), s.core.p_wi) *
                              homogeneous(rot_of(s.extr.q_ic), s.extr.p_ic) * homogeneous(rot_of(m.q_co), m.p_co);
    const Pose p = project_measurement(s, m);
    EXPECT_LT((p.p - t.topRightCorner<3, 1>()).norm(), 1e-12);
    EXPECT_LT((rot_of(p.q) - t.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Matching, HungarianEqualsBruteForce) {
  std::mt19937_64 rng(127);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 40; ++trial) {
      Eigen::MatrixXd c(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = u(rng);
      const std::vector<int> a = hungarian(c);
      std::vector<int> sorted = a;
      std::sort(sorted.begin(), sorted.end());
      for (int k = 0; k < n; ++k) EXPECT_EQ(sorted[static_cast<std::size_t>(k)], k);
      EXPECT_NEAR(assignment_cost(c, a), brute_force(c), 1e-9);
    }
  }
}

TEST(Matching, HungarianRectangular) {
  std::mt19937_64 rng(131);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd wide(3, 5);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 5; ++j) wide(i, j) = u(rng);
    EXPECT_NEAR(assignment_cost(wide, hungarian(wide)), brute_force(wide), 1e-9);
    const Eigen::MatrixXd tall = wide.transpose();
    const std::vector<int> a = hungarian(tall);
    EXPECT_EQ(std::count(a.begin(), a.end(), -1), 2);
    EXPECT_NEAR(assignment_cost(tall, a), brute_force(wide), 1e-9);
  }
  EXPECT_TRUE(hungarian(Eigen::MatrixXd(0, 3)).empty());
}

TEST(Matching, SameClassWithinGateMatches) {
  const std::vector<ObjectState> est{object(0, "mug", Vec3(1, 0, 0))};
  const std::vector<ProjectedObject> proj{{Pose{Vec3(1.05, 0, 0), UnitQuaternion()}, "mug"}};
  const MatchResult r = match(proj, est, {});
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0], std::make_pair(std::size_t{0}, std::size_t{0}));
  EXPECT_TRUE(r.unmatched_measurements.empty());
}

TEST(Matching, ClassMismatchAndGateLeaveUnmatched) {
  const std::vector<ObjectState> est{object(0, "mug", Vec3(1, 0, 0)), object(1, "box", Vec3(5, 0, 0))};
  const std::vector<ProjectedObject> proj{{Pose{Vec3(1, 0, 0), UnitQuaternion()}, "can"},
                                          {Pose{Vec3(8, 0, 0), UnitQuaternion()}, "box"}};
  const MatchResult r = match(proj, est, {});
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_EQ(r.unmatched_measurements.size(), 2u);
  EXPECT_EQ(r.unmatched_objects.size(), 2u);
  MatchGates wide;
  wide.gate = 10.0;
  EXPECT_EQ(match(proj, est, wide).pairs.size(), 1u);
}

TEST(Matching, AssignmentPrefersGlobalOptimum) {
  // Greedy would give measurement 0 the closer first object and leave 1 unmatched.
  const std::vector<ObjectState> est{object(0, "c", Vec3(0, 0, 0)), object(1, "c", Vec3(0.9, 0, 0))};
  const std::vector<ProjectedObject> proj{{Pose{Vec3(0.45, 0, 0), UnitQuaternion()}, "c"},
                                          {Pose{Vec3(-0.5, 0, 0), UnitQuaternion()}, "c"}};
  MatchGates g;
  g.gate = 0.6;
  const MatchResult r = match(proj, est, g);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].second, 1u);
  EXPECT_EQ(r.pairs[1].second, 0u);
}

TEST(Matching, InitializationJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(137);
  for (int i = 0; i < 200; ++i) {
    const FullState s = random_state(rng, 2);
    PoseMeasurement m;
    m.p_co = random_vec(rng, 2.0);
    m.q_co = random_quat(rng);
    const ObjectInitialization init = object_initialization(s, m, 9);
    const Eigen::MatrixXd np = objrel::testing::numeric_vector_jacobian(
        s, [&](const FullState& x) { return project_measurement(x, m).p; });
    const Eigen::MatrixXd nr = objrel::testing::numeric_rotation_jacobian(
        s, [&](const FullState& x) { return rot_of(project_measurement(x, m).q); });
    EXPECT_LT((np - init.jacobian.topRows(3)).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LT((nr - init.jacobian.bottomRows(3)).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Matching, InitializationNoiseFollowsMeasurementPerturbation) {
  std::mt19937_64 rng(139);
  const FullState s = random_state(rng, 0);
  PoseMeasurement m;
  m.p_co = random_vec(rng, 2.0);
  m.q_co = random_quat(rng);
  m.var_p = Vec3(1e-4, 4e-4, 9e-4);
  m.var_theta = Vec3(1e-3, 2e-3, 3e-3);
  const double h = 1e-6;
  Eigen::Matrix<double, 6, 6> jn;
  for (int k = 0; k < 6; ++k) {
    PoseMeasurement plus = m, minus = m;
    if (k < 3) {
      plus.p_co[k] += h;
      minus.p_co[k] -= h;
    } else {
      plus.q_co = quat_mul(m.q_co, quat_exp(Vec3::Unit(k - 3) * h));
      minus.q_co = quat_mul(m.q_co, quat_exp(Vec3::Unit(k - 3) * -h));
    }
    const Pose a = project_measurement(s, plus), b = project_measurement(s, minus);
    const Mat3 r0t = rot_of(project_measurement(s, m).q).transpose();
    jn.col(k) << (a.p - b.p) / (2 * h), (log_so3(r0t * rot_of(a.q)) - log_so3(r0t * rot_of(b.q))) / (2 * h);
  }
  Eigen::Matrix<double, 6, 1> var;
  var << m.var_p, m.var_theta;
  const Mat6 expected = jn * var.asDiagonal() * jn.transpose();
  EXPECT_LT((object_initialization(s, m, 0).noise - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Matching, InitializeObjectAnchorsFirstAndStaysPositive) {
  std::mt19937_64 rng(149);
  FullState s = random_state(rng, 0);
  ErrorCovariance cov = initial_covariance({});
  PoseMeasurement m;
  m.object_class = "mug";
  m.p_co = Vec3(0.1, 0.2, 2.0);
  initialize_object(s, cov, m, 0);
  m.object_class = "box";
  initialize_object(s, cov, m, 1);
  ASSERT_EQ(s.objects.size(), 2u);
  EXPECT_TRUE(s.objects[0].anchor);
  EXPECT_FALSE(s.objects[1].anchor);
  EXPECT_LT((s.objects[0].p_wo - project_measurement(s, m).p).norm(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.matrix());
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
}
