#include <random>

#include <gtest/gtest.h>

#include "objrel/state.hpp"
#include "test_support.hpp"

using namespace objrel;
using objrel::testing::random_state;

TEST(State, LayoutOffsets) {
  EXPECT_EQ(idx::object_pos(0), 21);
  EXPECT_EQ(idx::object_theta(0), 24);
  EXPECT_EQ(idx::object_pos(2), 33);
  FullState s;
  EXPECT_EQ(s.error_dim(), 21);
  s.objects.resize(3);
  EXPECT_EQ(s.error_dim(), 39);
}

TEST(State, InitialCovarianceIsDiagonal) {
  InitialUncertainty init;
  const ErrorCovariance p = initial_covariance(init);
  ASSERT_EQ(p.dim(), 21);
  EXPECT_DOUBLE_EQ(p.matrix()(0, 0), init.sigma_p * init.sigma_p);
  EXPECT_DOUBLE_EQ(p.matrix()(14, 14), init.sigma_bias_acc * init.sigma_bias_acc);
  EXPECT_EQ((p.matrix() - Eigen::MatrixXd(p.matrix().diagonal().asDiagonal())).norm(), 0.0);
}

TEST(State, InjectZeroLeavesStateUnchanged) {
  std::mt19937_64 rng(1);
  const FullState s = random_state(rng, 2);
  const FullState t = inject_error(s, Eigen::VectorXd::Zero(s.error_dim()));
  EXPECT_EQ(t.core.p_wi, s.core.p_wi);
  EXPECT_EQ(t.core.q_wi.coeffs(), s.core.q_wi.coeffs());
  EXPECT_EQ(t.objects[1].q_wo.coeffs(), s.objects[1].q_wo.coeffs());
}

TEST(State, InjectRejectsWrongDimension) {
  std::mt19937_64 rng(2);
  const FullState s = random_state(rng, 1);
  EXPECT_THROW(inject_error(s, Eigen::VectorXd::Zero(21)), std::invalid_argument);
}

TEST(State, InjectIsRightMultiplicativeOnRotations) {
  std::mt19937_64 rng(3);
  const FullState s = random_state(rng, 1);
  Eigen::VectorXd dx = Eigen::VectorXd::Zero(s.error_dim());
  const Vec3 d(0.01, -0.02, 0.03);
  dx.segment<3>(idx::kTheta) = d;
  dx.segment<3>(idx::object_theta(0)) = d;
  const FullState t = inject_error(s, dx);
  EXPECT_LT((rot_of(t.core.q_wi) - rot_of(s.core.q_wi) * exp_so3(d)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((rot_of(t.objects[0].q_wo) - rot_of(s.objects[0].q_wo) * exp_so3(d)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(State, AddObjectGrowsCovarianceByChainRule) {
  std::mt19937_64 rng(4);
  FullState s = random_state(rng, 0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(21, 21);
  ErrorCovariance cov(a * a.transpose() + Eigen::MatrixXd::Identity(21, 21));
  const Eigen::MatrixXd p0 = cov.matrix();
  const Eigen::MatrixXd j = Eigen::MatrixXd::Random(6, 21);
  const Mat6 noise = 0.01 * Mat6::Identity();

  ObjectState o;
  o.id = 7;
  o.object_class = "mug";
  add_object(s, cov, o, noise, j);
  ASSERT_EQ(cov.dim(), 27);
  EXPECT_TRUE(s.objects[0].anchor);
  EXPECT_LT((cov.matrix().bottomRightCorner(6, 6) - (j * p0 * j.transpose() + noise)).norm(), 1e-9);
  EXPECT_LT((cov.matrix().bottomLeftCorner(6, 21) - j * p0).norm(), 1e-9);
  EXPECT_LT(cov.asymmetry(), 1e-12);
  EXPECT_EQ(cov.matrix().topLeftCorner(21, 21), p0);

  o.id = 8;
  add_object(s, cov, o, noise, Eigen::MatrixXd::Zero(6, 27));
  EXPECT_FALSE(s.objects[1].anchor);
  EXPECT_EQ(s.anchor_index(), 0);
  EXPECT_EQ(s.find_object(8), 1);
  EXPECT_EQ(s.find_object(99), -1);
}

TEST(State, AddObjectRejectsDuplicatesAndBadSizes) {
  FullState s;
  ErrorCovariance cov = initial_covariance({});
  ObjectState o;
  add_object(s, cov, o, Mat6::Identity(), Eigen::MatrixXd::Zero(6, 21));
  EXPECT_THROW(add_object(s, cov, o, Mat6::Identity(), Eigen::MatrixXd::Zero(6, 27)), std::invalid_argument);
  o.id = 1;
  EXPECT_THROW(add_object(s, cov, o, Mat6::Identity(), Eigen::MatrixXd::Zero(6, 21)), std::invalid_argument);
}

TEST(State, AnchorMask) {
  FullState s;
  EXPECT_THROW(anchor_mask(s), std::logic_error);
  std::mt19937_64 rng(5);
  s = random_state(rng, 2);
  const ErrorMask m = anchor_mask(s);
  ASSERT_EQ(static_cast<int>(m.size()), s.error_dim());
  for (int i = 0; i < s.error_dim(); ++i) EXPECT_EQ(m[static_cast<std::size_t>(i)], i >= 21 && i < 27) << i;
}

TEST(State, SnapshotNamesMatchValues) {
  std::mt19937_64 rng(6);
  const FullState s = random_state(rng, 2);
  const ErrorCovariance cov(Eigen::MatrixXd::Identity(s.error_dim(), s.error_dim()));
  const StateSnapshot snap = snapshot(s, cov);
  EXPECT_EQ(snap.names.size(), snap.values.size());
  EXPECT_EQ(snap.names.front(), "t");
}
