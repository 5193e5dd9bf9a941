// Copyright 2026 The bcood Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bcood/geometry.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "bcood/rng.h"

namespace bcood {
namespace {

constexpr double kPi = std::numbers::pi;

Pose2d random_pose2(Rng& rng) {
  return {rng.uniform(-500, 500), rng.uniform(-500, 500), rng.uniform(-kPi, kPi)};
}

Pose3d random_pose3(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return {Vector3d(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)), q};
}

void expect_pose_near(const Pose2d& a, const Pose2d& b, double tol) {
  EXPECT_NEAR(a.x(), b.x(), tol);
  EXPECT_NEAR(a.y(), b.y(), tol);
  EXPECT_NEAR(wrap_angle(a.theta - b.theta), 0.0, tol);
}

void expect_pose_near(const Pose3d& a, const Pose3d& b, double tol) {
  EXPECT_LE((a.position - b.position).cwiseAbs().maxCoeff(), tol);
  // q and -q are the same rotation.
  const double d = std::min((a.orientation.coeffs() - b.orientation.coeffs()).norm(),
                            (a.orientation.coeffs() + b.orientation.coeffs()).norm());
  EXPECT_LE(d, tol);
}

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(2 * kPi + 0.25), 0.25, 1e-12);
  EXPECT_NEAR(wrap_angle(-2 * kPi - 0.25), -0.25, 1e-12);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double t = wrap_angle(rng.uniform(-50, 50));
    EXPECT_GT(t, -kPi);
    EXPECT_LE(t, kPi);
  }
}

TEST(Compose, IdentityIsNeutral) {
  const Pose2d p(3.0, -2.0, 0.7);
  expect_pose_near(compose(Pose2d::identity(), p), p, 0.0);
  expect_pose_near(compose(p, Pose2d::identity()), p, 0.0);
}

TEST(Compose, QuarterTurnThenUnitStep) {
  // R(pi/2) (1,0) + (1,0) = (0,1) + (1,0).
  const Pose2d c = compose(Pose2d(1, 0, kPi / 2), Pose2d(1, 0, 0));
  expect_pose_near(c, Pose2d(1, 1, kPi / 2), 1e-15);
}

TEST(Compose, ThetaStaysNormalised) {
  const Pose2d c = compose(Pose2d(0, 0, 3.0), Pose2d(0, 0, 3.0));
  EXPECT_GT(c.theta, -kPi);
  EXPECT_LE(c.theta, kPi);
  EXPECT_NEAR(c.theta, 6.0 - 2 * kPi, 1e-12);
}

TEST(Inverse, Examples) {
  expect_pose_near(inverse(Pose2d::identity()), Pose2d::identity(), 0.0);
  expect_pose_near(inverse(Pose2d(3, 0, 0)), Pose2d(-3, 0, 0), 0.0);
  expect_pose_near(inverse(Pose2d(0, 0, kPi / 2)), Pose2d(0, 0, -kPi / 2), 0.0);
}

TEST(GroupLaws, Pose2RandomTriples) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Pose2d a = random_pose2(rng), b = random_pose2(rng), c = random_pose2(rng);
    expect_pose_near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-9);
    expect_pose_near(compose(a, inverse(a)), Pose2d::identity(), 1e-12);
    expect_pose_near(compose(inverse(a), a), Pose2d::identity(), 1e-12);
  }
}

TEST(GroupLaws, Pose3RandomTriples) {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Pose3d a = random_pose3(rng), b = random_pose3(rng), c = random_pose3(rng);
    expect_pose_near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-9);
    expect_pose_near(compose(a, inverse(a)), Pose3d::identity(), 1e-12);
  }
}

TEST(Pose3, CanonicalQuaternion) {
  const Pose3d p(Vector3d::Zero(), Eigen::Quaterniond(-2.0, 0.0, 0.0, 0.0));
  EXPECT_DOUBLE_EQ(p.orientation.w(), 1.0);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Pose3d q = random_pose3(rng);
    EXPECT_GE(q.orientation.w(), 0.0);
    EXPECT_NEAR(q.orientation.norm(), 1.0, 1e-12);
  }
}

TEST(Pose3, UnitNormThroughManyCompositions) {
  Rng rng(6);
  Pose3d acc = Pose3d::identity();
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    // Small random rotation, as an integrator would produce.
    const Eigen::Quaterniond dq(1.0, 1e-3 * rng.normal(), 1e-3 * rng.normal(),
                                1e-3 * rng.normal());
    acc = compose(acc, Pose3d(Vector3d::Zero(), dq));
    worst = std::max(worst, std::abs(acc.orientation.norm() - 1.0));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(ExpressInFrame, Examples) {
  const Pose2d p(4, -1, 0.3);
  expect_pose_near(express_in_frame(p, p), Pose2d::identity(), 1e-15);
  expect_pose_near(express_in_frame(Pose2d(1, 1, 0), Pose2d(2, 1, 0)), Pose2d(1, 0, 0), 0.0);
  // Offset (0,1) rotated by -pi/2 is (1,0).
  expect_pose_near(express_in_frame(Pose2d(0, 0, kPi / 2), Pose2d(0, 1, kPi / 2)),
                   Pose2d(1, 0, 0), 1e-15);
}

TEST(ExpressInFrame, InvariantUnderCommonRigidMotion2D) {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Pose2d g = random_pose2(rng), ee = random_pose2(rng), x = random_pose2(rng);
    expect_pose_near(express_in_frame(compose(g, ee), compose(g, x)), express_in_frame(ee, x),
                     1e-9);
  }
}

TEST(ExpressInFrame, InvariantUnderCommonRigidMotion3D) {
  Rng rng(14);
  for (int i = 0; i < 1000; ++i) {
    const Pose3d g = random_pose3(rng), ee = random_pose3(rng), x = random_pose3(rng);
    expect_pose_near(express_in_frame(compose(g, ee), compose(g, x)), express_in_frame(ee, x),
                     1e-9);
  }
}

TEST(RotateVector, Examples) {
  const Vector2d v(2.5, -1.0);
  EXPECT_EQ(rotate_vector_into_frame(Pose2d(7, 8, 0), v), v);
  const Vector2d r = rotate_vector_into_frame(Pose2d(5, 5, kPi / 2), Vector2d(1, 0));
  EXPECT_NEAR(r.x(), 0.0, 1e-15);
  EXPECT_NEAR(r.y(), -1.0, 1e-15);
}

TEST(RotateVector, PreservesNormAndRoundTrips) {
  Rng rng(15);
  for (int i = 0; i < 100; ++i) {
    const Pose2d f = random_pose2(rng);
    const Vector2d v(rng.uniform(-20, 20), rng.uniform(-20, 20));
    const Vector2d r = rotate_vector_into_frame(f, v);
    EXPECT_NEAR(r.norm(), v.norm(), 1e-12);
    EXPECT_LE((rotate_vector_out_of_frame(f, r) - v).cwiseAbs().maxCoeff(), 1e-12);

    const Pose3d f3 = random_pose3(rng);
    const Vector3d v3(rng.normal(), rng.normal(), rng.normal());
    EXPECT_NEAR(rotate_vector_into_frame(f3, v3).norm(), v3.norm(), 1e-12);
  }
}

TEST(ProjectionRadius, RejectsNonPositive) {
  EXPECT_THROW(ProjectionRadius(0.0), std::invalid_argument);
  EXPECT_THROW(ProjectionRadius(-1.0), std::invalid_argument);
  EXPECT_THROW(ProjectionRadius(std::nan("")), std::invalid_argument);
  EXPECT_DOUBLE_EQ(ProjectionRadius(150.0).value(), 150.0);
}

TEST(ProjectLambda, Examples) {
  const ProjectionRadius r(150.0);
  const Pose2d inside = project_lambda(Pose2d(60, 0, 0.2), r);
  EXPECT_EQ(inside.position, Vector2d(60, 0));
  const Pose2d outside = project_lambda(Pose2d(300, 0, 1.0), r);
  EXPECT_EQ(outside.position, Vector2d(150, 0));
  EXPECT_EQ(outside.theta, 1.0);
}

TEST(ProjectLambda, NormDirectionAndRotation) {
  Rng rng(16);
  for (int i = 0; i < 10000; ++i) {
    const ProjectionRadius r(rng.uniform(1.0, 600.0));
    const Pose2d p = random_pose2(rng);
    const Pose2d q = project_lambda(p, r);
    EXPECT_LE(q.position.norm(), r.value() + 1e-12);
    if (p.position.norm() > 0.0) {
      const double cos_sim = q.position.dot(p.position) / (q.position.norm() * p.position.norm());
      EXPECT_GE(cos_sim, 1.0 - 1e-12);
    }
    EXPECT_EQ(q.theta, p.theta);
    const Pose2d qq = project_lambda(q, r);
    EXPECT_LE((qq.position - q.position).norm(), 1e-12);
    EXPECT_EQ(qq.theta, q.theta);

    const Pose3d p3(Vector3d(rng.uniform(-900, 900), rng.uniform(-900, 900),
                             rng.uniform(-900, 900)),
                    Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal()));
    const Pose3d q3 = project_lambda(p3, r);
    EXPECT_LE(q3.position.norm(), r.value() + 1e-12);
    EXPECT_EQ(q3.orientation.coeffs(), p3.orientation.coeffs());
  }
}

}  // namespace
}  // namespace bcood
