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

#ifndef BCOOD_GEOMETRY_H_
#define BCOOD_GEOMETRY_H_

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace bcood {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

using Vector2d = Vec2<double>;
using Vector3d = Vec3<double>;

// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  constexpr Scalar kTwoPi = 2 * std::numbers::pi_v<Scalar>;
  if (theta > -kPi && theta <= kPi) return theta;
  theta = std::fmod(theta, kTwoPi);
  if (theta <= -kPi) theta += kTwoPi;
  if (theta > kPi) theta -= kTwoPi;
  return theta;
}

// Planar rigid-body pose. The heading is kept in (-pi, pi] by every
// operation that produces a Pose2.
template <typename Scalar>
struct Pose2 {
  Vec2<Scalar> position = Vec2<Scalar>::Zero();
  Scalar theta = 0;

  Pose2() = default;
  Pose2(Scalar x, Scalar y, Scalar heading)
      : position(x, y), theta(wrap_angle(heading)) {}
  Pose2(const Vec2<Scalar>& p, Scalar heading)
      : position(p), theta(wrap_angle(heading)) {}

  static Pose2 identity() { return Pose2(); }

  Scalar x() const { return position.x(); }
  Scalar y() const { return position.y(); }

  Eigen::Matrix<Scalar, 2, 2> rotation() const {
    const Scalar c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix<Scalar, 2, 2> r;
    r << c, -s, s, c;
    return r;
  }

  Vec2<Scalar> transform_point(const Vec2<Scalar>& p) const {
    return rotation() * p + position;
  }
  Vec2<Scalar> transform_vector(const Vec2<Scalar>& v) const {
    return rotation() * v;
  }
};

using Pose2d = Pose2<double>;

// Spatial rigid-body pose with a unit quaternion kept in the w >= 0
// hemisphere.
template <typename Scalar>
struct Pose3 {
  Vec3<Scalar> position = Vec3<Scalar>::Zero();
  Eigen::Quaternion<Scalar> orientation = Eigen::Quaternion<Scalar>::Identity();

  Pose3() = default;
  Pose3(const Vec3<Scalar>& p, const Eigen::Quaternion<Scalar>& q)
      : position(p), orientation(canonical(q)) {}

  static Pose3 identity() { return Pose3(); }

  static Eigen::Quaternion<Scalar> canonical(Eigen::Quaternion<Scalar> q) {
    q.normalize();
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    return q;
  }

  Vec3<Scalar> transform_point(const Vec3<Scalar>& p) const {
    return orientation * p + position;
  }
  Vec3<Scalar> transform_vector(const Vec3<Scalar>& v) const {
    return orientation * v;
  }
};

using Pose3d = Pose3<double>;

// Radius of the locality ball around the end-effector.
class ProjectionRadius {
 public:
  explicit ProjectionRadius(double lambda) : lambda_(lambda) {
    if (!(lambda > 0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("projection radius must be finite and > 0");
    }
  }
  double value() const { return lambda_; }

 private:
  double lambda_;
};

// ---- group operations -------------------------------------------------------

// Pose of b's frame expressed through a (a * b).
template <typename Scalar>
Pose2<Scalar> compose(const Pose2<Scalar>& a, const Pose2<Scalar>& b) {
  return Pose2<Scalar>(a.transform_point(b.position), a.theta + b.theta);
}

template <typename Scalar>
Pose3<Scalar> compose(const Pose3<Scalar>& a, const Pose3<Scalar>& b) {
  return Pose3<Scalar>(a.transform_point(b.position),
                       a.orientation * b.orientation);
}

template <typename Scalar>
Pose2<Scalar> inverse(const Pose2<Scalar>& a) {
  const Eigen::Matrix<Scalar, 2, 2> rt = a.rotation().transpose();
  return Pose2<Scalar>(-(rt * a.position), -a.theta);
}

template <typename Scalar>
Pose3<Scalar> inverse(const Pose3<Scalar>& a) {
  const Eigen::Quaternion<Scalar> qi = a.orientation.conjugate();
  return Pose3<Scalar>(-(qi * a.position), qi);
}

// ---- frame changes ----------------------------------------------------------

// Expresses a world-frame pose x in the frame attached to `frame`.
template <typename Pose>
Pose express_in_frame(const Pose& frame, const Pose& x) {
  return compose(inverse(frame), x);
}

// Free vectors (displacements) only see the rotational part of a frame.
template <typename Scalar>
Vec2<Scalar> rotate_vector_into_frame(const Pose2<Scalar>& frame,
                                      const Vec2<Scalar>& v) {
  return frame.rotation().transpose() * v;
}

template <typename Scalar>
Vec3<Scalar> rotate_vector_into_frame(const Pose3<Scalar>& frame,
                                      const Vec3<Scalar>& v) {
  return frame.orientation.conjugate() * v;
}

template <typename Scalar>
Vec2<Scalar> rotate_vector_out_of_frame(const Pose2<Scalar>& frame,
                                        const Vec2<Scalar>& v) {
  return frame.rotation() * v;
}

template <typename Scalar>
Vec3<Scalar> rotate_vector_out_of_frame(const Pose3<Scalar>& frame,
                                        const Vec3<Scalar>& v) {
  return frame.orientation * v;
}

// ---- locality projection ----------------------------------------------------

// Positions at or beyond lambda are pulled back onto the sphere of radius
// lambda along the same direction. Works for any fixed-size position vector.
template <typename Derived>
typename Derived::PlainObject project_position(
    const Eigen::MatrixBase<Derived>& pos, const ProjectionRadius& r) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = pos.norm();
  const Scalar lambda = static_cast<Scalar>(r.value());
  if (norm < lambda) return pos;
  return (lambda / norm) * pos;
}

// Expects `entity` already expressed in the end-effector frame. The
// orientation is never touched.
template <typename Scalar>
Pose2<Scalar> project_lambda(const Pose2<Scalar>& entity,
                             const ProjectionRadius& r) {
  Pose2<Scalar> out = entity;
  out.position = project_position(entity.position, r);
  return out;
}

template <typename Scalar>
Pose3<Scalar> project_lambda(const Pose3<Scalar>& entity,
                             const ProjectionRadius& r) {
  Pose3<Scalar> out = entity;
  out.position = project_position(entity.position, r);
  return out;
}

}  // namespace bcood

#endif  // BCOOD_GEOMETRY_H_
