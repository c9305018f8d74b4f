#include "dex/kinematics/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

namespace dex::kinematics {

namespace {

using std::numbers::pi;

constexpr Vec3 kX{1.0, 0.0, 0.0};
constexpr Vec3 kY{0.0, 1.0, 0.0};
constexpr Vec3 kZ{0.0, 0.0, 1.0};

RigidTransform rot(const Vec3& axis, double angle) {
  return {quat_from_axis_angle(axis, angle), {}};
}

RigidTransform shift_z(double d) { return RigidTransform::from_translation({0.0, 0.0, d}); }

// frames[i] is the frame joint i moves about (axis kAxes[i], at its origin); frames[6] is the tip.
struct Chain {
  std::array<RigidTransform, kJointCount + 1> frames;
};

Chain chain(const InstrumentModel& model, const JointVector& q) {
  Chain c;
  c.frames[0] = model.rcm_pose;
  c.frames[1] = c.frames[0] * rot(kY, q[0]);
  c.frames[2] = c.frames[1] * rot(kX, q[1]);
  c.frames[3] = c.frames[2] * shift_z(q[2]);
  c.frames[4] = c.frames[3] * rot(kZ, q[3]);
  c.frames[5] = c.frames[4] * rot(kX, q[4]);
  c.frames[6] = c.frames[5] * rot(kY, q[5]) * shift_z(model.tip_length);
  return c;
}

// Local axis of each joint in its frame.
constexpr std::array<Vec3, kJointCount> kAxes{kY, kX, kZ, kZ, kX, kY};

void require_limits(const InstrumentModel& model, const JointVector& q) {
  if (!model.within_limits(q)) {
    throw DomainError("joint vector outside the instrument's limits");
  }
}

Eigen::Matrix<double, 6, 1> error_twist(const RigidTransform& target, const RigidTransform& tip) {
  const Vec3 dp = target.translation - tip.translation;
  const Vec3 dr = (target.rotation * tip.rotation.inverse()).rotation_vector();
  Eigen::Matrix<double, 6, 1> e;
  e << dp.x, dp.y, dp.z, dr.x, dr.y, dr.z;
  return e;
}

// Joint values whose tip pose equals the target when every joint is free: the
// wrist point fixes the insertion joints and the remaining rotation splits as
// Rz(q4) Rx(q5) Ry(q6).
JointVector closed_form_guess(const InstrumentModel& model, const RigidTransform& target) {
  const Vec3 wrist = target.translation - model.tip_length * target.rotation.rotate({0.0, 0.0, 1.0});
  const Vec3 w = model.rcm_pose.inverse().apply(wrist);
  JointVector q{};
  q[2] = norm(w);
  if (q[2] > 1e-12) {
    q[0] = std::atan2(w.x, w.z);
    q[1] = std::asin(std::clamp(-w.y / q[2], -1.0, 1.0));
  }
  const UnitQuat shaft = quat_from_axis_angle({0.0, 1.0, 0.0}, q[0]) *
                         quat_from_axis_angle({1.0, 0.0, 0.0}, q[1]);
  const Mat3 m =
      (shaft.inverse() * model.rcm_pose.rotation.inverse() * target.rotation).matrix();
  q[3] = std::atan2(-m[0][1], m[1][1]);
  q[4] = std::asin(std::clamp(m[2][1], -1.0, 1.0));
  q[5] = std::atan2(-m[2][0], m[2][2]);
  return model.clamp(q);
}

}  // namespace

InstrumentModel InstrumentModel::at_rcm(const Vec3& rcm_world) {
  InstrumentModel m;
  m.rcm_pose = {quat_from_axis_angle(kX, pi / 2), rcm_world};
  m.limits = {{{-pi / 3, pi / 3},
               {-pi / 3, pi / 3},
               {0.0, 0.25},
               {-pi, pi},
               {-pi / 2, pi / 2},
               {-pi / 2, pi / 2}}};
  m.tip_length = 0.009;
  m.jaw_max = pi / 3;
  return m;
}

JointVector InstrumentModel::home() const {
  JointVector q;
  q[2] = std::clamp(0.10, limits[2].lo, limits[2].hi);
  q.jaw = jaw_max;
  return q;
}

JointVector InstrumentModel::clamp(JointVector q) const {
  for (int i = 0; i < kJointCount; ++i) {
    const JointLimit& l = limits[i];
    if (is_continuous(i) && (q[i] < l.lo || q[i] > l.hi)) {
      // A revolute joint covering a full turn wraps instead of stopping.
      q[i] = l.lo + std::fmod(std::fmod(q[i] - l.lo, 2 * pi) + 2 * pi, 2 * pi);
    }
    q[i] = std::clamp(q[i], l.lo, l.hi);
  }
  q.jaw = std::clamp(q.jaw, 0.0, jaw_max);
  return q;
}

bool InstrumentModel::within_limits(const JointVector& q, double tol) const {
  for (int i = 0; i < kJointCount; ++i) {
    if (!std::isfinite(q[i]) || q[i] < limits[i].lo - tol || q[i] > limits[i].hi + tol) {
      return false;
    }
  }
  return true;
}

void InstrumentModel::validate() const {
  for (const JointLimit& l : limits) {
    if (!(l.lo < l.hi)) {
      throw DomainError("joint limit must satisfy lo < hi");
    }
  }
  if (!(tip_length > 0.0)) {
    throw DomainError("tip length must be positive");
  }
}

RigidTransform forward_kinematics(const InstrumentModel& model, const JointVector& q) {
  require_limits(model, q);
  return chain(model, q).frames[6];
}

Jacobian jacobian(const InstrumentModel& model, const JointVector& q) {
  require_limits(model, q);
  const Chain c = chain(model, q);
  const Vec3 tip = c.frames[6].translation;
  Jacobian j;
  for (int i = 0; i < kJointCount; ++i) {
    const Vec3 axis = c.frames[i].apply_direction(kAxes[i]);
    Vec3 lin, ang;
    if (InstrumentModel::is_prismatic(i)) {
      lin = axis;
    } else {
      lin = cross(axis, tip - c.frames[i].translation);
      ang = axis;
    }
    j.col(i) << lin.x, lin.y, lin.z, ang.x, ang.y, ang.z;
  }
  return j;
}

Vec3 wrist_point(const InstrumentModel& model, const JointVector& q) {
  return chain(model, q).frames[3].translation;
}

double rcm_residual(const InstrumentModel& model, const JointVector& q) {
  const Chain c = chain(model, q);
  const Vec3 shaft = c.frames[3].apply_direction(kZ);
  const Vec3 to_rcm = model.rcm_pose.translation - c.frames[3].translation;
  return norm(cross(to_rcm, shaft));
}

double IkResult::residual() const { return std::hypot(residual_pos, residual_rot); }

double jaw_angle(const InstrumentModel& model, double jaw_command) {
  return (1.0 - std::clamp(jaw_command, 0.0, 1.0)) * model.jaw_max;
}

IkResult solve_ik(const InstrumentModel& model, const TipTarget& target, const JointVector& seed,
                  const IkConfig& config) {
  require_limits(model, seed);
  if (distance(target.pose.translation, model.rcm_pose.translation) > model.reach()) {
    throw ReachabilityError("tip target lies beyond the instrument's reach");
  }

  const double lambda2 = config.damping * config.damping;
  JointVector q = seed;
  q.jaw = jaw_angle(model, target.jaw_command);

  IkResult best{q, false, 0.0, 0.0, 0};
  double best_norm = std::numeric_limits<double>::infinity();
  double previous_norm = std::numeric_limits<double>::infinity();
  int last_progress = 0;
  bool restarted = false;

  for (int iteration = 0;; ++iteration) {
    const Chain c = chain(model, q);
    const Eigen::Matrix<double, 6, 1> e = error_twist(target.pose, c.frames[6]);
    const double pos = e.head<3>().norm();
    const double ang = e.tail<3>().norm();
    const double err = std::hypot(pos, ang);
    if (err < best_norm) {
      if (err < 0.9 * best_norm) {
        last_progress = iteration;
      }
      best_norm = err;
      best = {q, pos < config.tol_pos_m && ang < config.tol_rot_rad, pos, ang, iteration};
    }
    if (best.converged) {
      const bool refined = best.residual_pos < config.refine_pos_m &&
                           best.residual_rot < config.refine_rot_rad;
      if (refined || err > 0.5 * previous_norm) {
        break;
      }
    }
    if (iteration == config.max_iterations) {
      break;
    }
    previous_norm = err;

    if (!restarted && !best.converged && iteration - last_progress >= config.stall_iterations) {
      // Stuck against a joint limit; continue from the closed-form joint values.
      restarted = true;
      last_progress = iteration;
      const double jaw = q.jaw;
      q = closed_form_guess(model, target.pose);
      q.jaw = jaw;
      continue;
    }

    Jacobian j = jacobian(model, q);
    Eigen::Matrix<double, 6, 1> we = e;
    j.topRows<3>() *= config.position_weight;
    we.head<3>() *= config.position_weight;
    const Eigen::Matrix<double, 6, 6> jjt =
        j * j.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
    const Eigen::Matrix<double, 6, 1> dq = j.transpose() * jjt.ldlt().solve(we);
    for (int i = 0; i < kJointCount; ++i) {
      const double step_limit =
          InstrumentModel::is_prismatic(i) ? config.max_step_m : config.max_step_rad;
      q[i] += std::clamp(dq(i), -step_limit, step_limit);
    }
    q = model.clamp(q);
  }
  return best;
}

}  // namespace dex::kinematics
