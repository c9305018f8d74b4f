#pragma once

#include <array>

#include <Eigen/Core>

#include "dex/math/error.hpp"
#include "dex/math/transform.hpp"
#include "dex/teleop/tip_target.hpp"

namespace dex::kinematics {

inline constexpr int kJointCount = 6;

struct JointLimit {
  double lo = 0.0;
  double hi = 0.0;
};

// q1 yaw, q2 pitch (rad) about the remote centre; q3 insertion (m) along the shaft;
// q4 shaft roll, q5 wrist pitch, q6 wrist yaw (rad). jaw opening in rad.
struct JointVector {
  std::array<double, kJointCount> q{};
  double jaw = 0.0;

  double& operator[](int i) { return q[i]; }
  double operator[](int i) const { return q[i]; }
  friend bool operator==(const JointVector&, const JointVector&) = default;
};

// Laparoscopic-style instrument pivoting about a remote centre of motion (RCM).
// Tip pose = rcm * Ry(q1) Rx(q2) Tz(q3) Rz(q4) Rx(q5) Ry(q6) Tz(tip_length).
struct InstrumentModel {
  RigidTransform rcm_pose;
  std::array<JointLimit, kJointCount> limits{};
  double tip_length = 0.009;
  double jaw_max = 0.0;

  // Default limits, RCM frame z axis pointing straight down (world -Y).
  static InstrumentModel at_rcm(const Vec3& rcm_world);

  static constexpr bool is_prismatic(int joint) { return joint == 2; }
  bool is_continuous(int joint) const {
    return !is_prismatic(joint) && limits[joint].hi - limits[joint].lo >= 2 * 3.141592653589793;
  }
  JointVector home() const;
  JointVector clamp(JointVector q) const;
  bool within_limits(const JointVector& q, double tol = 1e-12) const;
  // Farthest tip distance from the RCM origin.
  double reach() const { return limits[2].hi + tip_length; }
  // Throws DomainError if any limit has lo >= hi or tip_length <= 0.
  void validate() const;
};

using Jacobian = Eigen::Matrix<double, 6, kJointCount>;

// World tip pose. Throws DomainError for out-of-limit joints.
RigidTransform forward_kinematics(const InstrumentModel& model, const JointVector& q);

// Geometric Jacobian: rows 0-2 tip linear velocity, rows 3-5 angular velocity (world).
Jacobian jacobian(const InstrumentModel& model, const JointVector& q);

// World position of the wrist (the frame after insertion, before roll).
Vec3 wrist_point(const InstrumentModel& model, const JointVector& q);

// Distance from the RCM origin to the shaft line through the wrist point.
double rcm_residual(const InstrumentModel& model, const JointVector& q);

struct IkConfig {
  double damping = 0.05;
  // Scales the positional rows of the error and Jacobian (1/m).
  double position_weight = 10.0;
  double max_step_rad = 0.2;
  double max_step_m = 0.02;
  double tol_pos_m = 1e-4;
  double tol_rot_rad = 1e-3;
  int max_iterations = 50;
  // Iterations without a 10% error reduction before one restart from the
  // closed-form joint values. The restart counts against max_iterations.
  int stall_iterations = 8;
  // Once within tolerance, iteration continues until the error drops below these
  // or stops shrinking, so successive solutions do not carry tolerance-sized noise.
  double refine_pos_m = 1e-12;
  double refine_rot_rad = 1e-12;
};

struct IkResult {
  JointVector q;
  bool converged = false;
  double residual_pos = 0.0;
  double residual_rot = 0.0;
  int iterations = 0;

  double residual() const;
};

class ReachabilityError : public Error {
 public:
  using Error::Error;
};

// Damped least squares, dq = J^T (J J^T + lambda^2 I)^-1 e with per-joint step clamps
// and hard joint-limit clamping every iteration. Returns the best iterate; the jaw is
// taken from target.jaw_command. Throws ReachabilityError when the target lies beyond
// reach() of the RCM, DomainError when the seed is out of limits.
IkResult solve_ik(const InstrumentModel& model, const TipTarget& target, const JointVector& seed,
                  const IkConfig& config = {});

// Jaw opening for a command in [0, 1] (0 fully open).
double jaw_angle(const InstrumentModel& model, double jaw_command);

}  // namespace dex::kinematics
