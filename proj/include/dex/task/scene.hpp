#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dex/kinematics/instrument.hpp"
#include "dex/math/transform.hpp"
#include "dex/task/events.hpp"
#include "dex/teleop/tip_target.hpp"

namespace dex::task {

enum class Side { Left, Right };

std::string_view to_string(Side side);

// Board, task rules and instrument placement. World frame: board plane y = 0,
// y up, x towards the operator's right.
struct SceneConfig {
  double peg_height_m = 0.015;
  double peg_capture_radius_m = 0.008;
  double ring_radius_m = 0.012;
  double ring_rest_height_m = 0.002;
  std::array<double, 2> peg_columns_x_m{0.045, 0.075};  // mirrored for the left side
  std::array<double, 3> peg_rows_z_m{-0.03, 0.0, 0.03};
  double grasp_radius_m = 0.006;
  double jaw_close_threshold = 0.7;
  double jaw_open_threshold = 0.3;
  // Placement accepts ring heights below peg_height_m plus this margin.
  double place_height_margin_m = 0.02;
  double gravity_mps2 = 9.81;
  std::int64_t respawn_us = 1'000'000;
  std::int64_t step_us = 10'000;
  bool require_handover = true;
  std::array<Vec3, 2> rcm_world{Vec3{-0.06, 0.12, 0.0}, Vec3{0.06, 0.12, 0.0}};
  double home_insertion_m = 0.10;
  // Viewing camera (x right, y down, z forward), looking down at the board from the front.
  RigidTransform camera{quat_from_axis_angle({1.0, 0.0, 0.0}, 0.75 * 3.141592653589793),
                        {0.0, 0.25, 0.25}};
  kinematics::IkConfig ik;

  void validate() const;
};

struct Peg {
  int id = 0;
  Side side = Side::Left;
  Vec3 base;  // on the board, y = 0

  std::string name() const;
};

enum class RingPhase { OnPeg, Grasped, GraspedBoth, Falling, Respawning };

std::string_view to_string(RingPhase phase);

// An in-progress carry, opened by the grasp that lifts a ring off a peg.
struct TransferRecord {
  int ring = -1;
  std::int64_t t_first_grasp_us = 0;
  std::int64_t t_placed_us = 0;
  bool handover_occurred = false;
  int source_peg = -1;
  int dest_peg = -1;
};

struct Ring {
  int id = 0;
  RigidTransform pose;
  RingPhase phase = RingPhase::OnPeg;
  int peg = -1;        // OnPeg
  int holder = -1;     // Grasped and GraspedBoth: the instrument the ring follows
  int secondary = -1;  // GraspedBoth: the instrument that joined
  RigidTransform grip;  // ring pose in the holder's tip frame
  Vec3 velocity;        // Falling
  std::int64_t respawn_left_us = 0;
  int home_peg = -1;  // where a dropped ring reappears
  std::optional<TransferRecord> carry;
};

struct InstrumentState {
  kinematics::InstrumentModel model;
  kinematics::JointVector q;
  RigidTransform tip;
  bool jaw_closed = false;
  bool ik_ok = true;
  double path_length_m = 0.0;
};

std::vector<Peg> make_pegs(const SceneConfig& config);

// Distance from a point to a ring's centre circle.
double distance_to_ring(const Ring& ring, double ring_radius, const Vec3& point);

// Counts a completed carry: the ring must end on the other side, and when the
// rule asks for it, must have changed hands on the way.
bool classify_transfer(const TransferRecord& record, const std::vector<Peg>& pegs,
                       bool require_handover);

// Fixed-step kinematic peg-transfer task. Rings attach rigidly to a closed jaw,
// fall under gravity when released away from a peg, and reappear on their home
// peg after respawn_us.
class PegScene {
 public:
  explicit PegScene(SceneConfig config = {});

  // Rings back on the left pegs, instruments at home, path lengths and clock zeroed.
  void reset();

  // Advances one step. Appends events stamped with the post-step clock.
  void step(const std::array<TipTarget, 2>& targets, EventLog& events);

  std::int64_t t_us() const { return t_us_; }
  const SceneConfig& config() const { return config_; }
  const std::vector<Peg>& pegs() const { return pegs_; }
  const std::vector<Ring>& rings() const { return rings_; }
  const std::array<InstrumentState, 2>& instruments() const { return instruments_; }
  std::array<TipTarget, 2> home_targets() const;
  double path_length_m() const;

  // Throws std::logic_error if a ring is in an inconsistent state.
  void check_invariants() const;

 private:
  void solve(int i, const TipTarget& target, EventLog& events);
  void update_carried();
  void update_free(EventLog& events);
  void try_grasp(int i, EventLog& events);
  void release(int i, EventLog& events);
  void place(Ring& ring, int peg, EventLog& events);
  std::optional<int> peg_below(const Vec3& center) const;
  Event event(EventKind kind, int ring = -1, int instrument = -1, int peg = -1) const;

  SceneConfig config_;
  std::vector<Peg> pegs_;
  std::vector<Ring> rings_;
  std::array<InstrumentState, 2> instruments_;
  std::int64_t t_us_ = 0;
};

}  // namespace dex::task
