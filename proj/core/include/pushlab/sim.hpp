#pragma once

#include <cstdint>
#include <stdexcept>

#include "pushlab/geom.hpp"
#include "pushlab/rng.hpp"
#include "pushlab/se2.hpp"

namespace pushlab::sim {

/// Per-episode physical parameters (Table-style domain randomization).
/// `restitution` and `mass` are sampled and logged for dataset fidelity but
/// have no kinematic effect in the quasi-static oracle. `friction` drives
/// the pusher-object friction cone under the default wiring.
struct ObjectParams {
  double friction{0.6};
  double restitution{0.5};
  double length{0.12};
  double width{0.10};
  double mass{0.5};
  Vec2 com_offset{0.0, 0.0};

  double half_length() const { return 0.5 * length; }
  double half_width() const { return 0.5 * width; }
};

struct DomainRandomization {
  double friction_min{0.5}, friction_max{0.7};
  double restitution_min{0.4}, restitution_max{0.6};
  double length_min{0.11}, length_max{0.13};
  double width_min{0.09}, width_max{0.11};
  double mass_min{0.3}, mass_max{0.7};
  /// COM offset sampled uniformly in +-com_frac * half_extent per axis.
  double com_frac{0.1};
};

enum class FrictionWiring {
  kPusherObject,  // sampled friction sets the contact cone (default)
  kSurfaceOnly,   // sampled friction is surface-only (inert); cone fixed
};

struct SimConfig {
  double pusher_radius{0.0125};
  double contact_tol{1e-6};
  double substep{1e-4};
  FrictionWiring friction_wiring{FrictionWiring::kPusherObject};
  double fixed_pusher_friction{0.3};
};

struct WorldState {
  PlanarPose object_pose;
  Vec2 pusher_pos;  // world frame
  ObjectParams params;
};

/// A push in the object frame at push start: pusher placed at `start`,
/// displaced by `delta`.
struct PushCommand {
  ObjectFramePoint start;
  ObjectFramePoint delta;
};

struct InvalidCommand : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepResult {
  WorldState state;
  PlanarMotion motion;  // net object motion in the pre-push body frame
  bool contact{false};
  /// Min over substeps of the object displacement component along the
  /// instantaneous contact normal (>= 0: the object is never pulled).
  double min_normal_progress{0.0};
};

ObjectParams sample_object_params(Rng& rng, const DomainRandomization& dr = {});
ObjectParams sample_object_params(std::uint64_t rng_seed, const DomainRandomization& dr = {});

/// tau_max / f_max of the ellipsoidal limit surface for a uniform pressure
/// distribution about the COM offset. Meters.
double limit_surface_ratio(const ObjectParams& p);

/// True iff the pusher sphere centered at `candidate` (object frame)
/// overlaps the object rectangle.
bool pusher_collides(const ObjectParams& p, const ObjectFramePoint& candidate,
                     double pusher_radius = 0.0125);

/// Integrates the pusher along `delta` in substeps, resolving sticking vs
/// sliding contact with the ellipsoidal limit-surface / motion-cone model.
/// Throws InvalidCommand when `start` penetrates the object.
StepResult step_push(const WorldState& state, const PushCommand& cmd, const SimConfig& cfg = {});

/// Execution helper shared by data collection and control: the pusher is
/// placed at `ro`, advanced along the direction of `d_ro` until first
/// contact (exact ray query), then pushed by |d_ro|. The commanded `d_ro`
/// is what gets recorded and fed to models; the approach travel is not.
StepResult execute_push(const WorldState& state, const ObjectFramePoint& ro,
                        const ObjectFramePoint& d_ro, const SimConfig& cfg = {});

}  // namespace pushlab::sim
