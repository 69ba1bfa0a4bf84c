// Synthetic 3D-TRUS fiducial observations and the rigid registration that
// tracks the gland between volumes.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tpsim/phantom.hpp"

namespace tpsim {

struct NoiseModel {
  double sigma0 = 0.5;                   // mm at imaging depth 0
  double depth_gain = 0.02;              // mm per mm of imaging depth
  double degradation_per_needle = 1.02;  // multiplies sigma0 after each completed insertion
  std::uint64_t rng_seed = 0;

  /// Standard deviation for a fiducial at `imaging_depth` after `completed` insertions.
  double sigma(double imaging_depth, int completed) const;
  void validate() const;
  bool operator==(const NoiseModel&) const = default;
};

struct Fiducial {
  int id = 0;
  Point3 position;
};

struct Observation {
  std::vector<Fiducial> fiducials;
  double sigma_used = 0.0;  // depth-independent part, sigma0 * degradation^k
  int volume_index = 0;
};

/// Moves every fiducial (the embedded beads) by `current` and adds isotropic
/// Gaussian noise. Advances `rng` by exactly six draws per fiducial.
Observation observe(const ProstatePhantom& phantom, const RigidTransform& current, const NoiseModel& noise,
                    int completed_insertions, int volume_index, RngStream& rng);

struct Registration {
  RigidTransform transform;  // maps reference coordinates onto observed ones
  double rms_residual = 0.0;
};

/// Least-squares rigid fit over fiducials matched by id (centroid alignment
/// plus SVD of the cross-covariance, reflection-corrected). Throws
/// DegenerateConfiguration with fewer than 3 common ids or collinear points.
Registration rigid_register(std::span<const Fiducial> reference, std::span<const Fiducial> observed);

/// Sum of squared residuals of `t` over the id-matched pairs.
double sum_squared_residuals(const RigidTransform& t, std::span<const Fiducial> reference,
                             std::span<const Fiducial> observed);

inline Point3 track_target(const RigidTransform& reg, const Point3& target_rest) { return apply(reg, target_rest); }

}  // namespace tpsim
