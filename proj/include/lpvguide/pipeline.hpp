#pragma once

// Glue between a RunConfig and the synthesis, planning and simulation stages.

#include <optional>
#include <vector>

#include "config.hpp"
#include "lpv_models.hpp"
#include "planner.hpp"
#include "simulation.hpp"
#include "synthesis.hpp"

namespace lpvguide {

inline SynthesisResult synthesize_dynamic(const RunConfig& cfg) {
  return synthesize(dynamic_vertex_matrices(cfg.dynamic_bounds, cfg.vehicle, cfg.lpv), dynamic_input_matrix(cfg.lpv),
                    cfg.dynamic_bounds, cfg.dynamic_synthesis);
}

inline SynthesisResult synthesize_kinematic(const RunConfig& cfg) {
  return synthesize(kinematic_vertex_matrices(cfg.kinematic_bounds), kinematic_input_matrix(), cfg.kinematic_bounds,
                    cfg.kinematic_synthesis);
}

inline ReferenceTrajectory plan_reference(const RunConfig& cfg, const std::vector<Waypoint>& waypoints) {
  return plan_trajectory(waypoints, cfg.planner, cfg.closed, cfg.stop_at_end);
}

inline ReferenceTrajectory plan_reference(const RunConfig& cfg) { return plan_reference(cfg, cfg.resolve_waypoints()); }

inline Scenario make_scenario(const RunConfig& cfg, ReferenceTrajectory trajectory, VertexGainSet dynamic,
                              VertexGainSet kinematic) {
  Scenario sc;
  sc.trajectory = std::move(trajectory);
  sc.params = cfg.vehicle;
  sc.limits = cfg.limits;
  sc.lpv = cfg.lpv;
  sc.dynamic_gains = std::move(dynamic);
  sc.kinematic_gains = std::move(kinematic);
  sc.ts_kin = cfg.ts_kin;
  sc.ts_dyn = cfg.ts_dyn;
  sc.substeps = cfg.substeps;
  sc.v_floor = cfg.v_floor;
  if (cfg.horizon > 0.0) sc.horizon = cfg.horizon;
  return sc;
}

}  // namespace lpvguide
