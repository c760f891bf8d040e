#pragma once

#include <string>
#include <vector>

#include "crowdsim/dcm.hpp"
#include "crowdsim/network.hpp"

namespace crowdsim::feat {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

struct Neighbor {
  Vec2 position;
  int chosen = -1;  // the neighbor's most recent choice
};

/// Everything one evacuation decision sees. The neighbor list must exclude
/// the decision-maker; heading is a unit vector.
struct EvacDecisionContext {
  Vec2 position;
  Vec2 heading;
  std::vector<Vec2> start_points;  // per alternative
  int previous_choice = -1;        // -1 = first decision
  std::vector<Neighbor> neighbors;
  double sensing_radius = 5.0;
};

/// J x 4 feature matrix (DIST, CH, NF, NB). DIST is the Euclidean distance
/// to each route start point times distance_scale; NF/NB count in-radius
/// neighbors by the sign of their projection onto the heading (positive =
/// front, each neighbor counted exactly once).
std::vector<double> evac_features(const EvacDecisionContext& ctx,
                                  double distance_scale = 1.0);

dcm::UtilitySpec evac_spec();
dcm::UtilitySpec firework_spec();

// ---------------------------------------------------------------------------
// Offline conversion of logs into observation datasets
// ---------------------------------------------------------------------------

struct TrajectoryRow {
  std::string id;
  double t = 0.0, x = 0.0, y = 0.0;
};

struct ChoiceLogRow {
  std::string id;
  double t = 0.0;
  std::string junction;
  int chosen = 0;
};

struct BuildParams {
  double cadence = 0.5;           // s between decisions
  double min_displacement = 0.05; // m; below this the heading carries over
  double sensing_radius = 5.0;    // m
  double distance_scale = 1.0;
};

struct BuildResult {
  dcm::UtilitySpec spec;
  std::vector<dcm::ChoiceObservation> observations;
  int skipped_agents = 0;  // agents with < 2 samples
};

/// Evacuation mode: one observation per agent per cadence window. Heading
/// comes from the window displacement; the chosen route is the start point
/// whose bearing is angularly closest (ties to the lower index).
BuildResult build_observations_evac(const std::vector<TrajectoryRow>& rows,
                                    const std::vector<Vec2>& start_points,
                                    const BuildParams& params);

/// Firework mode: one observation per junction crossing, with features
/// evaluated by the network at the crossing time.
BuildResult build_observations_firework(const std::vector<ChoiceLogRow>& rows,
                                        const net::Network& network,
                                        int destination, double distance_scale);

}  // namespace crowdsim::feat
