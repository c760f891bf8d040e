#pragma once

#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "crowdsim/errors.hpp"

namespace crowdsim::net {

struct Node {
  std::string id;
  bool has_xy = false;
  double x = 0.0, y = 0.0;
};

struct Link {
  std::string id;
  int from = -1, to = -1;
  double length = 0.0;  // m, > 0
  double width = 0.0;   // m, > 0
};

/// Piecewise-constant schedule over non-overlapping sorted [start, end)
/// intervals. Queries at a boundary see the later interval.
struct ScheduleInterval {
  double start = 0.0, end = 0.0;
  int value = 0;
};
using IntervalSchedule = std::vector<ScheduleInterval>;

int schedule_value_at(const IntervalSchedule& s, double t, int default_value);
void validate_schedule(const IntervalSchedule& s, const std::string& what);

struct JunctionAlternative {
  int first_link = -1;
  double dist_override = -1.0;  // remaining m to destination; <0 = computed
  bool has_start_point = false;
  double start_x = 0.0, start_y = 0.0;  // geometric route start (features)
  IntervalSchedule attraction;          // value 1 while the attraction is on
};

/// Decision node. Alternative order is fixed and defines the choice-model
/// alternative indices; alternative 0 is the station-nearer route.
struct Junction {
  int node = -1;
  std::vector<JunctionAlternative> alternatives;
  IntervalSchedule guidance;  // value = guided alternative index
};

constexpr int kStop = 1;
constexpr int kProceed = 0;

struct ControlPoint {
  std::string id;
  int link = -1;
  double offset = 0.0;        // m from link start
  IntervalSchedule schedule;  // kStop intervals; PROCEED outside
};

struct TrainDeparture {
  double time = 0.0;
  long capacity = 0;
};

struct Station {
  int node = -1;
  long platform_capacity = -1;  // -1 = unbounded
  std::vector<TrainDeparture> timetable;
};

struct Network {
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<Junction> junctions;
  std::vector<ControlPoint> control_points;
  std::optional<Station> station;
  std::vector<int> sinks;  // terminal nodes (evacuation exits); the station
                           // node is implicitly terminal as well

  std::unordered_map<std::string, int> node_index;
  std::unordered_map<std::string, int> link_index;
  std::vector<std::vector<int>> out_links;  // per node, in link-id order

  int node_of(const std::string& id) const;
  int link_of(const std::string& id) const;
  const Junction* junction_at(int node) const;
  bool is_terminal(int node) const;

  /// Rebuild indices/adjacency and check referential integrity.
  void finalize();
};

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Exact shortest-path length over link lengths (Dijkstra); kUnreachable
/// when no path exists.
double shortest_distance(const Network& net, int from_node, int to_node);

/// Link sequence of the shortest path; ties broken by link id order.
/// Empty when from == to; throws if unreachable.
std::vector<int> shortest_path_links(const Network& net, int from_node,
                                     int to_node);

/// Remaining distance to `destination` entering the junction via
/// alternative j: the override when present, else first-link length plus
/// the shortest onward distance.
double alternative_remaining_distance(const Network& net, const Junction& jn,
                                      int alternative, int destination);

/// J x 3 feature matrix (DIST, GUIDE, ATT) for a junction decision at time t.
/// DIST is in scenario distance units (meters times distance_scale).
std::vector<double> junction_features(const Network& net, const Junction& jn,
                                      double t, int destination,
                                      double distance_scale);

}  // namespace crowdsim::net
