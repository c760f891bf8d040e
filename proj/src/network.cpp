#include "crowdsim/network.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace crowdsim::net {

int schedule_value_at(const IntervalSchedule& s, double t, int default_value) {
  // Intervals are sorted and disjoint; [start, end) makes boundary queries
  // land in the later interval.
  auto it = std::upper_bound(
      s.begin(), s.end(), t,
      [](double value, const ScheduleInterval& iv) { return value < iv.end; });
  if (it != s.end() && t >= it->start) return it->value;
  return default_value;
}

void validate_schedule(const IntervalSchedule& s, const std::string& what) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].end <= s[i].start)
      throw ValidationError(what + ": empty or inverted interval");
    if (i > 0 && s[i].start < s[i - 1].end)
      throw ValidationError(what + ": overlapping or unsorted intervals");
  }
}

int Network::node_of(const std::string& id) const {
  auto it = node_index.find(id);
  if (it == node_index.end()) throw ValidationError("unknown node: " + id);
  return it->second;
}

int Network::link_of(const std::string& id) const {
  auto it = link_index.find(id);
  if (it == link_index.end()) throw ValidationError("unknown link: " + id);
  return it->second;
}

const Junction* Network::junction_at(int node) const {
  for (const Junction& j : junctions)
    if (j.node == node) return &j;
  return nullptr;
}

bool Network::is_terminal(int node) const {
  if (station && station->node == node) return true;
  return std::find(sinks.begin(), sinks.end(), node) != sinks.end();
}

void Network::finalize() {
  node_index.clear();
  link_index.clear();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!node_index.emplace(nodes[i].id, static_cast<int>(i)).second)
      throw ValidationError("duplicate node id: " + nodes[i].id);
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    if (!link_index.emplace(l.id, static_cast<int>(i)).second)
      throw ValidationError("duplicate link id: " + l.id);
    if (l.from < 0 || l.from >= static_cast<int>(nodes.size()) || l.to < 0 ||
        l.to >= static_cast<int>(nodes.size()))
      throw ValidationError("link endpoints out of range: " + l.id);
    if (l.length <= 0.0) throw ValidationError("non-positive length: " + l.id);
    if (l.width <= 0.0) throw ValidationError("non-positive width: " + l.id);
  }
  out_links.assign(nodes.size(), {});
  for (std::size_t i = 0; i < links.size(); ++i)
    out_links[links[i].from].push_back(static_cast<int>(i));

  for (const Junction& j : junctions) {
    if (j.alternatives.size() < 2)
      throw ValidationError("junction needs >= 2 alternatives");
    for (const JunctionAlternative& a : j.alternatives) {
      if (a.first_link < 0 || a.first_link >= static_cast<int>(links.size()))
        throw ValidationError("junction alternative references unknown link");
      if (links[a.first_link].from != j.node)
        throw ValidationError(
            "junction alternative's first link does not leave the junction");
      validate_schedule(a.attraction, "attraction schedule");
    }
    validate_schedule(j.guidance, "guidance schedule");
    for (const ScheduleInterval& iv : j.guidance)
      if (iv.value < 0 || iv.value >= static_cast<int>(j.alternatives.size()))
        throw ValidationError("guidance points at invalid alternative");
  }
  for (const ControlPoint& cp : control_points) {
    if (cp.link < 0 || cp.link >= static_cast<int>(links.size()))
      throw ValidationError("control point references unknown link");
    if (cp.offset < 0.0 || cp.offset > links[cp.link].length)
      throw ValidationError("control point offset outside its link");
    validate_schedule(cp.schedule, "control point schedule");
  }
  if (station) {
    if (station->node < 0 || station->node >= static_cast<int>(nodes.size()))
      throw ValidationError("station node out of range");
    double prev = -1.0;
    for (const TrainDeparture& d : station->timetable) {
      if (d.time <= prev)
        throw ValidationError("train departures must be strictly increasing");
      if (d.capacity <= 0) throw ValidationError("train capacity must be > 0");
      prev = d.time;
    }
  }
  for (int s : sinks)
    if (s < 0 || s >= static_cast<int>(nodes.size()))
      throw ValidationError("sink node out of range");
}

namespace {

// Dijkstra with (distance, node) keys; predecessor ties broken by link id so
// extracted paths are unique.
struct SearchResult {
  std::vector<double> dist;
  std::vector<int> pred_link;
};

SearchResult dijkstra(const Network& net, int from) {
  SearchResult r;
  r.dist.assign(net.nodes.size(), kUnreachable);
  r.pred_link.assign(net.nodes.size(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  r.dist[from] = 0.0;
  pq.emplace(0.0, from);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > r.dist[u]) continue;
    for (int li : net.out_links[u]) {
      const Link& l = net.links[li];
      const double nd = d + l.length;
      if (nd < r.dist[l.to] ||
          (nd == r.dist[l.to] && r.pred_link[l.to] >= 0 && li < r.pred_link[l.to])) {
        r.dist[l.to] = nd;
        r.pred_link[l.to] = li;
        pq.emplace(nd, l.to);
      }
    }
  }
  return r;
}

}  // namespace

double shortest_distance(const Network& net, int from_node, int to_node) {
  if (from_node < 0 || from_node >= static_cast<int>(net.nodes.size()) ||
      to_node < 0 || to_node >= static_cast<int>(net.nodes.size()))
    throw ContractError("shortest_distance: node out of range");
  if (from_node == to_node) return 0.0;
  return dijkstra(net, from_node).dist[to_node];
}

std::vector<int> shortest_path_links(const Network& net, int from_node,
                                     int to_node) {
  if (from_node == to_node) return {};
  const SearchResult r = dijkstra(net, from_node);
  if (r.dist[to_node] == kUnreachable)
    throw ValidationError("no path from " + net.nodes[from_node].id + " to " +
                          net.nodes[to_node].id);
  std::vector<int> path;
  for (int n = to_node; n != from_node;) {
    const int li = r.pred_link[n];
    path.push_back(li);
    n = net.links[li].from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double alternative_remaining_distance(const Network& net, const Junction& jn,
                                      int alternative, int destination) {
  const JunctionAlternative& alt = jn.alternatives[alternative];
  if (alt.dist_override >= 0.0) return alt.dist_override;
  const Link& first = net.links[alt.first_link];
  const double onward = shortest_distance(net, first.to, destination);
  return first.length + onward;
}

std::vector<double> junction_features(const Network& net, const Junction& jn,
                                      double t, int destination,
                                      double distance_scale) {
  const int J = static_cast<int>(jn.alternatives.size());
  std::vector<double> x(static_cast<std::size_t>(J) * 3, 0.0);
  const int guided = schedule_value_at(jn.guidance, t, -1);
  for (int j = 0; j < J; ++j) {
    x[j * 3 + 0] =
        alternative_remaining_distance(net, jn, j, destination) * distance_scale;
    x[j * 3 + 1] = guided == j ? 1.0 : 0.0;
    x[j * 3 + 2] =
        schedule_value_at(jn.alternatives[j].attraction, t, 0) ? 1.0 : 0.0;
  }
  return x;
}

}  // namespace crowdsim::net
