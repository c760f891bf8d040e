#include "crowdsim/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace crowdsim::feat {

dcm::UtilitySpec evac_spec() {
  return {{"DIST", "CH", "NF", "NB"}, {"Route1", "Route2"}, 0};
}

dcm::UtilitySpec firework_spec() {
  return {{"DIST", "GUIDE", "ATT"}, {"Route1", "Route2"}, 0};
}

std::vector<double> evac_features(const EvacDecisionContext& ctx,
                                  double distance_scale) {
  const int J = static_cast<int>(ctx.start_points.size());
  if (J < 2) throw ContractError("evac features need >= 2 route start points");
  constexpr int K = 4;  // DIST, CH, NF, NB
  std::vector<double> x(static_cast<std::size_t>(J) * K, 0.0);
  for (int j = 0; j < J; ++j) {
    x[j * K + 0] = norm(ctx.start_points[j] - ctx.position) * distance_scale;
    x[j * K + 1] = ctx.previous_choice == j ? 1.0 : 0.0;
  }
  for (const Neighbor& nb : ctx.neighbors) {
    if (nb.chosen < 0 || nb.chosen >= J) continue;
    const Vec2 rel = nb.position - ctx.position;
    if (norm(rel) > ctx.sensing_radius) continue;
    // front iff the neighbor projects positively onto the heading
    const int col = dot(rel, ctx.heading) > 0.0 ? 2 : 3;
    x[nb.chosen * K + col] += 1.0;
  }
  return x;
}

namespace {

struct Sample {
  double t, x, y;
};

Vec2 position_at(const std::vector<Sample>& traj, double t) {
  // linear interpolation; clamped at the ends
  if (t <= traj.front().t) return {traj.front().x, traj.front().y};
  if (t >= traj.back().t) return {traj.back().x, traj.back().y};
  auto it = std::lower_bound(
      traj.begin(), traj.end(), t,
      [](const Sample& s, double tv) { return s.t < tv; });
  const Sample& b = *it;
  const Sample& a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  return {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)};
}

int closest_bearing(const Vec2& heading, const Vec2& position,
                    const std::vector<Vec2>& start_points) {
  // smallest angle == largest normalized dot; ties keep the lower index
  int best = 0;
  double best_cos = -2.0;
  for (std::size_t j = 0; j < start_points.size(); ++j) {
    Vec2 b = start_points[j] - position;
    const double n = norm(b);
    const double c = n > 0.0 ? dot(b, heading) / n : -1.0;
    if (c > best_cos + 1e-12) {
      best_cos = c;
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

BuildResult build_observations_evac(const std::vector<TrajectoryRow>& rows,
                                    const std::vector<Vec2>& start_points,
                                    const BuildParams& params) {
  BuildResult out;
  out.spec = evac_spec();
  out.spec.alternatives.resize(start_points.size());
  for (std::size_t j = 0; j < start_points.size(); ++j)
    out.spec.alternatives[j] = "Route" + std::to_string(j + 1);

  // group rows per agent in first-appearance order
  std::vector<std::string> agent_order;
  std::unordered_map<std::string, std::vector<Sample>> traj;
  for (const TrajectoryRow& r : rows) {
    auto [it, inserted] = traj.try_emplace(r.id);
    if (inserted) agent_order.push_back(r.id);
    it->second.push_back({r.t, r.x, r.y});
  }
  for (auto& [id, t] : traj)
    std::sort(t.begin(), t.end(),
              [](const Sample& a, const Sample& b) { return a.t < b.t; });

  // First pass: per-agent decision windows with heading and chosen route.
  struct Window {
    double t;
    Vec2 pos;
    Vec2 heading;
    int chosen;
  };
  std::unordered_map<std::string, std::vector<Window>> windows;
  for (const std::string& id : agent_order) {
    const std::vector<Sample>& tr = traj[id];
    if (tr.size() < 2) {
      ++out.skipped_agents;
      continue;
    }
    std::vector<Window>& w = windows[id];
    Vec2 heading{0.0, 0.0};
    bool have_heading = false;
    const double t0 = tr.front().t;
    const double t_end = tr.back().t;
    for (double te = t0 + params.cadence; te <= t_end + 1e-9;
         te += params.cadence) {
      const Vec2 now = position_at(tr, te);
      const Vec2 before = position_at(tr, te - params.cadence);
      const Vec2 disp = now - before;
      if (norm(disp) >= params.min_displacement) {
        const double n = norm(disp);
        heading = {disp.x / n, disp.y / n};
        have_heading = true;
      }
      if (!have_heading) continue;  // stationary from the start
      w.push_back({te, now, heading,
                   closest_bearing(heading, now, start_points)});
    }
  }

  // Second pass: features, using the other agents' window choices.
  auto choice_of_at = [&](const std::string& id, double t) -> int {
    auto it = windows.find(id);
    if (it == windows.end()) return -1;
    int chosen = -1;
    for (const Window& w : it->second) {
      if (w.t > t + 1e-9) break;
      chosen = w.chosen;
    }
    return chosen;
  };

  for (const std::string& id : agent_order) {
    auto wit = windows.find(id);
    if (wit == windows.end()) continue;
    int prev = -1;
    for (const Window& w : wit->second) {
      EvacDecisionContext ctx;
      ctx.position = w.pos;
      ctx.heading = w.heading;
      ctx.start_points = start_points;
      ctx.previous_choice = prev;
      ctx.sensing_radius = params.sensing_radius;
      for (const std::string& other : agent_order) {
        if (other == id) continue;
        const int oc = choice_of_at(other, w.t);
        if (oc < 0) continue;
        auto ot = traj.find(other);
        if (ot->second.front().t > w.t || ot->second.back().t < w.t) continue;
        ctx.neighbors.push_back({position_at(ot->second, w.t), oc});
      }
      dcm::ChoiceObservation obs;
      obs.individual_id = id;
      obs.time_s = w.t;
      obs.features = evac_features(ctx, params.distance_scale);
      obs.chosen = w.chosen;
      out.observations.push_back(std::move(obs));
      prev = w.chosen;
    }
  }
  return out;
}

BuildResult build_observations_firework(const std::vector<ChoiceLogRow>& rows,
                                        const net::Network& network,
                                        int destination,
                                        double distance_scale) {
  BuildResult out;
  out.spec = firework_spec();
  for (const ChoiceLogRow& r : rows) {
    const int jnode = network.node_of(r.junction);
    const net::Junction* jn = network.junction_at(jnode);
    if (jn == nullptr)
      throw ValidationError("choice log references non-junction node: " +
                            r.junction);
    dcm::ChoiceObservation obs;
    obs.individual_id = r.id;
    obs.time_s = r.t;
    obs.features =
        net::junction_features(network, *jn, r.t, destination, distance_scale);
    obs.chosen = r.chosen;
    if (obs.chosen < 0 ||
        obs.chosen >= static_cast<int>(jn->alternatives.size()))
      throw ValidationError("choice log chosen index out of range");
    out.observations.push_back(std::move(obs));
  }
  return out;
}

}  // namespace crowdsim::feat
