#include "lcp/scenario.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>

#include "lcp/errors.hpp"
#include "lcp/text.hpp"

namespace lcp {

char to_char(Scenario s) { return static_cast<char>('a' + static_cast<int>(s)); }

Scenario classify_scenario(bool has_v1, bool has_v2, bool has_v3) {
  if (has_v1 && has_v2 && has_v3) return Scenario::a;
  if (has_v1 && has_v2) return Scenario::b;
  if (has_v1 && has_v3) return Scenario::c;
  if (has_v2 && has_v3) return Scenario::d;
  if (has_v1) return Scenario::e;
  if (has_v2) return Scenario::f;
  if (has_v3) return Scenario::g;
  return Scenario::h;
}

NeighborContext find_neighbors(const Dataset& ds, int ego_id,
                               std::int64_t frame, Direction direction) {
  const TrajectoryRecord* ego = ds.find(ego_id, frame);
  if (ego == nullptr) {
    throw lookup_error("vehicle " + std::to_string(ego_id) +
                       " not present at frame " + std::to_string(frame));
  }
  const int adjacent_lane =
      direction == Direction::left ? ego->lane - 1 : ego->lane + 1;

  NeighborContext ctx;
  ctx.ego_id = ego_id;
  ctx.frame = frame;

  auto closer = [&](const TrajectoryRecord& cand,
                    const std::optional<TrajectoryRecord>& cur) {
    if (!cur) return true;
    const double dc = std::abs(cand.position - ego->position);
    const double dk = std::abs(cur->position - ego->position);
    if (dc != dk) return dc < dk;
    return cand.vehicle_id < cur->vehicle_id;
  };

  for (std::size_t idx : ds.indices_at_frame(frame)) {
    const TrajectoryRecord& r = ds.records()[idx];
    if (r.vehicle_id == ego_id) continue;
    if (r.lane == ego->lane && r.position > ego->position) {
      if (closer(r, ctx.v1)) ctx.v1 = r;
    } else if (r.lane == adjacent_lane) {
      if (r.position >= ego->position) {
        if (closer(r, ctx.v2)) ctx.v2 = r;
      } else {
        if (closer(r, ctx.v3)) ctx.v3 = r;
      }
    }
  }
  ctx.scenario = classify_scenario(ctx.v1.has_value(), ctx.v2.has_value(),
                                   ctx.v3.has_value());
  return ctx;
}

std::vector<LaneChangeEvent> detect_lane_changes(const Dataset& ds) {
  std::vector<LaneChangeEvent> events;
  for (const Segment& seg : ds.segments()) {
    for (std::size_t k = 1; k < seg.count; ++k) {
      const TrajectoryRecord& prev = ds.records()[seg.first + k - 1];
      const TrajectoryRecord& cur = ds.records()[seg.first + k];
      const int delta = cur.lane - prev.lane;
      if (delta == 0) continue;
      if (delta != 1 && delta != -1) {
        throw integrity_error("vehicle " + std::to_string(seg.vehicle_id) +
                              ": lane jump of " + std::to_string(delta) +
                              " at frame " + std::to_string(cur.frame));
      }
      events.push_back({seg.vehicle_id, cur.frame, prev.lane, cur.lane,
                        delta == -1 ? Direction::left : Direction::right});
    }
  }
  std::sort(events.begin(), events.end(),
            [](const LaneChangeEvent& a, const LaneChangeEvent& b) {
              if (a.vehicle_id != b.vehicle_id)
                return a.vehicle_id < b.vehicle_id;
              return a.t_lc < b.t_lc;
            });
  return events;
}

std::vector<LaneChangeEvent> select_task_events(
    const std::vector<LaneChangeEvent>& events, Direction direction) {
  std::vector<LaneChangeEvent> out;
  for (const auto& e : events) {
    if (e.direction != direction) continue;
    if (lane_removed(direction, e.from_lane) ||
        lane_removed(direction, e.to_lane))
      continue;
    out.push_back(e);
  }
  return out;
}

void write_events(std::ostream& out,
                  const std::vector<LaneChangeEvent>& events) {
  out << "vehicle_id,t_lc,from_lane,to_lane,direction\n";
  for (const auto& e : events) {
    out << e.vehicle_id << ',' << e.t_lc << ',' << e.from_lane << ','
        << e.to_lane << ',' << to_string(e.direction) << '\n';
  }
}

std::vector<LaneChangeEvent> read_events(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw schema_error("event file has no header");
  std::vector<LaneChangeEvent> events;
  long long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 5)
      throw parse_error("event row " + std::to_string(row) +
                        ": expected 5 cells");
    const std::string ctx = "event row " + std::to_string(row);
    LaneChangeEvent e;
    e.vehicle_id = static_cast<int>(parse_int(cells[0], ctx));
    e.t_lc = parse_int(cells[1], ctx);
    e.from_lane = static_cast<int>(parse_int(cells[2], ctx));
    e.to_lane = static_cast<int>(parse_int(cells[3], ctx));
    e.direction = direction_from_string(trim(cells[4]));
    events.push_back(e);
  }
  return events;
}

}  // namespace lcp
