#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "lcp/core_data.hpp"

namespace lcp {

// The eight presence patterns of the surrounding vehicles:
//   v1 = nearest leader on the ego's lane,
//   v2 = nearest leader on the adjacent (target) lane,
//   v3 = nearest follower on the adjacent lane.
enum class Scenario { a, b, c, d, e, f, g, h };

char to_char(Scenario s);

// Total and exclusive over the 2^3 presence patterns.
Scenario classify_scenario(bool has_v1, bool has_v2, bool has_v3);

struct NeighborContext {
  int ego_id = 0;
  std::int64_t frame = 0;
  std::optional<TrajectoryRecord> v1;
  std::optional<TrajectoryRecord> v2;
  std::optional<TrajectoryRecord> v3;
  Scenario scenario = Scenario::h;
};

// Nearest-neighbor lookup around the ego at one frame. v1 is strictly ahead
// on the ego's lane; v2 is at or ahead of the ego's position on the adjacent
// lane (ties go to v2); v3 is strictly behind on the adjacent lane. The
// adjacent lane is ego.lane - 1 for left, + 1 for right.
NeighborContext find_neighbors(const Dataset& ds, int ego_id,
                               std::int64_t frame,
                               Direction direction = Direction::left);

struct LaneChangeEvent {
  int vehicle_id = 0;
  std::int64_t t_lc = 0;  // first frame on the new lane
  int from_lane = 0;
  int to_lane = 0;
  Direction direction = Direction::left;

  bool operator==(const LaneChangeEvent&) const = default;
};

// One event per consecutive-frame +-1 lane transition, sorted by
// (vehicle_id, t_lc). A jump of two or more lanes in one tick is an
// integrity error.
std::vector<LaneChangeEvent> detect_lane_changes(const Dataset& ds);

// Events usable for one task direction: direction matches and both lanes
// survive preprocess() for that direction.
std::vector<LaneChangeEvent> select_task_events(
    const std::vector<LaneChangeEvent>& events, Direction direction);

void write_events(std::ostream& out, const std::vector<LaneChangeEvent>& events);
std::vector<LaneChangeEvent> read_events(std::istream& in);

}  // namespace lcp
