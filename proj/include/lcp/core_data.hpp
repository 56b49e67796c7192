#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lcp {

enum class Direction { left, right };

const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

// One vehicle-frame row of a reconstructed trajectory file. Frames tick at
// 10 Hz; positions are longitudinal meters increasing downstream. A missing
// follower/leader is encoded as 0 in the files and as nullopt here.
struct TrajectoryRecord {
  int vehicle_id = 0;
  std::int64_t frame = 0;
  int lane = 0;  // 1 = leftmost (HOV), 7 = on-ramp
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double headway = 0.0;
  int vehicle_class = 0;
  std::optional<int> follower_id;
  std::optional<int> leader_id;

  bool operator==(const TrajectoryRecord&) const = default;
};

// A contiguous frame run of one vehicle, as [first, first + count) into the
// record array. Lane filtering can split a vehicle into several segments.
struct Segment {
  int vehicle_id = 0;
  int segment_index = 0;
  std::size_t first = 0;
  std::size_t count = 0;
  std::int64_t first_frame = 0;

  std::int64_t last_frame() const {
    return first_frame + static_cast<std::int64_t>(count) - 1;
  }
};

// Immutable, indexed trajectory collection. Records are held in canonical
// (vehicle_id, frame) order regardless of input file order.
class Dataset {
 public:
  static constexpr int kFrameRate = 10;  // ticks per second

  enum class Contiguity {
    require,  // a frame gap within a vehicle is an integrity error
    segment,  // gaps split the vehicle into separate segments
  };

  Dataset() = default;

  // Validates field ranges, neighbor references, duplicates, and (in
  // `require` mode) per-vehicle frame contiguity.
  static Dataset from_records(std::vector<TrajectoryRecord> records,
                              Contiguity mode = Contiguity::require);

  const std::vector<TrajectoryRecord>& records() const { return records_; }
  const std::vector<Segment>& segments() const { return segments_; }

  std::vector<int> vehicles() const;
  bool has_vehicle(int vehicle_id) const;
  std::vector<const Segment*> segments_of(int vehicle_id) const;

  // nullptr when the vehicle has no record at that frame.
  const TrajectoryRecord* find(int vehicle_id, std::int64_t frame) const;

  // Throw lookup_error for unknown vehicles.
  std::int64_t first_frame_of(int vehicle_id) const;
  std::int64_t last_frame_of(int vehicle_id) const;

  // Record indices present at a frame (unsorted); empty for unknown frames.
  std::vector<std::size_t> indices_at_frame(std::int64_t frame) const;

  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }

  bool operator==(const Dataset& other) const {
    return records_ == other.records_;
  }

 private:
  std::vector<TrajectoryRecord> records_;
  std::vector<Segment> segments_;
  // vehicle -> [first, last) range into segments_
  std::unordered_map<int, std::pair<std::size_t, std::size_t>> vehicle_span_;
  std::map<std::int64_t, std::vector<std::size_t>> frame_index_;
};

// Column mapping for delimited-text input. `rename` maps the canonical
// column names (id, frame, lane, pos, v, a, d_h, class, n_f, n_l) to the
// names actually present in the file header.
struct Schema {
  char delimiter = ',';
  std::map<std::string, std::string> rename;

  std::string column(const std::string& canonical) const {
    auto it = rename.find(canonical);
    return it == rename.end() ? canonical : it->second;
  }
};

Dataset load_dataset(std::istream& in, const Schema& schema = {});
Dataset load_dataset_file(const std::filesystem::path& path,
                          const Schema& schema = {});

// Canonical header and column order; doubles at 6 fixed decimals, so
// serialize -> load is the identity on datasets built from such text.
void serialize(const Dataset& ds, std::ostream& out);
void save_dataset_file(const Dataset& ds, const std::filesystem::path& path);

// True when `lane` is dropped for the given maneuver direction: the on-ramp
// (7) always, plus the lane with no adjacent lane in that direction.
bool lane_removed(Direction direction, int lane);

// Drop the removed lanes and re-segment the surviving vehicle runs.
Dataset preprocess(const Dataset& ds, Direction direction);

// All records at a frame, sorted by (lane, position, vehicle_id).
std::vector<TrajectoryRecord> snapshot(const Dataset& ds, std::int64_t frame);

}  // namespace lcp
