#include "lcp/core_data.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "lcp/errors.hpp"
#include "lcp/text.hpp"

namespace lcp {

const char* to_string(Direction d) {
  return d == Direction::left ? "left" : "right";
}

Direction direction_from_string(const std::string& s) {
  if (s == "left") return Direction::left;
  if (s == "right") return Direction::right;
  throw config_error("unknown direction '" + s + "' (expected left or right)");
}

namespace {

void validate_record(const TrajectoryRecord& r) {
  const std::string ctx = "vehicle " + std::to_string(r.vehicle_id) +
                          ", frame " + std::to_string(r.frame);
  if (r.vehicle_id <= 0)
    throw integrity_error(ctx + ": vehicle id must be positive");
  if (r.frame < 0) throw integrity_error(ctx + ": frame must be non-negative");
  if (r.lane < 1 || r.lane > 7)
    throw integrity_error(ctx + ": lane " + std::to_string(r.lane) +
                          " outside 1..7");
  if (r.velocity < 0.0)
    throw integrity_error(ctx + ": negative velocity");
  if (r.headway < 0.0) throw integrity_error(ctx + ": negative headway");
  if (r.follower_id && *r.follower_id <= 0)
    throw integrity_error(ctx + ": follower id must be positive or absent");
  if (r.leader_id && *r.leader_id <= 0)
    throw integrity_error(ctx + ": leader id must be positive or absent");
}

}  // namespace

Dataset Dataset::from_records(std::vector<TrajectoryRecord> records,
                              Contiguity mode) {
  Dataset ds;
  std::sort(records.begin(), records.end(),
            [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
              if (a.vehicle_id != b.vehicle_id)
                return a.vehicle_id < b.vehicle_id;
              return a.frame < b.frame;
            });
  ds.records_ = std::move(records);

  for (const auto& r : ds.records_) validate_record(r);

  // Segment boundaries and contiguity.
  std::size_t i = 0;
  while (i < ds.records_.size()) {
    const int vid = ds.records_[i].vehicle_id;
    int seg_index = 0;
    const std::size_t vehicle_seg_begin = ds.segments_.size();
    std::size_t seg_first = i;
    while (i < ds.records_.size() && ds.records_[i].vehicle_id == vid) {
      const bool last_of_vehicle = i + 1 >= ds.records_.size() ||
                                   ds.records_[i + 1].vehicle_id != vid;
      if (!last_of_vehicle) {
        const std::int64_t cur = ds.records_[i].frame;
        const std::int64_t nxt = ds.records_[i + 1].frame;
        if (nxt == cur) {
          throw integrity_error("vehicle " + std::to_string(vid) +
                                ": duplicate frame " + std::to_string(cur));
        }
        if (nxt != cur + 1) {
          if (mode == Contiguity::require) {
            throw integrity_error("vehicle " + std::to_string(vid) +
                                  ": frames not contiguous at frame " +
                                  std::to_string(nxt));
          }
          ds.segments_.push_back({vid, seg_index++, seg_first,
                                  i - seg_first + 1,
                                  ds.records_[seg_first].frame});
          seg_first = i + 1;
        }
      }
      ++i;
    }
    ds.segments_.push_back({vid, seg_index, seg_first, i - seg_first,
                            ds.records_[seg_first].frame});
    ds.vehicle_span_[vid] = {vehicle_seg_begin, ds.segments_.size()};
  }

  for (std::size_t k = 0; k < ds.records_.size(); ++k) {
    ds.frame_index_[ds.records_[k].frame].push_back(k);
  }

  // Neighbor references must resolve at the same frame.
  for (const auto& r : ds.records_) {
    for (const auto& ref : {r.follower_id, r.leader_id}) {
      if (ref && ds.find(*ref, r.frame) == nullptr) {
        throw integrity_error(
            "vehicle " + std::to_string(r.vehicle_id) + ", frame " +
            std::to_string(r.frame) + ": neighbor reference " +
            std::to_string(*ref) + " does not exist at that frame");
      }
    }
  }
  return ds;
}

std::vector<int> Dataset::vehicles() const {
  std::vector<int> out;
  out.reserve(vehicle_span_.size());
  for (const auto& seg : segments_) {
    if (out.empty() || out.back() != seg.vehicle_id)
      out.push_back(seg.vehicle_id);
  }
  return out;
}

bool Dataset::has_vehicle(int vehicle_id) const {
  return vehicle_span_.count(vehicle_id) > 0;
}

std::vector<const Segment*> Dataset::segments_of(int vehicle_id) const {
  std::vector<const Segment*> out;
  auto it = vehicle_span_.find(vehicle_id);
  if (it == vehicle_span_.end()) return out;
  for (std::size_t k = it->second.first; k < it->second.second; ++k)
    out.push_back(&segments_[k]);
  return out;
}

const TrajectoryRecord* Dataset::find(int vehicle_id,
                                      std::int64_t frame) const {
  auto it = vehicle_span_.find(vehicle_id);
  if (it == vehicle_span_.end()) return nullptr;
  for (std::size_t k = it->second.first; k < it->second.second; ++k) {
    const Segment& seg = segments_[k];
    if (frame >= seg.first_frame && frame <= seg.last_frame()) {
      return &records_[seg.first +
                       static_cast<std::size_t>(frame - seg.first_frame)];
    }
  }
  return nullptr;
}

std::int64_t Dataset::first_frame_of(int vehicle_id) const {
  auto it = vehicle_span_.find(vehicle_id);
  if (it == vehicle_span_.end())
    throw lookup_error("unknown vehicle " + std::to_string(vehicle_id));
  return segments_[it->second.first].first_frame;
}

std::int64_t Dataset::last_frame_of(int vehicle_id) const {
  auto it = vehicle_span_.find(vehicle_id);
  if (it == vehicle_span_.end())
    throw lookup_error("unknown vehicle " + std::to_string(vehicle_id));
  return segments_[it->second.second - 1].last_frame();
}

std::vector<std::size_t> Dataset::indices_at_frame(std::int64_t frame) const {
  auto it = frame_index_.find(frame);
  if (it == frame_index_.end()) return {};
  return it->second;
}

namespace {

const char* const kCanonicalColumns[] = {"id", "frame", "lane",  "pos", "v",
                                         "a",  "d_h",   "class", "n_f", "n_l"};

std::optional<int> decode_neighbor(long long raw, const std::string& ctx) {
  if (raw < 0) throw integrity_error(ctx + ": negative neighbor id");
  if (raw == 0) return std::nullopt;
  return static_cast<int>(raw);
}

}  // namespace

Dataset load_dataset(std::istream& in, const Schema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw schema_error("input has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split(line, schema.delimiter);
  std::map<std::string, std::size_t> column_of;
  for (const char* canonical : kCanonicalColumns) {
    const std::string name = schema.column(canonical);
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return trim(h) == name; });
    if (it == header.end()) {
      throw schema_error("missing column '" + name + "' (for '" +
                         std::string(canonical) + "')");
    }
    column_of[canonical] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<TrajectoryRecord> records;
  long long row = 1;  // header was physical line 1
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, schema.delimiter);
    if (cells.size() < header.size()) {
      throw parse_error("row " + std::to_string(row) + ": expected " +
                        std::to_string(header.size()) + " cells, got " +
                        std::to_string(cells.size()));
    }
    const std::string ctx = "row " + std::to_string(row);
    auto cell = [&](const char* canonical) -> const std::string& {
      return cells[column_of[canonical]];
    };
    TrajectoryRecord r;
    r.vehicle_id = static_cast<int>(parse_int(cell("id"), ctx));
    r.frame = parse_int(cell("frame"), ctx);
    r.lane = static_cast<int>(parse_int(cell("lane"), ctx));
    r.position = parse_double(cell("pos"), ctx);
    r.velocity = parse_double(cell("v"), ctx);
    r.acceleration = parse_double(cell("a"), ctx);
    r.headway = parse_double(cell("d_h"), ctx);
    r.vehicle_class = static_cast<int>(parse_int(cell("class"), ctx));
    r.follower_id = decode_neighbor(parse_int(cell("n_f"), ctx), ctx);
    r.leader_id = decode_neighbor(parse_int(cell("n_l"), ctx), ctx);
    records.push_back(r);
  }
  return Dataset::from_records(std::move(records), Dataset::Contiguity::require);
}

Dataset load_dataset_file(const std::filesystem::path& path,
                          const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  return load_dataset(in, schema);
}

void serialize(const Dataset& ds, std::ostream& out) {
  out << "id,frame,lane,pos,v,a,d_h,class,n_f,n_l\n";
  for (const auto& r : ds.records()) {
    out << r.vehicle_id << ',' << r.frame << ',' << r.lane << ','
        << format_fixed(r.position) << ',' << format_fixed(r.velocity) << ','
        << format_fixed(r.acceleration) << ',' << format_fixed(r.headway)
        << ',' << r.vehicle_class << ',' << r.follower_id.value_or(0) << ','
        << r.leader_id.value_or(0) << '\n';
  }
}

void save_dataset_file(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  serialize(ds, out);
}

bool lane_removed(Direction direction, int lane) {
  if (lane == 7) return true;  // on-ramp, always dropped
  if (direction == Direction::left) return lane == 1;
  return lane == 6;  // rightmost main lane has no right neighbor
}

Dataset preprocess(const Dataset& ds, Direction direction) {
  std::vector<TrajectoryRecord> kept;
  kept.reserve(ds.size());
  for (const auto& r : ds.records()) {
    if (!lane_removed(direction, r.lane)) kept.push_back(r);
  }
  return Dataset::from_records(std::move(kept), Dataset::Contiguity::segment);
}

std::vector<TrajectoryRecord> snapshot(const Dataset& ds, std::int64_t frame) {
  std::vector<TrajectoryRecord> out;
  for (std::size_t idx : ds.indices_at_frame(frame))
    out.push_back(ds.records()[idx]);
  std::sort(out.begin(), out.end(),
            [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
              if (a.lane != b.lane) return a.lane < b.lane;
              if (a.position != b.position) return a.position < b.position;
              return a.vehicle_id < b.vehicle_id;
            });
  return out;
}

}  // namespace lcp
