#include "lcp/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lcp/errors.hpp"
#include "lcp/rng.hpp"
#include "lcp/text.hpp"

namespace lcp {

namespace {

constexpr double kDt = 0.1;
constexpr double kMaxAccel = 3.0;      // m/s^2 clip
constexpr double kMinGap = 5.0;        // m, standstill buffer
constexpr double kTimeHeadway = 1.4;   // s, gap control
constexpr double kRelax = 1.0;         // s, speed relaxation
constexpr double kShoulderLevel = 0.15;  // fraction of the speed deficit

}  // namespace

std::int64_t SynthConfig::duration_ticks() const {
  return static_cast<std::int64_t>(std::llround(duration_s * 10.0));
}

int SynthConfig::home_lane(int vehicle_id) const {
  return (vehicle_id - 1) / vehicles_per_lane + 1;
}

int synth_vehicle_id(const SynthConfig& cfg, int lane, int slot) {
  if (lane < 1 || lane > cfg.lanes || slot < 0 || slot >= cfg.vehicles_per_lane)
    throw config_error("no such lane/slot in the generator grid");
  return (lane - 1) * cfg.vehicles_per_lane + slot + 1;
}

void SynthConfig::validate() const {
  if (lanes < 1 || lanes > 7) throw config_error("lanes must be in 1..7");
  if (vehicles_per_lane < 1) throw config_error("vehicles_per_lane must be >= 1");
  if (duration_s <= 0) throw config_error("duration_s must be positive");
  if (nominal_speed < 0) throw config_error("nominal_speed must be >= 0");
  if (spacing <= 0) throw config_error("spacing must be positive");
  if (noise_amp < 0) throw config_error("noise_amp must be >= 0");
  if (noise_period_s <= 0) throw config_error("noise_period_s must be positive");
  if (signature_gap < 0) throw config_error("signature_gap must be >= 0");
  if (signature_lead_s <= 0) throw config_error("signature_lead_s must be positive");
  if (signature_shoulder_s < 0) throw config_error("signature_shoulder_s must be >= 0");
  if (change_separation_s < 0) throw config_error("change_separation_s must be >= 0");

  const std::int64_t ticks = duration_ticks();
  const int vehicle_count = lanes * vehicles_per_lane;
  std::map<int, std::vector<const ScriptedChange*>> per_vehicle;
  for (const auto& c : script) {
    if (c.vehicle_id < 1 || c.vehicle_id > vehicle_count)
      throw config_error("scripted change names unknown vehicle " +
                         std::to_string(c.vehicle_id));
    if (c.t_lc < 1 || c.t_lc >= ticks)
      throw config_error("scripted change at tick " + std::to_string(c.t_lc) +
                         " outside the run");
    per_vehicle[c.vehicle_id].push_back(&c);
  }
  const auto sep_ticks =
      static_cast<std::int64_t>(std::llround(change_separation_s * 10.0));
  for (auto& [vid, changes] : per_vehicle) {
    std::sort(changes.begin(), changes.end(),
              [](const ScriptedChange* a, const ScriptedChange* b) {
                return a->t_lc < b->t_lc;
              });
    int lane = home_lane(vid);
    for (std::size_t i = 0; i < changes.size(); ++i) {
      if (i > 0 && changes[i]->t_lc - changes[i - 1]->t_lc < sep_ticks)
        throw config_error("vehicle " + std::to_string(vid) +
                           " has scripted changes closer than " +
                           format_fixed(change_separation_s, 1) + " s");
      lane += changes[i]->direction == Direction::left ? -1 : 1;
      if (lane < 1 || lane > lanes)
        throw config_error("vehicle " + std::to_string(vid) +
                           " scripted off the road at tick " +
                           std::to_string(changes[i]->t_lc));
    }
  }
}

SynthConfig SynthConfig::from_stream(std::istream& in) {
  SynthConfig cfg;
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    const std::string ctx = "synth config line " + std::to_string(row);
    auto num = [&]() {
      std::string v;
      if (!(ss >> v)) throw parse_error(ctx + ": missing value for " + key);
      return parse_double(v, ctx);
    };
    if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num());
    else if (key == "lanes") cfg.lanes = static_cast<int>(num());
    else if (key == "vehicles_per_lane") cfg.vehicles_per_lane = static_cast<int>(num());
    else if (key == "duration_s") cfg.duration_s = num();
    else if (key == "nominal_speed") cfg.nominal_speed = num();
    else if (key == "spacing") cfg.spacing = num();
    else if (key == "noise_amp") cfg.noise_amp = num();
    else if (key == "noise_period_s") cfg.noise_period_s = num();
    else if (key == "signature_gap") cfg.signature_gap = num();
    else if (key == "signature_lead_s") cfg.signature_lead_s = num();
    else if (key == "signature_shoulder_s") cfg.signature_shoulder_s = num();
    else if (key == "change_separation_s") cfg.change_separation_s = num();
    else if (key == "change") {
      ScriptedChange c;
      std::string vid, tick, dir;
      if (!(ss >> vid >> tick >> dir))
        throw parse_error(ctx + ": change needs <vehicle> <tick> <left|right>");
      c.vehicle_id = static_cast<int>(parse_int(vid, ctx));
      c.t_lc = parse_int(tick, ctx);
      c.direction = direction_from_string(dir);
      cfg.script.push_back(c);
    } else {
      throw parse_error(ctx + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SynthConfig SynthConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  return from_stream(in);
}

void SynthConfig::write(std::ostream& out) const {
  out << "seed " << seed << '\n'
      << "lanes " << lanes << '\n'
      << "vehicles_per_lane " << vehicles_per_lane << '\n'
      << "duration_s " << format_exact(duration_s) << '\n'
      << "nominal_speed " << format_exact(nominal_speed) << '\n'
      << "spacing " << format_exact(spacing) << '\n'
      << "noise_amp " << format_exact(noise_amp) << '\n'
      << "noise_period_s " << format_exact(noise_period_s) << '\n'
      << "signature_gap " << format_exact(signature_gap) << '\n'
      << "signature_lead_s " << format_exact(signature_lead_s) << '\n'
      << "signature_shoulder_s " << format_exact(signature_shoulder_s) << '\n'
      << "change_separation_s " << format_exact(change_separation_s) << '\n';
  for (const auto& c : script) {
    out << "change " << c.vehicle_id << ' ' << c.t_lc << ' '
        << to_string(c.direction) << '\n';
  }
}

namespace {

struct VehicleState {
  int id = 0;
  int lane = 0;
  double pos = 0.0;
  double speed = 0.0;
  double phase = 0.0;
};

// Speed deficit demanded by the scripted cue at tick t, or 0 outside it.
// The deficit ramps linearly to delta_v across the lead time; a nonzero
// shoulder prepends a weak easing up to kShoulderLevel * delta_v.
double cue_deficit(const SynthConfig& cfg, const ScriptedChange& change,
                   std::int64_t t) {
  if (cfg.signature_gap <= 0.0) return 0.0;
  const double delta_v = 2.0 * cfg.signature_gap / cfg.signature_lead_s;
  const auto lead = static_cast<std::int64_t>(std::llround(cfg.signature_lead_s * 10.0));
  const auto shoulder =
      static_cast<std::int64_t>(std::llround(cfg.signature_shoulder_s * 10.0));
  if (t > change.t_lc || t < change.t_lc - lead - shoulder) return 0.0;
  const std::int64_t onset = change.t_lc - lead;
  if (t < onset) {
    const double frac = static_cast<double>(t - (onset - shoulder)) /
                        static_cast<double>(shoulder);
    return kShoulderLevel * delta_v * frac;
  }
  const double frac = static_cast<double>(t - onset) / static_cast<double>(lead);
  if (shoulder > 0)
    return delta_v * (kShoulderLevel + (1.0 - kShoulderLevel) * frac);
  return delta_v * frac;
}

}  // namespace

Dataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::int64_t ticks = cfg.duration_ticks();
  const int n = cfg.lanes * cfg.vehicles_per_lane;

  std::vector<VehicleState> state(static_cast<std::size_t>(n));
  SplitMix64 rng(cfg.seed);
  for (int i = 0; i < n; ++i) {
    VehicleState& v = state[static_cast<std::size_t>(i)];
    v.id = i + 1;
    v.lane = cfg.home_lane(v.id);
    const int slot = i % cfg.vehicles_per_lane;
    // Half-spacing stagger between adjacent lanes puts every mid-pack
    // vehicle between an adjacent-lane leader and follower.
    v.pos = slot * cfg.spacing + (v.lane - 1) * 0.5 * cfg.spacing;
    v.speed = cfg.nominal_speed;
    v.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  std::map<int, std::vector<ScriptedChange>> script_of;
  for (const auto& c : cfg.script) script_of[c.vehicle_id].push_back(c);

  std::vector<TrajectoryRecord> records;
  records.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(ticks));

  std::vector<int> order(static_cast<std::size_t>(n));
  std::vector<double> accel(static_cast<std::size_t>(n));
  for (std::int64_t t = 0; t < ticks; ++t) {
    // Scripted lane flips take effect at exactly t.
    for (auto& v : state) {
      auto it = script_of.find(v.id);
      if (it == script_of.end()) continue;
      for (const auto& c : it->second) {
        if (c.t_lc == t)
          v.lane += c.direction == Direction::left ? -1 : 1;
      }
    }

    // Same-lane ordering for leader/follower lookup.
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& va = state[static_cast<std::size_t>(a)];
      const auto& vb = state[static_cast<std::size_t>(b)];
      if (va.lane != vb.lane) return va.lane < vb.lane;
      if (va.pos != vb.pos) return va.pos < vb.pos;
      return va.id < vb.id;
    });
    std::vector<int> leader_of(static_cast<std::size_t>(n), 0);
    std::vector<int> follower_of(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const auto& cur = state[static_cast<std::size_t>(order[k])];
      const auto& nxt = state[static_cast<std::size_t>(order[k + 1])];
      if (cur.lane == nxt.lane) {
        leader_of[static_cast<std::size_t>(order[k])] = nxt.id;
        follower_of[static_cast<std::size_t>(order[k + 1])] = cur.id;
      }
    }

    // Synchronous control step from the state at t.
    const double time_s = static_cast<double>(t) * kDt;
    for (int i = 0; i < n; ++i) {
      VehicleState& v = state[static_cast<std::size_t>(i)];
      double target = cfg.nominal_speed +
                      cfg.noise_amp * std::sin(2.0 * std::numbers::pi * time_s /
                                                   cfg.noise_period_s +
                                               v.phase);
      auto it = script_of.find(v.id);
      if (it != script_of.end()) {
        for (const auto& c : it->second) target -= cue_deficit(cfg, c, t);
      }
      if (leader_of[static_cast<std::size_t>(i)] != 0) {
        const auto& lead = state[static_cast<std::size_t>(leader_of[static_cast<std::size_t>(i)] - 1)];
        const double gap = lead.pos - v.pos;
        target = std::min(target, (gap - kMinGap) / kTimeHeadway);
      }
      accel[static_cast<std::size_t>(i)] =
          std::clamp((target - v.speed) / kRelax, -kMaxAccel, kMaxAccel);
    }

    // Record the state at t, then integrate; headway and neighbor ids must
    // all come from the pre-update positions.
    std::vector<double> next_speed(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const VehicleState& v = state[static_cast<std::size_t>(i)];
      next_speed[static_cast<std::size_t>(i)] =
          std::max(0.0, v.speed + accel[static_cast<std::size_t>(i)] * kDt);
      const double recorded_accel =
          (next_speed[static_cast<std::size_t>(i)] - v.speed) / kDt;

      TrajectoryRecord r;
      r.vehicle_id = v.id;
      r.frame = t;
      r.lane = v.lane;
      r.position = quantize_fixed(v.pos);
      r.velocity = quantize_fixed(v.speed);
      r.acceleration = quantize_fixed(recorded_accel);
      const int lead_id = leader_of[static_cast<std::size_t>(i)];
      const double headway =
          lead_id != 0 ? state[static_cast<std::size_t>(lead_id - 1)].pos - v.pos : 0.0;
      r.headway = quantize_fixed(std::max(0.0, headway));
      r.vehicle_class = 2;
      if (follower_of[static_cast<std::size_t>(i)] != 0)
        r.follower_id = follower_of[static_cast<std::size_t>(i)];
      if (lead_id != 0) r.leader_id = lead_id;
      records.push_back(r);
    }
    for (int i = 0; i < n; ++i) {
      VehicleState& v = state[static_cast<std::size_t>(i)];
      v.speed = next_speed[static_cast<std::size_t>(i)];
      v.pos += v.speed * kDt;
    }
  }
  return Dataset::from_records(std::move(records), Dataset::Contiguity::require);
}

}  // namespace lcp
