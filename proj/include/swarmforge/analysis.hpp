#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmforge/records.hpp"
#include "swarmforge/store.hpp"

namespace swarmforge::analysis {

class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

enum class SeriesDirection { Down, Up };

struct SpeedSeries {
  std::int64_t peer_id = 0;
  SeriesDirection direction = SeriesDirection::Down;
  // (seconds from session start, bytes/s); t strictly increasing.
  std::vector<std::pair<std::int64_t, std::int64_t>> points;
  Timestamp session_start = 0;
};

// One forward-difference sample, kept exact as dv/dt so telescoping sums
// reconstruct the speed series without rounding.
struct AccelPoint {
  std::int64_t t = 0;
  std::int64_t dv = 0;  // bytes/s change over the step
  std::int64_t dt = 1;  // step seconds (> 1 across gaps)

  double value() const { return static_cast<double>(dv) / static_cast<double>(dt); }
  bool operator==(const AccelPoint&) const = default;
};

struct AccelSeries {
  std::int64_t peer_id = 0;
  SeriesDirection direction = SeriesDirection::Down;
  std::vector<AccelPoint> points;  // one fewer than the speed series
};

struct MessageStats {
  std::int64_t peer_id = 0;
  Timestamp t0 = 0;
  Timestamp t1 = 0;
  // Indexed by MessageKind.
  std::array<std::uint64_t, kMessageKindCount> sent{};
  std::array<std::uint64_t, kMessageKindCount> received{};

  std::uint64_t total() const;
};

struct ComparisonResult {
  SpeedSeries speed_a, speed_b;
  AccelSeries accel_a, accel_b;
  MessageStats stats_a, stats_b;
  Timestamp common_t0 = 0, common_t1 = 0;
};

SpeedSeries speed_series(const store::Store& store, std::int64_t peer_id,
                         SeriesDirection direction, Timestamp t0, Timestamp t1);

// Forward difference over actual timestamps; gaps widen dt, nothing is
// interpolated.
AccelSeries acceleration_series(const SpeedSeries& speed);

MessageStats message_stats(const store::Store& store, std::int64_t peer_id,
                           Timestamp t0, Timestamp t1);

ComparisonResult compare(const store::Store& store, std::int64_t peer_a,
                         std::int64_t peer_b, Timestamp t0, Timestamp t1);

// Fraction of the cap below which acceleration counts as "stable".
inline constexpr double kStableAccelFraction = 0.05;

// First t after which |a| stays below kStableAccelFraction * cap for every
// remaining point; nullopt when the series never stabilizes.
std::optional<std::int64_t> detect_bootstrap(const AccelSeries& accel,
                                             std::uint64_t cap);

void export_series_csv(const SpeedSeries& series, const std::string& path);
void export_accel_csv(const AccelSeries& series, const std::string& path);
void export_stats_csv(const MessageStats& stats, const std::string& path);

void export_series_svg(const SpeedSeries& series, const std::string& path);
void export_stats_svg(const MessageStats& stats, const std::string& path);

}  // namespace swarmforge::analysis
