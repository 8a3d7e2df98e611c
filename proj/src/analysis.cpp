#include "swarmforge/analysis.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace swarmforge::analysis {

namespace {

constexpr Timestamp kFarFuture = std::numeric_limits<Timestamp>::max() / 2;

Timestamp session_start_of(const store::Store& store, std::int64_t peer_id) {
  const auto all = store.query_status(peer_id, 0, kFarFuture);
  if (all.empty()) {
    throw AnalysisError("EmptyWindow: peer " + std::to_string(peer_id) +
                        " has no status rows");
  }
  return all.front().timestamp;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw AnalysisError("IO_ERROR: cannot write " + path);
  return out;
}

}  // namespace

std::uint64_t MessageStats::total() const {
  std::uint64_t sum = 0;
  for (int k = 0; k < kMessageKindCount; ++k) sum += sent[k] + received[k];
  return sum;
}

SpeedSeries speed_series(const store::Store& store, std::int64_t peer_id,
                         SeriesDirection direction, Timestamp t0, Timestamp t1) {
  const Timestamp start = session_start_of(store, peer_id);
  const auto rows = store.query_status(peer_id, t0, t1);
  if (rows.empty()) {
    throw AnalysisError("EmptyWindow: no status rows in window");
  }
  SpeedSeries series;
  series.peer_id = peer_id;
  series.direction = direction;
  series.session_start = start;
  for (const auto& rec : rows) {
    const std::int64_t t = rec.timestamp - start;
    if (!series.points.empty() && series.points.back().first >= t) continue;
    const std::uint64_t v =
        direction == SeriesDirection::Down ? rec.down_speed : rec.up_speed;
    series.points.emplace_back(t, static_cast<std::int64_t>(v));
  }
  return series;
}

AccelSeries acceleration_series(const SpeedSeries& speed) {
  if (speed.points.size() < 2) {
    throw AnalysisError("SeriesTooShort: need >= 2 speed points");
  }
  AccelSeries accel;
  accel.peer_id = speed.peer_id;
  accel.direction = speed.direction;
  accel.points.reserve(speed.points.size() - 1);
  for (std::size_t i = 0; i + 1 < speed.points.size(); ++i) {
    const auto& [t0, v0] = speed.points[i];
    const auto& [t1, v1] = speed.points[i + 1];
    accel.points.push_back(AccelPoint{t0, v1 - v0, t1 - t0});
  }
  return accel;
}

MessageStats message_stats(const store::Store& store, std::int64_t peer_id,
                           Timestamp t0, Timestamp t1) {
  MessageStats stats;
  stats.peer_id = peer_id;
  stats.t0 = t0;
  stats.t1 = t1;
  for (const auto& rec : store.query_messages(peer_id, t0, t1)) {
    auto& bucket =
        rec.direction == Direction::Sent ? stats.sent : stats.received;
    ++bucket[static_cast<int>(rec.kind)];
  }
  return stats;
}

ComparisonResult compare(const store::Store& store, std::int64_t peer_a,
                         std::int64_t peer_b, Timestamp t0, Timestamp t1) {
  const auto span = [&](std::int64_t peer) {
    const auto rows = store.query_status(peer, 0, kFarFuture);
    if (rows.empty()) {
      throw AnalysisError("EmptyWindow: peer " + std::to_string(peer) +
                          " has no status rows");
    }
    return std::pair<Timestamp, Timestamp>(rows.front().timestamp,
                                           rows.back().timestamp + 1);
  };
  const auto [a0, a1] = span(peer_a);
  const auto [b0, b1] = span(peer_b);
  const Timestamp c0 = std::max({a0, b0, t0});
  const Timestamp c1 = std::min({a1, b1, t1});
  if (c1 <= c0) {
    throw AnalysisError("DisjointWindows: sessions do not overlap");
  }
  ComparisonResult result;
  result.common_t0 = c0;
  result.common_t1 = c1;
  result.speed_a = speed_series(store, peer_a, SeriesDirection::Down, c0, c1);
  result.speed_b = speed_series(store, peer_b, SeriesDirection::Down, c0, c1);
  result.accel_a = acceleration_series(result.speed_a);
  result.accel_b = acceleration_series(result.speed_b);
  result.stats_a = message_stats(store, peer_a, c0, c1);
  result.stats_b = message_stats(store, peer_b, c0, c1);
  return result;
}

std::optional<std::int64_t> detect_bootstrap(const AccelSeries& accel,
                                             std::uint64_t cap) {
  if (accel.points.empty()) {
    throw AnalysisError("SeriesTooShort: empty acceleration series");
  }
  // |a| < 0.05*cap  <=>  20*|dv| < cap*dt, kept in integers.
  const auto stable = [cap](const AccelPoint& p) {
    const std::uint64_t lhs = 20ull * static_cast<std::uint64_t>(std::llabs(p.dv));
    return lhs < cap * static_cast<std::uint64_t>(p.dt);
  };
  std::size_t k = accel.points.size();
  while (k > 0 && stable(accel.points[k - 1])) --k;
  if (k == accel.points.size()) return std::nullopt;  // last point unstable
  return accel.points[k].t;
}

void export_series_csv(const SpeedSeries& series, const std::string& path) {
  auto out = open_out(path);
  out << "t_seconds,bytes_per_second\n";
  for (const auto& [t, v] : series.points) out << t << ',' << v << '\n';
}

void export_accel_csv(const AccelSeries& series, const std::string& path) {
  auto out = open_out(path);
  out << "t_seconds,dv_bytes_per_s,dt_seconds\n";
  for (const auto& p : series.points) {
    out << p.t << ',' << p.dv << ',' << p.dt << '\n';
  }
}

void export_stats_csv(const MessageStats& stats, const std::string& path) {
  auto out = open_out(path);
  out << "kind,sent,received\n";
  for (int k = 0; k < kMessageKindCount; ++k) {
    out << message_kind_name(static_cast<MessageKind>(k)) << ','
        << stats.sent[k] << ',' << stats.received[k] << '\n';
  }
}

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 400;
constexpr int kMargin = 50;

void svg_header(std::ostream& out) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n"
      << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin
      << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\""
      << kMargin << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
}

}  // namespace

void export_series_svg(const SpeedSeries& series, const std::string& path) {
  auto out = open_out(path);
  svg_header(out);
  std::int64_t tmax = 1, vmax = 1;
  for (const auto& [t, v] : series.points) {
    tmax = std::max(tmax, t);
    vmax = std::max(vmax, v);
  }
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" "
         "points=\"";
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  for (const auto& [t, v] : series.points) {
    const double x = kMargin + plot_w * static_cast<double>(t) /
                                   static_cast<double>(tmax);
    const double y = kHeight - kMargin -
                     plot_h * static_cast<double>(v) / static_cast<double>(vmax);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x, y);
    out << buf;
  }
  out << "\"/>\n"
      << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 10
      << "\" font-size=\"12\">peer " << series.peer_id << ' '
      << (series.direction == SeriesDirection::Down ? "download" : "upload")
      << " speed, max " << vmax << " B/s</text>\n</svg>\n";
}

void export_stats_svg(const MessageStats& stats, const std::string& path) {
  auto out = open_out(path);
  svg_header(out);
  std::uint64_t vmax = 1;
  for (int k = 0; k < kMessageKindCount; ++k) {
    vmax = std::max({vmax, stats.sent[k], stats.received[k]});
  }
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  const double group_w = plot_w / kMessageKindCount;
  const double bar_w = group_w / 3.0;
  for (int k = 0; k < kMessageKindCount; ++k) {
    const double x0 = kMargin + k * group_w;
    const auto bar = [&](double x, std::uint64_t v, const char* color) {
      const double h = plot_h * static_cast<double>(v) / static_cast<double>(vmax);
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" "
                    "height=\"%.2f\" fill=\"%s\"/>\n",
                    x, kHeight - kMargin - h, bar_w, h, color);
      out << buf;
    };
    bar(x0 + bar_w * 0.25, stats.sent[k], "steelblue");
    bar(x0 + bar_w * 1.5, stats.received[k], "indianred");
    out << "<text x=\"" << x0 + bar_w << "\" y=\"" << kHeight - kMargin + 15
        << "\" font-size=\"9\" text-anchor=\"middle\">"
        << message_kind_name(static_cast<MessageKind>(k)) << "</text>\n";
  }
  out << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 10
      << "\" font-size=\"12\">peer " << stats.peer_id
      << " message counts (sent/received), max " << vmax << "</text>\n</svg>\n";
}

}  // namespace swarmforge::analysis
