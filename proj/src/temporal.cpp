#include <algorithm>
#include <regex>

#include "quack/claims.hpp"
#include "quack/error.hpp"
#include "quack/util.hpp"

namespace quack {

namespace {

bool has_any(const std::string& text, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(),
                     [&](std::string_view n) { return text.find(n) != std::string::npos; });
}

}  // namespace

std::optional<TickWindow> resolve_temporal(std::string_view temporal, const Segment& seg, const TemporalRules& rules) {
  const auto text = to_lower(trim(temporal));
  std::optional<TickWindow> w;

  static const std::regex kRange(R"(ticks?\s+(\d+)\s*(?:-|to|through|and)\s*(?:tick\s+)?(\d+))");
  static const std::regex kSingle(R"(tick\s+(\d+))");
  std::smatch m;

  if (has_any(text, {"the whole time", "whole time", "entire time", "all the time"})) {
    w = TickWindow{seg.start_tick, seg.end_tick, true, "whole_time"};
  } else if (std::regex_search(text, m, kRange)) {
    const int a = std::stoi(m[1]);
    const int b = std::stoi(m[2]);
    if (a <= b) w = TickWindow{a - rules.tolerance, b + rules.tolerance, false, "tick_range"};
  } else if (std::regex_search(text, m, kSingle)) {
    const int t = std::stoi(m[1]);
    w = TickWindow{t - rules.tolerance, t + rules.tolerance, false, "tick"};
  } else if (has_any(text, {"at the start", "at the beginning", "start of the round", "beginning of the round"})) {
    w = TickWindow{seg.start_tick, seg.start_tick + rules.start_ticks - 1, false, "start"};
  } else if (has_any(text, {"just now", "right before the report", "right before the meeting", "just before",
                            "when i found the body", "found the body"})) {
    w = TickWindow{seg.end_tick - rules.recent_ticks + 1, seg.end_tick, false, "recent"};
  } else if (has_any(text, {"this round", "since the last meeting", "since the meeting", "this segment"})) {
    w = TickWindow{seg.start_tick, seg.end_tick, false, "segment"};
  }
  if (!w) return std::nullopt;
  w->start = std::max(w->start, seg.start_tick);
  w->end = std::min(w->end, seg.end_tick);
  if (w->start > w->end) return std::nullopt;
  return w;
}

Segment segment_of(const GameLog& log, const LoggedMeeting& meeting) {
  Segment seg;
  seg.start_seq = 0;
  seg.start_tick = 0;
  for (const auto& e : log.events()) {
    if (e.seq >= meeting.record.trigger_seq) break;
    if (e.kind == EventKind::Respawned) {
      seg.start_seq = e.seq;
      seg.start_tick = e.tick;
    }
  }
  seg.end_seq = meeting.record.trigger_seq;
  seg.end_tick = meeting.record.tick;
  return seg;
}

}  // namespace quack
