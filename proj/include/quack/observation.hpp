#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quack/map.hpp"
#include "quack/state.hpp"

namespace quack {

// An SVG document plus its canvas size.
struct RenderedView {
  std::string svg;
  int width = 0;
  int height = 0;
};

struct SeenMove {
  std::string player;
  bool departed = false;
  std::string room;   // the viewer's room
  std::string other;  // far end of the corridor
};

struct AdjacentRoom {
  std::string room;
  int cost = 0;
};

struct TaskLine {
  std::string room;
  int progress = 0;
  int duration = 0;
  bool done = false;
};

struct HeardChat {
  std::string speaker;
  std::string text;
};

struct SpokenLine {
  std::string speaker;
  int round = 0;
  std::string text;
};

struct MeetingView {
  std::string reason;  // "report" or "emergency"
  std::string caller;
  std::vector<std::string> victims;
  std::vector<std::string> speaking_order;
  std::vector<SpokenLine> transcript;
  std::vector<std::string> known_dead;
};

// Text-side view of one agent's perception. Everything a policy needs to
// choose an action, and nothing about players it cannot see.
struct StructuredSummary {
  int tick = 0;
  Phase phase = Phase::FreeRoam;
  std::string viewer;
  Role role = Role::Goose;
  std::vector<std::string> teammates;  // Ducks only

  std::optional<std::string> room;
  std::optional<std::string> transit_from;
  std::optional<std::string> transit_to;
  int transit_remaining = 0;

  std::vector<std::string> players_here;
  std::vector<std::string> bodies_here;
  std::vector<SeenMove> moves;
  std::vector<AdjacentRoom> adjacent;
  std::vector<TaskLine> tasks;
  std::vector<HeardChat> chat;
  std::optional<int> kill_cooldown;  // Ducks only

  std::optional<MeetingView> meeting;  // Discussion and Voting only
  std::optional<std::string> meeting_result;  // Ejection only

  // Fixed template, stable ordering.
  std::string to_text() const;
};

struct Observation {
  RenderedView global_view;
  RenderedView local_view;
  StructuredSummary summary;
};

// Throws RuleError for a dead or unknown viewer.
Observation build_observation(const GameState& s, const Map& map, const GameConfig& cfg, PlayerId viewer);
StructuredSummary build_summary(const GameState& s, const Map& map, const GameConfig& cfg, PlayerId viewer);

// Render-only entry points.
RenderedView render_global(const GameState& s, const Map& map, PlayerId viewer);
RenderedView render_local(const GameState& s, const Map& map, PlayerId viewer);

// Room coordinates for drawing: the map's own layout when present, a seeded
// force-directed embedding otherwise.
std::vector<LayoutPoint> room_positions(const Map& map);

}  // namespace quack
