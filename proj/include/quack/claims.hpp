#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "quack/chat_client.hpp"
#include "quack/eventlog.hpp"
#include "quack/map.hpp"

namespace quack {

enum class ClaimType { Location, Route, Sighting, Activity, Accusation, Defense };
enum class ActivityKind { Task, Traveling, Waiting };
enum class Confidence { Strong, Moderate, Weak };

std::string_view to_string(ClaimType t);
std::string_view to_string(ActivityKind a);
std::string_view to_string(Confidence c);

// One checkable assertion. For Accusation `subject` is the accuser, for
// Defense the defender; `target` is the seen / accused / defended player.
struct Claim {
  std::string id;
  std::string speaker;
  int meeting = 0;
  int meeting_tick = 0;
  std::uint64_t utterance_seq = 0;

  ClaimType type = ClaimType::Location;
  std::string subject;
  std::optional<std::string> target;
  std::optional<std::string> room;
  std::vector<std::string> route;
  std::optional<ActivityKind> activity;
  std::optional<Confidence> confidence;
  std::string basis;
  std::string temporal;

  // Equality of content, ignoring ids and where it was said.
  bool same_content(const Claim& o) const;
  nlohmann::json to_json() const;
  static Claim from_json(const nlohmann::json& doc);
};

// What the extractor needs to know about the utterance.
struct ClaimContext {
  const Map* map = nullptr;
  std::vector<std::string> players;
  std::string speaker;
  int meeting = 0;
  int meeting_tick = 0;
  std::uint64_t utterance_seq = 0;
};

// Parses every @claim{...} annotation in the utterance. Throws ClaimParseError
// (with the byte offset) on a malformed annotation, unknown player or room.
std::vector<Claim> extract_structured(std::string_view utterance, const ClaimContext& ctx);

// Renders a claim back to its annotation form.
std::string to_dsl(const Claim& c);

// Validates a model reply (a JSON array of Listing-style items). Items that
// fail the schema are dropped; their reasons go to `dropped` when given.
std::vector<Claim> claims_from_items(const nlohmann::json& items, const ClaimContext& ctx,
                                     std::vector<std::string>* dropped = nullptr);

// -- Model channel --------------------------------------------------------------

inline constexpr std::string_view kExtractionPromptVersion = "extraction.v1";

// The extraction prompt with every placeholder filled.
std::string extraction_prompt(std::string_view utterance, const ClaimContext& ctx);

// Line-delimited (prompt version, speaker, meeting tick, utterance) -> raw
// reply store. Replies are cached raw so a re-run reparses identically.
class ExtractionCache {
 public:
  ExtractionCache() = default;
  static ExtractionCache load(const std::string& path);  // missing file = empty
  void save(const std::string& path) const;

  const std::string* find(const std::string& key) const;
  void insert(const std::string& key, std::string reply);
  std::size_t size() const { return entries_.size(); }

  static std::string key(std::string_view utterance, const ClaimContext& ctx);

 private:
  std::map<std::string, std::string> entries_;
};

// Cached model extraction. Transport failures propagate; a reply that is not a
// JSON array throws ClaimParseError and is not cached.
std::vector<Claim> extract_model(std::string_view utterance, const ClaimContext& ctx, ChatClient* client,
                                 ExtractionCache& cache, std::vector<std::string>* dropped = nullptr);

// -- Temporal references ---------------------------------------------------------

struct TemporalRules {
  int start_ticks = 3;   // "at the start"
  int recent_ticks = 3;  // "just now", "right before the report"
  int tolerance = 1;     // "tick T" -> [T - tolerance, T + tolerance]
};

// The free-roam stretch a meeting's claims may talk about, in ticks and in
// event sequence numbers.
struct Segment {
  int start_tick = 0;
  int end_tick = 0;
  std::uint64_t start_seq = 0;  // GameStart or the previous Respawned
  std::uint64_t end_seq = 0;    // the meeting's trigger event
};

struct TickWindow {
  int start = 0;
  int end = 0;
  bool duration = false;  // "the whole time" class
  std::string rule;
  bool operator==(const TickWindow&) const = default;
};

// nullopt = Unresolvable.
std::optional<TickWindow> resolve_temporal(std::string_view temporal, const Segment& seg,
                                           const TemporalRules& rules = {});

Segment segment_of(const GameLog& log, const LoggedMeeting& meeting);

// -- Sidecars --------------------------------------------------------------------

std::string serialize_claims(const std::vector<Claim>& claims);
std::vector<Claim> parse_claims(std::string_view bytes);

// All claims of a log through the structured channel, meeting by meeting.
// Malformed annotations are skipped and reported through `errors`.
std::vector<Claim> extract_log_structured(const GameLog& log, std::vector<std::string>* errors = nullptr);
// Same through the model channel.
std::vector<Claim> extract_log_model(const GameLog& log, ChatClient* client, ExtractionCache& cache,
                                     std::vector<std::string>* errors = nullptr);

}  // namespace quack
