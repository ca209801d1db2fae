#include "quack/claims.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "quack/assets.hpp"
#include "quack/error.hpp"
#include "quack/util.hpp"

namespace quack {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kTypeNames{"location", "route", "sighting", "activity", "accusation", "defense"};
constexpr std::array<std::string_view, 3> kActivityNames{"task", "traveling", "waiting"};
constexpr std::array<std::string_view, 3> kConfidenceNames{"strong", "moderate", "weak"};

template <std::size_t N>
std::optional<std::size_t> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return i;
  }
  return std::nullopt;
}

// Thrown inside validation; callers wrap it with channel-specific context.
struct SchemaError {
  std::string what;
};

std::string resolve_player(const json& v, const ClaimContext& ctx, const char* key) {
  if (!v.is_string()) throw SchemaError{std::string(key) + " must be a string"};
  const auto name = std::string(trim(v.get<std::string>()));
  for (const auto& p : ctx.players) {
    if (p == name) return p;
  }
  const auto lower = to_lower(name);
  for (const auto& p : ctx.players) {
    if (to_lower(p) == lower) return p;
  }
  throw SchemaError{"unknown player '" + name + "'"};
}

std::string resolve_room(const json& v, const ClaimContext& ctx, const char* key) {
  if (!v.is_string()) throw SchemaError{std::string(key) + " must be a string"};
  const auto r = ctx.map->find(v.get<std::string>());
  if (!r) throw SchemaError{"unknown room '" + v.get<std::string>() + "'"};
  return ctx.map->name(*r);
}

std::string text_field(const json& v, const char* key) {
  if (!v.is_string()) throw SchemaError{std::string(key) + " must be a string"};
  return std::string(trim(v.get<std::string>()));
}

Claim validate_item(const json& item, const ClaimContext& ctx) {
  if (!item.is_object()) throw SchemaError{"claim must be an object"};
  if (!item.contains("type")) throw SchemaError{"missing type"};
  const auto tname = to_lower(text_field(item["type"], "type"));
  const auto t = lookup(kTypeNames, tname);
  if (!t) throw SchemaError{"unknown claim type '" + tname + "'"};

  Claim c;
  c.speaker = ctx.speaker;
  c.meeting = ctx.meeting;
  c.meeting_tick = ctx.meeting_tick;
  c.utterance_seq = ctx.utterance_seq;

  std::set<std::string> allowed;
  std::set<std::string> required;
  switch (*t) {
    case 0:
    case 1:
      allowed = {"type", "subject", "room", "route", "temporal"};
      required = {"subject", "temporal"};
      break;
    case 2:
      allowed = {"type", "subject", "target", "room", "temporal"};
      required = {"subject", "target", "room", "temporal"};
      break;
    case 3:
      allowed = {"type", "subject", "activity", "room", "temporal"};
      required = {"subject", "activity", "room", "temporal"};
      break;
    case 4:
      allowed = {"type", "accuser", "target", "confidence"};
      required = {"accuser", "target"};
      break;
    case 5:
      allowed = {"type", "defender", "defended", "basis"};
      required = {"defender", "defended"};
      break;
  }
  for (const auto& [k, v] : item.items()) {
    if (!allowed.count(k)) throw SchemaError{"field '" + k + "' does not belong to a " + tname + " claim"};
  }
  for (const auto& k : required) {
    if (!item.contains(k)) throw SchemaError{tname + " claim missing '" + k + "'"};
  }

  switch (*t) {
    case 0:
    case 1: {
      c.subject = resolve_player(item["subject"], ctx, "subject");
      const bool has_room = item.contains("room");
      const bool has_route = item.contains("route");
      if (has_room == has_route) throw SchemaError{"location claim needs exactly one of room or route"};
      if (has_room) {
        if (*t == 1) throw SchemaError{"route claim needs a route"};
        c.type = ClaimType::Location;
        c.room = resolve_room(item["room"], ctx, "room");
      } else {
        c.type = ClaimType::Route;
        if (!item["route"].is_array()) throw SchemaError{"route must be a list"};
        for (const auto& r : item["route"]) c.route.push_back(resolve_room(r, ctx, "route"));
        if (c.route.size() < 2) throw SchemaError{"route needs at least two rooms"};
      }
      c.temporal = text_field(item["temporal"], "temporal");
      break;
    }
    case 2:
      c.type = ClaimType::Sighting;
      c.subject = resolve_player(item["subject"], ctx, "subject");
      c.target = resolve_player(item["target"], ctx, "target");
      c.room = resolve_room(item["room"], ctx, "room");
      c.temporal = text_field(item["temporal"], "temporal");
      break;
    case 3: {
      c.type = ClaimType::Activity;
      c.subject = resolve_player(item["subject"], ctx, "subject");
      const auto a = lookup(kActivityNames, to_lower(text_field(item["activity"], "activity")));
      if (!a) throw SchemaError{"activity must be task, traveling or waiting"};
      c.activity = static_cast<ActivityKind>(*a);
      c.room = resolve_room(item["room"], ctx, "room");
      c.temporal = text_field(item["temporal"], "temporal");
      break;
    }
    case 4:
      c.type = ClaimType::Accusation;
      c.subject = resolve_player(item["accuser"], ctx, "accuser");
      c.target = resolve_player(item["target"], ctx, "target");
      if (item.contains("confidence")) {
        const auto k = lookup(kConfidenceNames, to_lower(text_field(item["confidence"], "confidence")));
        if (!k) throw SchemaError{"confidence must be strong, moderate or weak"};
        c.confidence = static_cast<Confidence>(*k);
      }
      break;
    case 5:
      c.type = ClaimType::Defense;
      c.subject = resolve_player(item["defender"], ctx, "defender");
      c.target = resolve_player(item["defended"], ctx, "defended");
      if (item.contains("basis")) c.basis = text_field(item["basis"], "basis");
      break;
  }
  return c;
}

void assign_ids(std::vector<Claim>& claims) {
  for (std::size_t i = 0; i < claims.size(); ++i) {
    auto& c = claims[i];
    c.id = "m" + std::to_string(c.meeting) + "." + std::to_string(c.utterance_seq) + "." + std::to_string(i);
  }
}

void push_unique(std::vector<Claim>& out, Claim c) {
  for (const auto& o : out) {
    if (o.same_content(c)) return;
  }
  out.push_back(std::move(c));
}

}  // namespace

std::string_view to_string(ClaimType t) {
  static constexpr std::array<std::string_view, 6> names{"location", "route",      "sighting",
                                                         "activity", "accusation", "defense"};
  return names[static_cast<std::size_t>(t)];
}
std::string_view to_string(ActivityKind a) { return kActivityNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(Confidence c) { return kConfidenceNames[static_cast<std::size_t>(c)]; }

bool Claim::same_content(const Claim& o) const {
  return speaker == o.speaker && type == o.type && subject == o.subject && target == o.target && room == o.room &&
         route == o.route && activity == o.activity && confidence == o.confidence && basis == o.basis &&
         temporal == o.temporal;
}

json Claim::to_json() const {
  json j{{"id", id},
         {"speaker", speaker},
         {"meeting", meeting},
         {"meeting_tick", meeting_tick},
         {"utterance_seq", utterance_seq},
         {"type", to_string(type)},
         {"subject", subject}};
  if (target) j["target"] = *target;
  if (room) j["room"] = *room;
  if (!route.empty()) j["route"] = route;
  if (activity) j["activity"] = to_string(*activity);
  if (confidence) j["confidence"] = to_string(*confidence);
  if (!basis.empty()) j["basis"] = basis;
  if (type != ClaimType::Accusation && type != ClaimType::Defense) j["temporal"] = temporal;
  return j;
}

Claim Claim::from_json(const json& d) {
  Claim c;
  try {
    c.id = d.at("id").get<std::string>();
    c.speaker = d.at("speaker").get<std::string>();
    c.meeting = d.at("meeting").get<int>();
    c.meeting_tick = d.at("meeting_tick").get<int>();
    c.utterance_seq = d.at("utterance_seq").get<std::uint64_t>();
    const auto t = lookup(kTypeNames, d.at("type").get<std::string>());
    if (!t) throw ClaimParseError(0, "unknown claim type in sidecar");
    c.type = static_cast<ClaimType>(*t);
    c.subject = d.at("subject").get<std::string>();
    if (d.contains("target")) c.target = d["target"].get<std::string>();
    if (d.contains("room")) c.room = d["room"].get<std::string>();
    if (d.contains("route")) c.route = d["route"].get<std::vector<std::string>>();
    if (d.contains("activity")) {
      const auto a = lookup(kActivityNames, d["activity"].get<std::string>());
      if (!a) throw ClaimParseError(0, "unknown activity in sidecar");
      c.activity = static_cast<ActivityKind>(*a);
    }
    if (d.contains("confidence")) {
      const auto k = lookup(kConfidenceNames, d["confidence"].get<std::string>());
      if (!k) throw ClaimParseError(0, "unknown confidence in sidecar");
      c.confidence = static_cast<Confidence>(*k);
    }
    if (d.contains("basis")) c.basis = d["basis"].get<std::string>();
    if (d.contains("temporal")) c.temporal = d["temporal"].get<std::string>();
  } catch (const json::exception& e) {
    throw ClaimParseError(0, std::string("bad claim record: ") + e.what());
  }
  return c;
}

// -- Structured channel ----------------------------------------------------------

std::vector<Claim> extract_structured(std::string_view utterance, const ClaimContext& ctx) {
  static constexpr std::string_view kOpen = "@claim{";
  static const std::set<std::string> kKeys{"type",     "subject",  "room",       "route", "target",  "activity",
                                           "accuser",  "defender", "defended",   "confidence", "basis", "temporal"};
  std::vector<Claim> out;
  std::size_t pos = 0;
  while ((pos = utterance.find(kOpen, pos)) != std::string_view::npos) {
    const auto body_start = pos + kOpen.size();
    const auto close = utterance.find('}', body_start);
    if (close == std::string_view::npos) throw ClaimParseError(pos, "unterminated @claim annotation");
    const auto body = utterance.substr(body_start, close - body_start);

    json item = json::object();
    std::size_t field_start = 0;
    for (const auto& field : split(body, ';')) {
      const auto offset = body_start + field_start;
      field_start += field.size() + 1;
      if (trim(field).empty()) continue;
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw ClaimParseError(offset, "expected key=value");
      const auto key = to_lower(trim(std::string_view(field).substr(0, eq)));
      const auto value = std::string(trim(std::string_view(field).substr(eq + 1)));
      if (!kKeys.count(key)) throw ClaimParseError(offset, "unknown key '" + key + "'");
      if (item.contains(key)) throw ClaimParseError(offset, "duplicate key '" + key + "'");
      if (value.empty()) throw ClaimParseError(offset, "empty value for '" + key + "'");
      if (key == "route") {
        json rooms = json::array();
        for (const auto& r : split(value, ',')) rooms.push_back(std::string(trim(r)));
        item[key] = rooms;
      } else {
        item[key] = value;
      }
    }
    try {
      push_unique(out, validate_item(item, ctx));
    } catch (const SchemaError& e) {
      throw ClaimParseError(pos, e.what);
    }
    pos = close + 1;
  }
  assign_ids(out);
  return out;
}

std::string to_dsl(const Claim& c) {
  std::string s = "@claim{type=";
  auto add = [&](const char* k, const std::string& v) { s += std::string(";") + k + "=" + v; };
  switch (c.type) {
    case ClaimType::Location:
    case ClaimType::Route:
      s += "location";
      add("subject", c.subject);
      if (c.type == ClaimType::Route) {
        std::string r;
        for (const auto& x : c.route) r += (r.empty() ? "" : ",") + x;
        add("route", r);
      } else {
        add("room", *c.room);
      }
      add("temporal", c.temporal);
      break;
    case ClaimType::Sighting:
      s += "sighting";
      add("subject", c.subject);
      add("target", *c.target);
      add("room", *c.room);
      add("temporal", c.temporal);
      break;
    case ClaimType::Activity:
      s += "activity";
      add("subject", c.subject);
      add("activity", std::string(to_string(*c.activity)));
      add("room", *c.room);
      add("temporal", c.temporal);
      break;
    case ClaimType::Accusation:
      s += "accusation";
      add("accuser", c.subject);
      add("target", *c.target);
      if (c.confidence) add("confidence", std::string(to_string(*c.confidence)));
      break;
    case ClaimType::Defense:
      s += "defense";
      add("defender", c.subject);
      add("defended", *c.target);
      if (!c.basis.empty()) add("basis", c.basis);
      break;
  }
  return s + "}";
}

std::vector<Claim> claims_from_items(const json& items, const ClaimContext& ctx, std::vector<std::string>* dropped) {
  std::vector<Claim> out;
  if (!items.is_array()) throw ClaimParseError(0, "extraction reply is not a JSON array");
  for (const auto& item : items) {
    try {
      push_unique(out, validate_item(item, ctx));
    } catch (const SchemaError& e) {
      if (dropped) dropped->push_back(e.what + ": " + item.dump());
    }
  }
  assign_ids(out);
  return out;
}

// -- Model channel ---------------------------------------------------------------

std::string extraction_prompt(std::string_view utterance, const ClaimContext& ctx) {
  std::string rooms;
  for (auto r : ctx.map->listing_order()) rooms += (rooms.empty() ? "" : ", ") + ctx.map->name(r);
  std::string players;
  for (const auto& p : ctx.players) players += (players.empty() ? "" : ", ") + p;
  return fill_template(bundled_asset("prompts/extraction.v1.txt"),
                       {{"room_count", std::to_string(ctx.map->room_count())},
                        {"room_list", rooms},
                        {"speaker_name", ctx.speaker},
                        {"meeting_tick", std::to_string(ctx.meeting_tick)},
                        {"player_names", players},
                        {"message", std::string(utterance)}});
}

std::string ExtractionCache::key(std::string_view utterance, const ClaimContext& ctx) {
  return json::array({kExtractionPromptVersion, ctx.speaker, ctx.meeting_tick, utterance}).dump();
}

ExtractionCache ExtractionCache::load(const std::string& path) {
  ExtractionCache c;
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error&) {
    return c;
  }
  std::size_t line_no = 0;
  for (const auto& line : split(bytes, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto doc = json::parse(line);
      c.entries_[doc.at("key").get<std::string>()] = doc.at("reply").get<std::string>();
    } catch (const json::exception& e) {
      throw LogParseError(line_no, std::string("extraction cache: ") + e.what());
    }
  }
  return c;
}

void ExtractionCache::save(const std::string& path) const {
  std::string out;
  for (const auto& [k, v] : entries_) out += json{{"key", k}, {"reply", v}}.dump() + "\n";
  write_file(path, out);
}

const std::string* ExtractionCache::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void ExtractionCache::insert(const std::string& key, std::string reply) { entries_[key] = std::move(reply); }

namespace {

json parse_reply_array(std::string_view reply) {
  auto text = trim(reply);
  // Tolerate a fenced block around the array.
  if (text.substr(0, 3) == "```") {
    const auto nl = text.find('\n');
    const auto fence = text.rfind("```");
    if (nl != std::string_view::npos && fence > nl) text = trim(text.substr(nl + 1, fence - nl - 1));
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ClaimParseError(e.byte, "extraction reply is not valid JSON");
  }
  if (!doc.is_array()) throw ClaimParseError(0, "extraction reply is not a JSON array");
  return doc;
}

}  // namespace

std::vector<Claim> extract_model(std::string_view utterance, const ClaimContext& ctx, ChatClient* client,
                                 ExtractionCache& cache, std::vector<std::string>* dropped) {
  const auto key = ExtractionCache::key(utterance, ctx);
  if (const auto* hit = cache.find(key)) return claims_from_items(parse_reply_array(*hit), ctx, dropped);
  if (!client) throw TransportError("no extraction endpoint configured and no cached reply");
  auto reply = client->complete({{"user", extraction_prompt(utterance, ctx), {}}});
  auto items = parse_reply_array(reply);
  cache.insert(key, std::move(reply));
  return claims_from_items(items, ctx, dropped);
}

// -- Sidecars --------------------------------------------------------------------

std::string serialize_claims(const std::vector<Claim>& claims) {
  std::string out;
  for (const auto& c : claims) out += c.to_json().dump() + "\n";
  return out;
}

std::vector<Claim> parse_claims(std::string_view bytes) {
  std::vector<Claim> out;
  std::size_t line_no = 0;
  for (const auto& line : split(bytes, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(Claim::from_json(json::parse(line)));
    } catch (const json::parse_error&) {
      throw LogParseError(line_no, "claims sidecar: invalid JSON");
    }
  }
  return out;
}

namespace {

template <typename Fn>
std::vector<Claim> extract_log(const GameLog& log, std::vector<std::string>* errors, Fn&& extract) {
  const Map map = map_of(log);
  std::vector<Claim> out;
  for (const auto& e : log.events()) {
    if (e.kind != EventKind::Utterance) continue;
    ClaimContext ctx;
    ctx.map = &map;
    ctx.players = log.header().players;
    ctx.speaker = e.str("speaker");
    ctx.meeting = e.num("meeting");
    ctx.meeting_tick = e.tick;
    ctx.utterance_seq = e.seq;
    try {
      for (auto& c : extract(e.str("text"), ctx)) out.push_back(std::move(c));
    } catch (const ClaimParseError& err) {
      if (errors) errors->push_back("seq " + std::to_string(e.seq) + ": " + err.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Claim> extract_log_structured(const GameLog& log, std::vector<std::string>* errors) {
  return extract_log(log, errors, [](std::string_view text, const ClaimContext& ctx) {
    return extract_structured(text, ctx);
  });
}

std::vector<Claim> extract_log_model(const GameLog& log, ChatClient* client, ExtractionCache& cache,
                                     std::vector<std::string>* errors) {
  return extract_log(log, errors, [&](std::string_view text, const ClaimContext& ctx) {
    std::vector<std::string> dropped;
    auto claims = extract_model(text, ctx, client, cache, &dropped);
    if (errors) {
      for (auto& d : dropped) errors->push_back("seq " + std::to_string(ctx.utterance_seq) + ": dropped " + d);
    }
    return claims;
  });
}

}  // namespace quack
