#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "quack/error.hpp"
#include "quack/observation.hpp"

namespace quack {

namespace {

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

constexpr double kRoomW = 110;
constexpr double kRoomH = 50;

const char* kStyle =
    "<style>.room{fill:#eef2f7;stroke:#334;stroke-width:2}.corridor{stroke:#99a;stroke-width:3}"
    ".cost{font:11px sans-serif;fill:#556}.label{font:13px sans-serif;fill:#223;text-anchor:middle}"
    ".task{fill:#f2b705}.viewer{fill:#1f77b4;stroke:#fff;stroke-width:2}.player{fill:#2ca02c}"
    ".body{stroke:#d62728;stroke-width:3}.arrow{stroke:#555;stroke-width:2;fill:none}</style>";

std::string open_svg(int w, int h) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << " " << h << "\">" << kStyle
    << "<defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"3\" orient=\"auto\">"
       "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"#555\"/></marker></defs>";
  return o.str();
}

}  // namespace

std::vector<LayoutPoint> room_positions(const Map& map) {
  const auto n = map.room_count();
  std::vector<LayoutPoint> pos(n);
  if (map.has_layout()) {
    for (std::size_t i = 0; i < n; ++i) pos[i] = *map.layout(static_cast<RoomIndex>(i));
    return pos;
  }
  // Fruchterman-Reingold from a circle in listing order; fixed iteration
  // count and cooling schedule keep the result deterministic.
  const double area = 800.0 * 500.0;
  const double k = std::sqrt(area / static_cast<double>(n));
  const auto& order = map.listing_order();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2 * M_PI * static_cast<double>(i) / static_cast<double>(n);
    pos[idx(order[i])] = {400 + 200 * std::cos(a), 250 + 200 * std::sin(a)};
  }
  double temp = 80;
  for (int it = 0; it < 300; ++it) {
    std::vector<LayoutPoint> disp(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double dx = pos[i].x - pos[j].x;
        const double dy = pos[i].y - pos[j].y;
        const double d = std::max(std::hypot(dx, dy), 0.01);
        const double f = k * k / d;
        disp[i].x += dx / d * f;
        disp[i].y += dy / d * f;
      }
    }
    for (const auto& c : map.corridors()) {
      const auto a = idx(c.a), b = idx(c.b);
      const double dx = pos[a].x - pos[b].x;
      const double dy = pos[a].y - pos[b].y;
      const double d = std::max(std::hypot(dx, dy), 0.01);
      const double f = d * d / k;
      disp[a].x -= dx / d * f;
      disp[a].y -= dy / d * f;
      disp[b].x += dx / d * f;
      disp[b].y += dy / d * f;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double d = std::max(std::hypot(disp[i].x, disp[i].y), 0.01);
      pos[i].x += disp[i].x / d * std::min(d, temp);
      pos[i].y += disp[i].y / d * std::min(d, temp);
    }
    temp = std::max(1.0, temp * 0.97);
  }
  double minx = pos[0].x, miny = pos[0].y;
  for (const auto& p : pos) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
  }
  for (auto& p : pos) {
    p.x = std::round(p.x - minx + 80);
    p.y = std::round(p.y - miny + 60);
  }
  return pos;
}

RenderedView render_global(const GameState& s, const Map& map, PlayerId viewer) {
  if (idx(viewer) >= s.agents.size()) throw RuleError("unknown viewer");
  const auto& me = s.agent(viewer);
  if (!me.alive) throw RuleError("viewer " + me.name + " is dead");

  const auto pos = room_positions(map);
  double maxx = 0, maxy = 0;
  for (const auto& p : pos) {
    maxx = std::max(maxx, p.x);
    maxy = std::max(maxy, p.y);
  }
  RenderedView v;
  v.width = static_cast<int>(maxx + kRoomW);
  v.height = static_cast<int>(maxy + kRoomH + 20);

  std::ostringstream o;
  o << open_svg(v.width, v.height);
  o << "<text class=\"label\" x=\"" << v.width / 2 << "\" y=\"18\">Tick " << s.tick << "</text>";
  for (const auto& c : map.corridors()) {
    const auto& a = pos[idx(c.a)];
    const auto& b = pos[idx(c.b)];
    o << "<line class=\"corridor\" data-a=\"" << esc(map.name(c.a)) << "\" data-b=\"" << esc(map.name(c.b))
      << "\" x1=\"" << num(a.x) << "\" y1=\"" << num(a.y) << "\" x2=\"" << num(b.x) << "\" y2=\"" << num(b.y)
      << "\"/>";
    o << "<text class=\"cost\" x=\"" << num((a.x + b.x) / 2 + 4) << "\" y=\"" << num((a.y + b.y) / 2 - 4) << "\">"
      << c.weight << "</text>";
  }
  for (std::size_t i = 0; i < map.room_count(); ++i) {
    const auto& p = pos[i];
    const auto& name = map.name(static_cast<RoomIndex>(i));
    o << "<rect class=\"room\" data-room=\"" << esc(name) << "\" x=\"" << num(p.x - kRoomW / 2) << "\" y=\""
      << num(p.y - kRoomH / 2) << "\" width=\"" << kRoomW << "\" height=\"" << kRoomH << "\" rx=\"6\"/>";
    o << "<text class=\"label\" x=\"" << num(p.x) << "\" y=\"" << num(p.y + 5) << "\">" << esc(name) << "</text>";
  }
  for (const auto& t : me.tasks) {
    if (t.done) continue;
    const auto& p = pos[idx(t.room)];
    o << "<circle class=\"task\" data-room=\"" << esc(map.name(t.room)) << "\" cx=\"" << num(p.x + kRoomW / 2 - 8)
      << "\" cy=\"" << num(p.y - kRoomH / 2 + 8) << "\" r=\"5\"/>";
  }
  LayoutPoint at;
  if (const auto* t = std::get_if<Transit>(&me.location)) {
    const auto& a = pos[idx(t->from)];
    const auto& b = pos[idx(t->to)];
    const int w = *map.weight(t->from, t->to);
    const double f = static_cast<double>(w - t->remaining + 1) / static_cast<double>(w + 1);
    at = {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
  } else {
    at = pos[idx(std::get<RoomIndex>(me.location))];
    at.y += kRoomH / 2 - 10;
  }
  o << "<circle class=\"viewer\" data-player=\"" << esc(me.name) << "\" cx=\"" << num(at.x) << "\" cy=\""
    << num(at.y) << "\" r=\"8\"/>";
  o << "</svg>";
  v.svg = o.str();
  return v;
}

RenderedView render_local(const GameState& s, const Map& map, PlayerId viewer) {
  if (idx(viewer) >= s.agents.size()) throw RuleError("unknown viewer");
  const auto& me = s.agent(viewer);
  if (!me.alive) throw RuleError("viewer " + me.name + " is dead");

  RenderedView v;
  v.width = 480;
  v.height = 320;
  std::ostringstream o;
  o << open_svg(v.width, v.height);

  if (const auto* t = std::get_if<Transit>(&me.location)) {
    o << "<line class=\"corridor\" data-a=\"" << esc(map.name(t->from)) << "\" data-b=\"" << esc(map.name(t->to))
      << "\" x1=\"40\" y1=\"160\" x2=\"440\" y2=\"160\"/>";
    o << "<text class=\"label\" x=\"40\" y=\"140\">" << esc(map.name(t->from)) << "</text>";
    o << "<text class=\"label\" x=\"440\" y=\"140\">" << esc(map.name(t->to)) << "</text>";
    o << "<text class=\"label\" x=\"240\" y=\"200\">corridor, " << t->remaining << " to go</text>";
    o << "<circle class=\"viewer\" data-player=\"" << esc(me.name) << "\" cx=\"240\" cy=\"160\" r=\"10\"/>";
    o << "</svg>";
    v.svg = o.str();
    return v;
  }

  const auto here = std::get<RoomIndex>(me.location);
  o << "<rect class=\"room\" data-room=\"" << esc(map.name(here))
    << "\" x=\"20\" y=\"30\" width=\"300\" height=\"270\" rx=\"10\"/>";
  o << "<text class=\"label\" x=\"170\" y=\"22\">" << esc(map.name(here)) << "</text>";

  int slot = 0;
  auto slot_xy = [&](int i) { return std::pair<int, int>{60 + (i % 4) * 70, 80 + (i / 4) * 70}; };
  {
    const auto [x, y] = slot_xy(slot++);
    o << "<circle class=\"viewer\" data-player=\"" << esc(me.name) << "\" cx=\"" << x << "\" cy=\"" << y
      << "\" r=\"12\"/><text class=\"label\" x=\"" << x << "\" y=\"" << y + 28 << "\">" << esc(me.name) << "</text>";
  }
  for (auto p : s.occupants(here)) {
    if (p == viewer) continue;
    const auto [x, y] = slot_xy(slot++);
    const auto& name = s.agent(p).name;
    o << "<g data-player=\"" << esc(name) << "\"><circle class=\"player\" cx=\"" << x << "\" cy=\"" << y
      << "\" r=\"12\"/><text class=\"label\" x=\"" << x << "\" y=\"" << y + 28 << "\">" << esc(name)
      << "</text></g>";
  }
  for (const auto& b : s.bodies) {
    if (b.room != here) continue;
    const auto [x, y] = slot_xy(slot++);
    const auto& name = s.agent(b.victim).name;
    o << "<g class=\"body\" data-body=\"" << esc(name) << "\"><line x1=\"" << x - 10 << "\" y1=\"" << y - 10
      << "\" x2=\"" << x + 10 << "\" y2=\"" << y + 10 << "\"/><line x1=\"" << x - 10 << "\" y1=\"" << y + 10
      << "\" x2=\"" << x + 10 << "\" y2=\"" << y - 10 << "\"/><text class=\"label\" x=\"" << x << "\" y=\""
      << y + 28 << "\">" << esc(name) << "</text></g>";
  }

  int row = 0;
  for (const auto& m : s.buffers.moves) {
    if (std::find(m.witnesses.begin(), m.witnesses.end(), viewer) == m.witnesses.end()) continue;
    const bool dep = m.direction == MoveDirection::Departed;
    const int y = 60 + row++ * 40;
    const auto& name = s.agent(m.mover).name;
    o << "<g class=\"move\" data-player=\"" << esc(name) << "\" data-direction=\"" << (dep ? "departed" : "arrived")
      << "\" data-corridor=\"" << esc(map.name(m.room)) << "-" << esc(map.name(m.other)) << "\">";
    if (dep) {
      o << "<line class=\"arrow\" x1=\"330\" y1=\"" << y << "\" x2=\"460\" y2=\"" << y << "\" marker-end=\"url(#head)\"/>";
    } else {
      o << "<line class=\"arrow\" x1=\"460\" y1=\"" << y << "\" x2=\"330\" y2=\"" << y << "\" marker-end=\"url(#head)\"/>";
    }
    o << "<text class=\"cost\" x=\"332\" y=\"" << y - 6 << "\">" << esc(name) << (dep ? " to " : " from ")
      << esc(map.name(m.other)) << "</text></g>";
  }
  o << "</svg>";
  v.svg = o.str();
  return v;
}

}  // namespace quack
