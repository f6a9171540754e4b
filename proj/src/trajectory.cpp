#include <cstdint>
#include <fstream>

#include "json.hpp"
#include "physqa/mpm.hpp"

namespace physqa::mpm {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'P', 'Q', 'T', 'R', 'A', 'J', '0', '1'};

template <typename T>
void write_raw(std::ofstream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void read_raw(std::ifstream& in, std::vector<T>& v, std::size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) fail(ErrorCode::Io, "trajectory file truncated");
}

}  // namespace

void write_trajectory(const std::string& bin_path, const std::string& header_path,
                      const ParticleTrajectory& t) {
  json h;
  h["schema_version"] = 1;
  h["magic"] = std::string(kMagic, 8);
  h["endianness"] = "little";
  h["frame_dt"] = t.frame_dt;
  h["state_doubles"] = t.state_doubles;
  h["frame_count"] = t.frames.size();
  {
    std::ofstream out(header_path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write trajectory header: " + header_path);
    out << h.dump(2);
  }

  std::ofstream out(bin_path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write trajectory: " + bin_path);
  out.write(kMagic, 8);
  for (const auto& f : t.frames) {
    std::uint64_t n = f.px.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    write_raw(out, f.px);
    write_raw(out, f.py);
    write_raw(out, f.vx);
    write_raw(out, f.vy);
    std::vector<std::uint32_t> groups(f.group.begin(), f.group.end());
    write_raw(out, groups);
    write_raw(out, f.state);
  }
  if (!out) fail(ErrorCode::Io, "trajectory write failed: " + bin_path);
}

ParticleTrajectory read_trajectory(const std::string& bin_path, const std::string& header_path) {
  std::ifstream hin(header_path, std::ios::binary);
  if (!hin) fail(ErrorCode::Io, "cannot read trajectory header: " + header_path);
  json h;
  try {
    hin >> h;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, "trajectory header parse error at byte " + std::to_string(e.byte));
  }

  ParticleTrajectory t;
  t.frame_dt = h.at("frame_dt").get<double>();
  t.state_doubles = h.at("state_doubles").get<int>();
  std::size_t frames = h.at("frame_count").get<std::size_t>();

  std::ifstream in(bin_path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read trajectory: " + bin_path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8))
    fail(ErrorCode::Parse, "bad trajectory magic in " + bin_path);

  for (std::size_t fi = 0; fi < frames; ++fi) {
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in) fail(ErrorCode::Io, "trajectory file truncated at frame " + std::to_string(fi));
    TrajFrame f;
    read_raw(in, f.px, n);
    read_raw(in, f.py, n);
    read_raw(in, f.vx, n);
    read_raw(in, f.vy, n);
    std::vector<std::uint32_t> groups;
    read_raw(in, groups, n);
    f.group.assign(groups.begin(), groups.end());
    read_raw(in, f.state, n * t.state_doubles);
    t.frames.push_back(std::move(f));
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

const char* svg_color(scene::Color c) {
  using scene::Color;
  switch (c) {
    case Color::Blue: return "#2255cc";
    case Color::Black: return "#222222";
    case Color::Brown: return "#8b5a2b";
    case Color::Cyan: return "#22bbbb";
    case Color::Gray: return "#888888";
    case Color::Green: return "#33aa33";
    case Color::Pink: return "#ee7799";
    case Color::Orange: return "#ee8822";
    case Color::Purple: return "#8844bb";
    case Color::Red: return "#cc3333";
    case Color::Yellow: return "#ddcc22";
    case Color::LightBlue: return "#add8e6";
    case Color::White: return "#cfcfc4";
  }
  return "#000000";
}

}  // namespace

void render_frame_svg(const std::string& path, const ParticleTrajectory& t, std::size_t frame,
                      const scene::Scenario& s) {
  if (frame >= t.frames.size()) fail(ErrorCode::Config, "render frame out of range");
  MpmConfig cfg = config_for(s);
  const double w = 640, h = 640;
  auto X = [&](double x) { return (x - cfg.xmin) / (cfg.xmax - cfg.xmin) * w; };
  auto Y = [&](double y) { return h - (y - cfg.ymin) / (cfg.ymax - cfg.ymin) * h; };
  auto S = [&](double d) { return d / (cfg.xmax - cfg.xmin) * w; };

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write svg: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "' viewBox='0 0 " << w << " " << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='#f8f8f4'/>\n";

  for (const auto& ob : obstacles_for(s)) {
    const char* col =
        ob.object_id >= 0 ? svg_color(s.object(ob.object_id).color) : "#555555";
    if (ob.type == Obstacle::Type::Capsule) {
      out << "<line x1='" << X(ob.a.x) << "' y1='" << Y(ob.a.y) << "' x2='" << X(ob.b.x)
          << "' y2='" << Y(ob.b.y) << "' stroke='" << col << "' stroke-width='"
          << S(2 * ob.radius) << "' stroke-linecap='round'/>\n";
    } else {
      out << "<rect x='" << X(ob.a.x) << "' y='" << Y(ob.b.y) << "' width='" << S(ob.b.x - ob.a.x)
          << "' height='" << S(ob.b.y - ob.a.y) << "' fill='" << col << "'/>\n";
    }
  }

  // particle colors follow the owning object's color
  std::vector<const char*> group_color;
  if (s.kind == scene::SceneKind::Fluid) {
    for (const auto& f : s.fluid->fluids) {
      group_color.resize(std::max<std::size_t>(group_color.size(), f.group + 1), "#000");
      group_color[f.group] = svg_color(s.object(f.object_id).color);
    }
  } else if (s.kind == scene::SceneKind::Ball) {
    for (const auto& b : s.ball->balls) {
      group_color.resize(std::max<std::size_t>(group_color.size(), b.group + 1), "#000");
      group_color[b.group] = svg_color(s.object(b.object_id).color);
    }
  }

  const TrajFrame& f = t.frames[frame];
  for (std::size_t i = 0; i < f.px.size(); ++i) {
    const char* col = f.group[i] < static_cast<int>(group_color.size()) ? group_color[f.group[i]]
                                                                        : "#000000";
    out << "<circle cx='" << X(f.px[i]) << "' cy='" << Y(f.py[i]) << "' r='1.4' fill='" << col
        << "'/>\n";
  }
  out << "</svg>\n";
}

}  // namespace physqa::mpm
