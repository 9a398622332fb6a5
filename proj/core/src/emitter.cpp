#include "waam/emitter.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include "waam/error.hpp"

namespace waam {

Dialect parse_dialect(std::string_view name) {
  if (name == "inform" || name == "inform_like") return Dialect::InformLike;
  if (name == "rapid" || name == "rapid_like") return Dialect::RapidLike;
  if (name == "karel" || name == "karel_like") return Dialect::KarelLike;
  fail(ErrorCode::Unsupported, "unknown dialect '" + std::string(name) + "'");
}

std::string to_string(Dialect dialect) {
  switch (dialect) {
    case Dialect::InformLike: return "inform_like";
    case Dialect::RapidLike: return "rapid_like";
    case Dialect::KarelLike: return "karel_like";
  }
  return "?";
}

EulerZYX to_euler_zyx(const Rotation3& r) {
  EulerZYX e;
  const double s = std::clamp(-r(2, 0), -1.0, 1.0);
  const double ry = std::asin(s);
  if (std::cos(ry) > 1e-9) {
    e.rx = std::atan2(r(2, 1), r(2, 2));
    e.rz = std::atan2(r(1, 0), r(0, 0));
  } else {
    e.rx = 0.0;
    e.rz = std::atan2(-r(0, 1), r(1, 1));
  }
  e.rx = rad2deg(e.rx);
  e.ry = rad2deg(ry);
  e.rz = rad2deg(e.rz);
  return e;
}

Rotation3 from_euler_zyx(const EulerZYX& e) {
  return axis_rotation(kAxisZ, deg2rad(e.rz)) * axis_rotation(kAxisY, deg2rad(e.ry)) *
         axis_rotation(kAxisX, deg2rad(e.rx));
}

std::string format_fixed3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string format_speed(double speed) {
  return speed > 0.0 && speed < 0.001 ? std::string("0.001") : format_fixed3(speed);
}

namespace {

std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string format_angle(double deg) {
  std::string s = format_fixed3(deg);
  return s == "-180.000" ? "180.000" : s;
}

// ---------------------------------------------------------------- IR reader

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
           line[i] != '#') {
      ++i;
    }
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, std::size_t line, std::size_t line_length)
      : tokens_(std::move(tokens)), line_(line), end_column_(line_length + 1) {}

  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }

  [[noreturn]] void error(ErrorCode code, const std::string& message) const {
    const std::size_t col = done() ? end_column_ : peek().column;
    throw ParseError(code, line_, col, message);
  }

  [[noreturn]] void error_at(const Token& t, ErrorCode code, const std::string& message) const {
    throw ParseError(code, line_, t.column, message);
  }

  Token next(const std::string& expected) {
    if (done()) error(ErrorCode::Syntax, "expected " + expected + ", got end of line");
    return tokens_[pos_++];
  }

  double number(const std::string& expected) {
    const Token t = next(expected);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size() || !std::isfinite(v)) {
      error_at(t, ErrorCode::Syntax,
               "expected " + expected + " (number), got '" + std::string(t.text) + "'");
    }
    return v;
  }

  void finish() const {
    if (!done()) {
      error(ErrorCode::Syntax, "expected end of line, got '" + std::string(peek().text) + "'");
    }
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t end_column_;
};

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

DevicePose read_pose(LineParser& p) {
  DevicePose pose;
  pose.position.x() = p.number("x");
  pose.position.y() = p.number("y");
  pose.position.z() = p.number("z");
  EulerZYX e;
  e.rx = p.number("rx");
  e.ry = p.number("ry");
  e.rz = p.number("rz");
  pose.orientation = from_euler_zyx(e);
  return pose;
}

const DeviceDecl* find_device(const MotionProgram& program, std::string_view name) {
  for (const auto& d : program.devices) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

}  // namespace

MotionProgram parse_script(std::string_view text) {
  MotionProgram program;
  program.devices.clear();
  program.groups.clear();

  bool arc_on = false;
  std::size_t arc_line = 0;
  std::string group;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool seen_program = false;

  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    LineParser p(tokenize(line), line_no, line.size());
    if (p.done()) {
      if (eol == text.size()) break;
      continue;
    }
    const Token kw = p.next("keyword");

    if (kw.text == "PROGRAM") {
      if (seen_program || !program.devices.empty() || !program.segments.empty()) {
        p.error_at(kw, ErrorCode::Syntax, "PROGRAM must be the first statement and appear once");
      }
      seen_program = true;
      while (!p.done()) {
        const Token kv = p.next("key=value");
        const auto eq = kv.text.find('=');
        if (eq == std::string_view::npos || eq + 1 == kv.text.size()) {
          p.error_at(kv, ErrorCode::Syntax, "expected key=value, got '" + std::string(kv.text) + "'");
        }
        const std::string_view key = kv.text.substr(0, eq);
        const std::string_view value = kv.text.substr(eq + 1);
        if (key == "material") {
          program.material = std::string(value);
          continue;
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
          p.error_at(kv, ErrorCode::Syntax, "expected number in '" + std::string(kv.text) + "'");
        }
        if (key == "dr") {
          program.d_r = v;
        } else if (key == "vr") {
          program.v_r = v;
        } else if (key == "feed") {
          program.feed_rate_ipm = v;
        } else {
          p.error_at(kv, ErrorCode::Syntax,
                     "unknown PROGRAM key '" + std::string(key) + "', expected dr, vr, feed or material");
        }
      }
    } else if (kw.text == "DEVICE") {
      const Token name = p.next("device name");
      if (!is_identifier(name.text)) {
        p.error_at(name, ErrorCode::Syntax, "bad device name '" + std::string(name.text) + "'");
      }
      if (find_device(program, name.text) != nullptr) {
        p.error_at(name, ErrorCode::Syntax, "device '" + std::string(name.text) + "' declared twice");
      }
      const Token kind = p.next("ROBOT or POSITIONER");
      DeviceDecl decl{std::string(name.text), DeviceKind::Robot};
      if (kind.text == "POSITIONER") {
        decl.kind = DeviceKind::Positioner;
      } else if (kind.text != "ROBOT") {
        p.error_at(kind, ErrorCode::Syntax,
                   "expected ROBOT or POSITIONER, got '" + std::string(kind.text) + "'");
      }
      p.finish();
      program.devices.push_back(std::move(decl));
    } else if (kw.text == "GROUP") {
      const Token name = p.next("group name");
      if (!is_identifier(name.text)) {
        p.error_at(name, ErrorCode::Syntax, "bad group name '" + std::string(name.text) + "'");
      }
      SyncGroup g{std::string(name.text), {}};
      if (p.done()) p.error(ErrorCode::Syntax, "expected at least one device in GROUP");
      while (!p.done()) {
        const Token m = p.next("device name");
        if (find_device(program, m.text) == nullptr) {
          p.error_at(m, ErrorCode::UnknownReference, "unknown device '" + std::string(m.text) + "'");
        }
        g.members.emplace_back(m.text);
      }
      program.groups.push_back(std::move(g));
    } else if (kw.text == "SYNC") {
      const Token name = p.next("group name");
      const bool known = std::any_of(program.groups.begin(), program.groups.end(),
                                     [&](const SyncGroup& g) { return g.name == name.text; });
      if (!known) {
        p.error_at(name, ErrorCode::UnknownReference, "undeclared group '" + std::string(name.text) + "'");
      }
      p.finish();
      group = std::string(name.text);
    } else if (kw.text == "UNSYNC") {
      p.finish();
      group.clear();
    } else if (kw.text == "ARCON") {
      p.finish();
      if (arc_on) {
        p.error_at(kw, ErrorCode::Unbalanced,
                   "ARCON while the arc is already on (opened at line " + std::to_string(arc_line) + ")");
      }
      arc_on = true;
      arc_line = line_no;
    } else if (kw.text == "ARCOF") {
      p.finish();
      if (!arc_on) p.error_at(kw, ErrorCode::Unbalanced, "ARCOF without a matching ARCON");
      arc_on = false;
    } else if (kw.text == "MOVL" || kw.text == "MOVC" || kw.text == "MOVJ") {
      MotionSegment seg;
      seg.primitive = kw.text == "MOVL" ? Primitive::MoveL
                      : kw.text == "MOVC" ? Primitive::MoveC
                                          : Primitive::MoveJ;
      const Token dev = p.next("robot name");
      const DeviceDecl* robot = find_device(program, dev.text);
      if (robot == nullptr || robot->kind != DeviceKind::Robot) {
        p.error_at(dev, ErrorCode::UnknownReference, "unknown robot '" + std::string(dev.text) + "'");
      }
      if (seg.primitive == Primitive::MoveC) seg.via = read_pose(p);
      seg.target.torch = read_pose(p);
      if (program.positioner() != nullptr) {
        const Token pd = p.next("positioner name");
        const DeviceDecl* positioner = find_device(program, pd.text);
        if (positioner == nullptr || positioner->kind != DeviceKind::Positioner) {
          p.error_at(pd, ErrorCode::UnknownReference,
                     "unknown positioner '" + std::string(pd.text) + "'");
        }
        seg.target.positioner.q1 = deg2rad(p.number("q1"));
        seg.target.positioner.q2 = deg2rad(p.number("q2"));
      }
      seg.speed = p.number("speed");
      p.finish();
      seg.target.arc_on = arc_on;
      seg.group = group;
      program.segments.push_back(std::move(seg));
    } else {
      p.error_at(kw, ErrorCode::Syntax,
                 "unknown statement '" + std::string(kw.text) +
                     "', expected PROGRAM, DEVICE, GROUP, SYNC, UNSYNC, ARCON, ARCOF, MOVL, MOVC or MOVJ");
    }
    if (eol == text.size()) break;
  }

  if (arc_on) {
    throw ParseError(ErrorCode::Unbalanced, arc_line, 1,
                     "ARCON at line " + std::to_string(arc_line) + " has no matching ARCOF");
  }
  if (program.segments.empty()) {
    throw ParseError(ErrorCode::EmptyResult, line_no, 1, "script has no motion statements");
  }
  return program;
}

namespace {

std::string pose_fields(const DevicePose& pose) {
  const EulerZYX e = to_euler_zyx(pose.orientation);
  return format_fixed3(pose.position.x()) + ' ' + format_fixed3(pose.position.y()) + ' ' +
         format_fixed3(pose.position.z()) + ' ' + format_angle(e.rx) + ' ' + format_angle(e.ry) +
         ' ' + format_angle(e.rz);
}

const char* ir_keyword(Primitive p) {
  switch (p) {
    case Primitive::MoveL: return "MOVL";
    case Primitive::MoveC: return "MOVC";
    case Primitive::MoveJ: return "MOVJ";
  }
  return "?";
}

// Visits segments with arc and group transitions resolved; shared by the IR
// and dialect writers so that they agree on statement order.
struct Transitions {
  virtual ~Transitions() = default;
  virtual void sync(const std::string& group) = 0;
  virtual void arc(bool on) = 0;
  virtual void move(std::size_t index, const MotionSegment& seg) = 0;
};

void walk(const MotionProgram& program, Transitions& out) {
  bool on = false;
  std::string group;
  for (std::size_t i = 0; i < program.segments.size(); ++i) {
    const auto& seg = program.segments[i];
    if (seg.group != group) {
      out.sync(seg.group);
      group = seg.group;
    }
    if (seg.target.arc_on != on) {
      out.arc(seg.target.arc_on);
      on = seg.target.arc_on;
    }
    out.move(i, seg);
  }
  if (on) out.arc(false);
}

void check_layout(const MotionProgram& program) {
  validate(program);
  std::size_t robots = 0, positioners = 0;
  for (const auto& d : program.devices) {
    (d.kind == DeviceKind::Robot ? robots : positioners) += 1;
  }
  require(robots == 1 && positioners <= 1, ErrorCode::Unsupported,
          "dialect output supports one robot and at most one positioner");
}

}  // namespace

std::string emit_ir(const MotionProgram& program) {
  validate(program);
  std::string out = "PROGRAM dr=" + format_fixed3(program.d_r) + " vr=" + format_fixed3(program.v_r) +
                    " feed=" + format_fixed3(program.feed_rate_ipm);
  if (!program.material.empty()) out += " material=" + program.material;
  out += '\n';
  for (const auto& d : program.devices) {
    out += "DEVICE " + d.name + (d.kind == DeviceKind::Robot ? " ROBOT\n" : " POSITIONER\n");
  }
  for (const auto& g : program.groups) {
    out += "GROUP " + g.name;
    for (const auto& m : g.members) out += ' ' + m;
    out += '\n';
  }

  struct IrWriter : Transitions {
    const MotionProgram& program;
    std::string& out;
    IrWriter(const MotionProgram& p, std::string& o) : program(p), out(o) {}
    void sync(const std::string& group) override {
      out += group.empty() ? std::string("UNSYNC\n") : "SYNC " + group + '\n';
    }
    void arc(bool on) override { out += on ? "ARCON\n" : "ARCOF\n"; }
    void move(std::size_t, const MotionSegment& seg) override {
      out += std::string(ir_keyword(seg.primitive)) + ' ' + program.robot()->name;
      if (seg.via) out += ' ' + pose_fields(*seg.via);
      out += ' ' + pose_fields(seg.target.torch);
      if (const auto* pos = program.positioner()) {
        out += ' ' + pos->name + ' ' + format_fixed3(rad2deg(seg.target.positioner.q1)) + ' ' +
               format_fixed3(rad2deg(seg.target.positioner.q2));
      }
      out += ' ' + format_speed(seg.speed) + '\n';
    }
  } writer(program, out);
  walk(program, writer);
  return out;
}

namespace {

std::string inform(const MotionProgram& program) {
  const bool has_station = program.positioner() != nullptr;
  std::vector<std::string> records;
  std::vector<std::string> stations;
  std::string body;

  auto record = [&](const DevicePose& pose) {
    const EulerZYX e = to_euler_zyx(pose.orientation);
    char id[16];
    std::snprintf(id, sizeof id, "C%05zu", records.size());
    records.push_back(std::string(id) + '=' + format_fixed3(pose.position.x()) + ',' +
                      format_fixed3(pose.position.y()) + ',' + format_fixed3(pose.position.z()) +
                      ',' + format_angle(e.rx) + ',' + format_angle(e.ry) + ',' + format_angle(e.rz));
    return std::string(id);
  };
  auto station = [&](const PositionerState& q) {
    char id[16];
    std::snprintf(id, sizeof id, "EC%05zu", stations.size());
    stations.push_back(std::string(id) + '=' + format_fixed3(rad2deg(q.q1)) + ',' +
                       format_fixed3(rad2deg(q.q2)));
    return std::string(id);
  };

  struct Writer : Transitions {
    std::string& body;
    std::function<std::string(const DevicePose&)> record;
    std::function<std::string(const PositionerState&)> station;
    bool has_station;
    Writer(std::string& b) : body(b) {}
    void sync(const std::string& group) override {
      body += "'SYNC " + (group.empty() ? std::string("-") : group) + '\n';
    }
    void arc(bool on) override { body += on ? "ARCON\n" : "ARCOF\n"; }
    void move(std::size_t, const MotionSegment& seg) override {
      std::string line;
      switch (seg.primitive) {
        case Primitive::MoveL: line = "MOVL " + record(seg.target.torch); break;
        case Primitive::MoveJ: line = "MOVJ " + record(seg.target.torch); break;
        case Primitive::MoveC: {
          const std::string via = record(*seg.via);
          line = "MOVC " + via + ' ' + record(seg.target.torch);
          break;
        }
      }
      if (has_station) line += ' ' + station(seg.target.positioner);
      line += (seg.primitive == Primitive::MoveJ ? " VJ=" : " V=") + format_speed(seg.speed);
      body += line + '\n';
    }
  } writer(body);
  writer.record = record;
  writer.station = station;
  writer.has_station = has_station;
  walk(program, writer);

  std::string out = "/JOB\n//NAME WAAM_PRINT\n//POS\n";
  out += "///NPOS " + std::to_string(records.size()) + ",0,0," + std::to_string(stations.size()) +
         ",0,0\n///TOOL 0\n///POSTYPE ROBOT\n///RECTAN\n";
  for (const auto& r : records) out += r + '\n';
  if (has_station) {
    out += "///POSTYPE STATION\n";
    for (const auto& s : stations) out += s + '\n';
  }
  out += "//INST\n///ATTR SC,RW\n";
  out += has_station ? "///GROUP1 RB1,ST1\n" : "///GROUP1 RB1\n";
  out += "NOP\n";
  if (!program.material.empty()) {
    out += "'MATERIAL " + program.material + " FEED " + format_fixed3(program.feed_rate_ipm) + '\n';
  }
  out += body;
  out += "END\n";
  return out;
}

std::string robtarget(const DevicePose& pose, const std::optional<PositionerState>& q) {
  Eigen::Quaterniond quat(pose.orientation);
  quat.normalize();
  if (quat.w() < 0.0) quat.coeffs() = -quat.coeffs();
  std::string s = "[[" + format_fixed3(pose.position.x()) + ',' + format_fixed3(pose.position.y()) +
                  ',' + format_fixed3(pose.position.z()) + "],[" + format_fixed6(quat.w()) + ',' +
                  format_fixed6(quat.x()) + ',' + format_fixed6(quat.y()) + ',' +
                  format_fixed6(quat.z()) + "],[0,0,0,0],[";
  if (q) {
    s += format_fixed3(rad2deg(q->q1)) + ',' + format_fixed3(rad2deg(q->q2));
  } else {
    s += "9E9,9E9";
  }
  return s + ",9E9,9E9,9E9,9E9]]";
}

std::string rapid(const MotionProgram& program) {
  const bool has_station = program.positioner() != nullptr;
  std::string out = "MODULE WAAM_PRINT\n";
  if (!program.material.empty()) {
    out += "  ! material " + program.material + " feed " + format_fixed3(program.feed_rate_ipm) + '\n';
  }
  out += "  PROC main()\n";

  struct Writer : Transitions {
    std::string& out;
    bool has_station;
    Writer(std::string& o, bool s) : out(o), has_station(s) {}
    void sync(const std::string& group) override {
      out += "    ! SYNC " + (group.empty() ? std::string("-") : group) + '\n';
    }
    void arc(bool on) override { out += on ? "    SetDO doArcOn,1;\n" : "    SetDO doArcOn,0;\n"; }
    void move(std::size_t, const MotionSegment& seg) override {
      std::optional<PositionerState> q;
      if (has_station) q = seg.target.positioner;
      std::string line = "    ";
      switch (seg.primitive) {
        case Primitive::MoveL: line += "MoveL "; break;
        case Primitive::MoveJ: line += "MoveJ "; break;
        case Primitive::MoveC: line += "MoveC " + robtarget(*seg.via, q) + ','; break;
      }
      line += robtarget(seg.target.torch, q) + ",v" + format_speed(seg.speed) + ",fine,tool0;\n";
      out += line;
    }
  } writer(out, has_station);
  walk(program, writer);
  out += "  ENDPROC\nENDMODULE\n";
  return out;
}

std::string karel(const MotionProgram& program) {
  const bool has_station = program.positioner() != nullptr;
  std::vector<std::string> positions;
  std::string body;

  struct Writer : Transitions {
    std::string& body;
    std::vector<std::string>& positions;
    bool has_station;
    std::string motype;
    Writer(std::string& b, std::vector<std::string>& p, bool s)
        : body(b), positions(p), has_station(s) {}
    std::string add(const DevicePose& pose, const PositionerState& q) {
      const EulerZYX e = to_euler_zyx(pose.orientation);
      const std::string ref = "p[" + std::to_string(positions.size() + 1) + "]";
      std::string def = ref + " = POS(" + format_fixed3(pose.position.x()) + ',' +
                        format_fixed3(pose.position.y()) + ',' + format_fixed3(pose.position.z()) +
                        ',' + format_angle(e.rx) + ',' + format_angle(e.ry) + ',' +
                        format_angle(e.rz) + ')';
      if (has_station) {
        def += " EXT(" + format_fixed3(rad2deg(q.q1)) + ',' + format_fixed3(rad2deg(q.q2)) + ')';
      }
      positions.push_back(def);
      return ref;
    }
    void sync(const std::string& group) override {
      body += "  -- SYNC " + (group.empty() ? std::string("-") : group) + '\n';
    }
    void arc(bool on) override { body += on ? "  DOUT[1] = ON\n" : "  DOUT[1] = OFF\n"; }
    void move(std::size_t, const MotionSegment& seg) override {
      const std::string type = seg.primitive == Primitive::MoveL   ? "LINEAR"
                               : seg.primitive == Primitive::MoveC ? "CIRCULAR"
                                                                   : "JOINT";
      if (type != motype) {
        body += "  $MOTYPE = " + type + '\n';
        motype = type;
      }
      body += "  $SPEED = " + format_speed(seg.speed) + '\n';
      if (seg.primitive == Primitive::MoveC) {
        const std::string via = add(*seg.via, seg.target.positioner);
        const std::string target = add(seg.target.torch, seg.target.positioner);
        body += "  MOVE TO " + target + " VIA " + via + '\n';
      } else {
        body += "  MOVE TO " + add(seg.target.torch, seg.target.positioner) + '\n';
      }
    }
  } writer(body, positions, has_station);
  walk(program, writer);

  std::string out = "PROGRAM waam_print\nVAR\n  p : ARRAY[" + std::to_string(positions.size()) +
                    "] OF XYZWPREXT\nBEGIN\n";
  if (!program.material.empty()) {
    out += "  -- material " + program.material + " feed " + format_fixed3(program.feed_rate_ipm) + '\n';
  }
  for (const auto& p : positions) out += "  " + p + '\n';
  out += body;
  out += "END waam_print\n";
  return out;
}

}  // namespace

std::string emit(const MotionProgram& program, Dialect dialect) {
  check_layout(program);
  switch (dialect) {
    case Dialect::InformLike: return inform(program);
    case Dialect::RapidLike: return rapid(program);
    case Dialect::KarelLike: return karel(program);
  }
  fail(ErrorCode::Unsupported, "unknown dialect");
}

}  // namespace waam
