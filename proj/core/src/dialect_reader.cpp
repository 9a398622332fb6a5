#include <algorithm>
#include <optional>
#include <regex>
#include <set>
#include <string>

#include "waam/emitter.hpp"
#include "waam/error.hpp"

namespace waam {

namespace {

const std::string kNum = R"(-?\d+\.\d+)";

struct Reader {
  std::string_view text;
  std::size_t line_no = 0;

  template <typename F>
  void each_line(F&& f) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t eol = std::min(text.find('\n', pos), text.size());
      std::string line(text.substr(pos, eol - pos));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      pos = eol + 1;
      ++line_no;
      const auto first = line.find_first_not_of(' ');
      if (first == std::string::npos) continue;
      f(line.substr(first));
    }
  }

  [[noreturn]] void reject(const std::string& dialect, const std::string& line) const {
    fail(ErrorCode::MalformedInput,
         dialect + " line " + std::to_string(line_no) + ": unrecognised '" + line + "'");
  }
};

DialectSummary read_inform(std::string_view text) {
  static const std::regex header(R"(^(/JOB|//NAME \w+|//POS|///NPOS [\d,]+|///TOOL \d+|///POSTYPE \w+|///RECTAN|//INST|///ATTR [\w,]+|///GROUP1 [\w,]+|NOP|END|'.*)$)");
  static const std::regex crec("^C(\\d{5})=" + kNum + "(," + kNum + "){5}$");
  static const std::regex erec("^EC(\\d{5})=" + kNum + "(," + kNum + ")*$");
  static const std::regex move("^MOV([LJC]) C(\\d{5})(?: C(\\d{5}))?(?: EC(\\d{5}))? (VJ?)=(" + kNum + ")$");

  DialectSummary s;
  std::set<std::string> positions, stations;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> refs;
  Reader r{text};
  bool ended = false;
  r.each_line([&](const std::string& line) {
    std::smatch m;
    if (ended) r.reject("inform", line);
    if (std::regex_match(line, m, crec)) {
      positions.insert(m[1]);
      ++s.position_records;
    } else if (std::regex_match(line, m, erec)) {
      stations.insert(m[1]);
    } else if (std::regex_match(line, m, move)) {
      const bool circular = m[1] == "C";
      if (circular != m[3].matched || (m[1] == "J") != (m[5] == "VJ")) r.reject("inform", line);
      std::vector<std::string> ids{"C" + m[2].str()};
      if (m[3].matched) ids.push_back("C" + m[3].str());
      if (m[4].matched) ids.push_back("EC" + m[4].str());
      refs.emplace_back(r.line_no, ids);
      ++s.motion_statements;
      s.speeds.push_back(std::stod(m[6]));
    } else if (line == "ARCON") {
      ++s.arc_on;
    } else if (line == "ARCOF") {
      ++s.arc_off;
    } else if (std::regex_match(line, header)) {
      if (line == "END") ended = true;
    } else {
      r.reject("inform", line);
    }
  });
  require(ended, ErrorCode::MalformedInput, "inform: missing END");
  for (const auto& [line, ids] : refs) {
    for (const auto& id : ids) {
      const bool known = id[0] == 'E' ? stations.count(id.substr(2)) > 0
                                      : positions.count(id.substr(1)) > 0;
      require(known, ErrorCode::MalformedInput,
              "inform line " + std::to_string(line) + ": undefined record " + id);
    }
  }
  return s;
}

DialectSummary read_rapid(std::string_view text) {
  const std::string ext = "(?:" + kNum + "|9E9)";
  const std::string target = R"(\[\[)" + kNum + "," + kNum + "," + kNum + R"(\],\[)" + kNum + "," +
                             kNum + "," + kNum + "," + kNum + R"(\],\[0,0,0,0\],\[)" + ext +
                             "(?:," + ext + "){5}" + R"(\]\])";
  static const std::regex frame(R"(^(MODULE \w+|PROC main\(\)|ENDPROC|ENDMODULE|!.*)$)");
  const std::regex linear("^Move([LJ]) " + target + ",v(" + kNum + "),fine,tool0;$");
  const std::regex circular("^MoveC " + target + "," + target + ",v(" + kNum + "),fine,tool0;$");
  static const std::regex arc(R"(^SetDO doArcOn,([01]);$)");

  DialectSummary s;
  Reader r{text};
  bool module = false, ended = false;
  r.each_line([&](const std::string& line) {
    std::smatch m;
    if (ended) r.reject("rapid", line);
    if (std::regex_match(line, m, linear)) {
      ++s.motion_statements;
      ++s.position_records;
      s.speeds.push_back(std::stod(m[2]));
    } else if (std::regex_match(line, m, circular)) {
      ++s.motion_statements;
      s.position_records += 2;
      s.speeds.push_back(std::stod(m[1]));
    } else if (std::regex_match(line, m, arc)) {
      (m[1] == "1" ? s.arc_on : s.arc_off) += 1;
    } else if (std::regex_match(line, frame)) {
      if (line.rfind("MODULE", 0) == 0) module = true;
      if (line == "ENDMODULE") ended = true;
    } else {
      r.reject("rapid", line);
    }
  });
  require(module && ended, ErrorCode::MalformedInput, "rapid: missing MODULE/ENDMODULE");
  return s;
}

DialectSummary read_karel(std::string_view text) {
  static const std::regex frame(R"(^(PROGRAM \w+|VAR|p : ARRAY\[\d+\] OF XYZWPREXT|BEGIN|END \w+|--.*)$)");
  static const std::regex pos("^p\\[(\\d+)\\] = POS\\(" + kNum + "(?:," + kNum + "){5}\\)(?: EXT\\(" +
                              kNum + "," + kNum + "\\))?$");
  static const std::regex motype(R"(^\$MOTYPE = (LINEAR|CIRCULAR|JOINT)$)");
  static const std::regex speed("^\\$SPEED = (" + kNum + ")$");
  static const std::regex move(R"(^MOVE TO p\[(\d+)\](?: VIA p\[(\d+)\])?$)");
  static const std::regex dout(R"(^DOUT\[1\] = (ON|OFF)$)");

  DialectSummary s;
  Reader r{text};
  std::set<std::string> defined;
  std::optional<double> current_speed;
  std::string current_type;
  bool ended = false;
  r.each_line([&](const std::string& line) {
    std::smatch m;
    if (ended) r.reject("karel", line);
    if (std::regex_match(line, m, pos)) {
      defined.insert(m[1]);
      ++s.position_records;
    } else if (std::regex_match(line, m, motype)) {
      current_type = m[1];
    } else if (std::regex_match(line, m, speed)) {
      current_speed = std::stod(m[1]);
    } else if (std::regex_match(line, m, move)) {
      if (!current_speed || current_type.empty() || defined.count(m[1]) == 0 ||
          (m[2].matched && defined.count(m[2]) == 0) ||
          (current_type == "CIRCULAR") != m[2].matched) {
        r.reject("karel", line);
      }
      ++s.motion_statements;
      s.speeds.push_back(*current_speed);
    } else if (std::regex_match(line, m, dout)) {
      (m[1] == "ON" ? s.arc_on : s.arc_off) += 1;
    } else if (std::regex_match(line, frame)) {
      if (line.rfind("END ", 0) == 0) ended = true;
    } else {
      r.reject("karel", line);
    }
  });
  require(ended, ErrorCode::MalformedInput, "karel: missing END");
  return s;
}

}  // namespace

DialectSummary read_dialect(std::string_view text, Dialect dialect) {
  switch (dialect) {
    case Dialect::InformLike: return read_inform(text);
    case Dialect::RapidLike: return read_rapid(text);
    case Dialect::KarelLike: return read_karel(text);
  }
  fail(ErrorCode::Unsupported, "unknown dialect");
}

}  // namespace waam
