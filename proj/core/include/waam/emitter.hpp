#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "waam/program.hpp"

namespace waam {

enum class Dialect { InformLike, RapidLike, KarelLike };

/// Accepts "inform", "rapid", "karel" and their "_like" forms.
Dialect parse_dialect(std::string_view name);
std::string to_string(Dialect dialect);

/// Intrinsic Z-Y-X angles in degrees: R = Rz(rz) Ry(ry) Rx(rx).
struct EulerZYX {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;
};

EulerZYX to_euler_zyx(const Rotation3& r);
Rotation3 from_euler_zyx(const EulerZYX& e);

/// Three decimals, "-0.000" folded to "0.000".
std::string format_fixed3(double value);

/// Speed field: three decimals, but a positive speed never renders as 0.000.
std::string format_speed(double speed);

/// Reads the motion IR (see docs/ir_grammar.md). Failures throw ParseError
/// carrying the 1-based line and column.
MotionProgram parse_script(std::string_view text);

/// Canonical IR text. Positions in mm, angles in degrees, all at three decimals.
std::string emit_ir(const MotionProgram& program);

/// Dialect-style program text. Throws Unsupported for device layouts the
/// dialect skeletons cannot express (more than one robot or positioner).
std::string emit(const MotionProgram& program, Dialect dialect);

/// What a dialect reader recovers from emitted text.
struct DialectSummary {
  std::size_t motion_statements = 0;
  std::size_t position_records = 0;
  std::size_t arc_on = 0;
  std::size_t arc_off = 0;
  std::vector<double> speeds;  // one per motion statement, in order
};

/// Skeleton grammar check for dialect output; throws MalformedInput on lines
/// it does not recognise.
DialectSummary read_dialect(std::string_view text, Dialect dialect);

}  // namespace waam
