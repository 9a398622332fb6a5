#include "waam/plan_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "waam/cloud.hpp"
#include "waam/error.hpp"

namespace waam {

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

namespace {

double parse_number(std::string_view token, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    fail(ErrorCode::MalformedInput,
         "plan line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
  }
  return value;
}

std::string_view value_of(std::string_view token, std::string_view key, std::size_t line) {
  if (token.size() <= key.size() || token.substr(0, key.size()) != key ||
      token[key.size()] != '=') {
    fail(ErrorCode::MalformedInput, "plan line " + std::to_string(line) + ": expected " +
                                        std::string(key) + "=..., got '" + std::string(token) + "'");
  }
  return token.substr(key.size() + 1);
}

}  // namespace

std::string format_plan(const SlicePlan& plan) {
  std::string out;
  out += "SLICEPLAN h=" + format_number(plan.h) + " sampling=" + format_number(plan.sampling) +
         " warped=" + (plan.warped ? "1" : "0") + " source=" + plan.source + "\n";
  for (const auto& layer : plan.layers) {
    for (std::size_t s = 0; s < layer.segments.size(); ++s) {
      out += "L " + std::to_string(layer.index) + " S " + std::to_string(s) +
             " closed=" + (layer.closed ? "1" : "0") +
             " boundary=" + (layer.touches_boundary ? "1" : "0") + "\n";
      for (const auto& lp : layer.segments[s]) {
        for (const Vec3* v : {&lp.p, &lp.t, &lp.n, &lp.a}) {
          out += format_number(v->x()) + ' ' + format_number(v->y()) + ' ' +
                 format_number(v->z()) + ' ';
        }
        out += format_number(lp.lambda) + '\n';
      }
    }
  }
  return out;
}

SlicePlan parse_plan(std::string_view text) {
  SlicePlan plan;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;

  require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedInput, "plan: empty");
  ++line_no;
  {
    std::istringstream ls(line);
    std::string magic, h, sampling, warped;
    ls >> magic >> h >> sampling >> warped;
    require(magic == "SLICEPLAN", ErrorCode::MalformedInput, "plan: missing SLICEPLAN header");
    plan.h = parse_number(value_of(h, "h", 1), 1);
    plan.sampling = parse_number(value_of(sampling, "sampling", 1), 1);
    plan.warped = value_of(warped, "warped", 1) == "1";
    const auto pos = line.find("source=");
    require(pos != std::string::npos, ErrorCode::MalformedInput, "plan: header lacks source=");
    plan.source = line.substr(pos + 7);
  }

  LayerSegment* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == 'L') {
      std::string l, s, closed, boundary;
      std::size_t layer_index = 0, seg_index = 0;
      ls >> l >> layer_index >> s >> seg_index >> closed >> boundary;
      require(static_cast<bool>(ls) && s == "S", ErrorCode::MalformedInput,
              "plan line " + std::to_string(line_no) + ": bad layer header");
      if (plan.layers.empty() || plan.layers.back().index != layer_index) {
        require(layer_index == plan.layers.size(), ErrorCode::MalformedInput,
                "plan line " + std::to_string(line_no) + ": layer indices must be consecutive");
        Layer layer;
        layer.index = layer_index;
        plan.layers.push_back(std::move(layer));
      }
      Layer& layer = plan.layers.back();
      require(seg_index == layer.segments.size(), ErrorCode::MalformedInput,
              "plan line " + std::to_string(line_no) + ": segment indices must be consecutive");
      layer.closed = value_of(closed, "closed", line_no) == "1";
      layer.touches_boundary = value_of(boundary, "boundary", line_no) == "1";
      layer.segments.emplace_back();
      current = &layer.segments.back();
      continue;
    }
    require(current != nullptr, ErrorCode::MalformedInput,
            "plan line " + std::to_string(line_no) + ": point row before any layer header");
    std::array<double, 13> v{};
    std::string token;
    for (auto& x : v) {
      require(static_cast<bool>(ls >> token), ErrorCode::MalformedInput,
              "plan line " + std::to_string(line_no) + ": expected 13 numbers");
      x = parse_number(token, line_no);
    }
    LayerPoint lp;
    lp.p = Point3(v[0], v[1], v[2]);
    lp.t = Vec3(v[3], v[4], v[5]);
    lp.n = Vec3(v[6], v[7], v[8]);
    lp.a = Vec3(v[9], v[10], v[11]);
    lp.lambda = v[12];
    current->push_back(lp);
  }
  for (auto& layer : plan.layers) {
    layer.total_length = 0.0;
    for (const auto& seg : layer.segments) {
      if (!seg.empty()) layer.total_length += seg.back().lambda;
    }
  }
  return plan;
}

void write_plan(const SlicePlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out << format_plan(plan);
}

SlicePlan read_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open plan " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_plan(text);
}

std::string plan_to_ply(const SlicePlan& plan, std::size_t layer_stride) {
  layer_stride = std::max<std::size_t>(1, layer_stride);
  PointCloud cloud;
  for (std::size_t i = 0; i < plan.layers.size(); i += layer_stride) {
    for (const auto& seg : plan.layers[i].segments) {
      for (const auto& lp : seg) {
        cloud.points.push_back(lp.p);
        cloud.normals.push_back(lp.n);
      }
    }
  }
  return cloud_to_ply(cloud);
}

std::string plan_to_svg(const SlicePlan& plan, std::size_t layer_stride) {
  layer_stride = std::max<std::size_t>(1, layer_stride);
  double x_lo = std::numeric_limits<double>::max(), x_hi = std::numeric_limits<double>::lowest();
  double z_lo = x_lo, z_hi = x_hi;
  for (const auto& layer : plan.layers) {
    for (const auto& seg : layer.segments) {
      for (const auto& lp : seg) {
        x_lo = std::min(x_lo, lp.p.x());
        x_hi = std::max(x_hi, lp.p.x());
        z_lo = std::min(z_lo, lp.p.z());
        z_hi = std::max(z_hi, lp.p.z());
      }
    }
  }
  if (x_lo > x_hi) x_lo = x_hi = z_lo = z_hi = 0.0;
  const double margin = 5.0;
  const double width = x_hi - x_lo + 2 * margin;
  const double height = z_hi - z_lo + 2 * margin;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << format_number(width) << ' '
      << format_number(height) << "\">\n";
  for (std::size_t i = 0; i < plan.layers.size(); i += layer_stride) {
    for (const auto& seg : plan.layers[i].segments) {
      out << "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.2\" points=\"";
      for (const auto& lp : seg) {
        out << format_number(lp.p.x() - x_lo + margin) << ','
            << format_number(z_hi - lp.p.z() + margin) << ' ';
      }
      out << "\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace waam
