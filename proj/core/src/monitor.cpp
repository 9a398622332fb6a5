#include "waam/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>

namespace waam {

void IRFrame::validate() const {
  require(width > 0 && height > 0, ErrorCode::InvalidArgument, "frame has no pixels");
  require(data.size() == static_cast<std::size_t>(width) * height, ErrorCode::InvalidArgument,
          "frame data length does not match width x height");
  require(px_per_mm > 0.0, ErrorCode::InvalidArgument, "px_per_mm must be positive");
}

IRFrame frame_from_image(const GrayImage& image, double px_per_mm) {
  IRFrame f{image.width, image.height, image.data, px_per_mm};
  f.validate();
  return f;
}

GrayImage frame_image(const IRFrame& frame) {
  frame.validate();
  return GrayImage{frame.width, frame.height, 65535, frame.data};
}

void TorchTemplate::validate() const {
  require(width > 0 && height > 0 && edges.size() == static_cast<std::size_t>(width) * height,
          ErrorCode::InvalidArgument, "template bitmap size does not match its dimensions");
  const auto set = std::count_if(edges.begin(), edges.end(), [](std::uint8_t v) { return v != 0; });
  require(set > 0, ErrorCode::InvalidArgument, "template has no edge pixels");
  require(static_cast<std::size_t>(set) < edges.size(), ErrorCode::InvalidArgument,
          "template is all edge pixels");
  require(anchor.row >= 0 && anchor.row < height && anchor.col >= 0 && anchor.col < width,
          ErrorCode::InvalidArgument, "template anchor lies outside the bitmap");
}

Silhouette default_torch_silhouette() {
  Silhouette s;
  s.width = 30;
  s.height = 52;
  s.mask.assign(static_cast<std::size_t>(s.width) * s.height, 0);
  auto fill = [&](int r0, int r1, int c0, int c1) {
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) s.mask[static_cast<std::size_t>(r) * s.width + c] = 1;
    }
  };
  fill(2, 33, 2, 27);   // gas nozzle
  fill(34, 49, 11, 18); // contact tip
  s.anchor = {49, 14};
  return s;
}

std::vector<std::uint8_t> edge_map(const std::vector<std::uint16_t>& data, int width, int height,
                                   double ratio) {
  std::vector<double> mag(static_cast<std::size_t>(width) * height, 0.0);
  double peak = 0.0;
  auto px = [&](int r, int c) { return static_cast<double>(data[static_cast<std::size_t>(r) * width + c]); };
  for (int r = 1; r + 1 < height; ++r) {
    for (int c = 1; c + 1 < width; ++c) {
      const double gx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
      const double gy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
      const double m = std::hypot(gx, gy);
      mag[static_cast<std::size_t>(r) * width + c] = m;
      peak = std::max(peak, m);
    }
  }
  std::vector<std::uint8_t> out(mag.size(), 0);
  if (peak <= 0.0) return out;
  const double cut = ratio * peak;
  for (std::size_t i = 0; i < mag.size(); ++i) out[i] = mag[i] >= cut ? 1 : 0;
  return out;
}

TorchTemplate make_template(const Silhouette& silhouette) {
  std::vector<std::uint16_t> raster(silhouette.mask.size());
  for (std::size_t i = 0; i < raster.size(); ++i) raster[i] = silhouette.mask[i] ? 40000 : 0;
  TorchTemplate t;
  t.width = silhouette.width;
  t.height = silhouette.height;
  t.edges = edge_map(raster, t.width, t.height);
  t.anchor = silhouette.anchor;
  t.validate();
  return t;
}

MatchResult match_template(const IRFrame& frame, const TorchTemplate& tmpl) {
  frame.validate();
  tmpl.validate();
  require(tmpl.width <= frame.width && tmpl.height <= frame.height, ErrorCode::InvalidArgument,
          "template larger than frame");

  const auto edges = edge_map(frame.data, frame.width, frame.height);
  const int W = frame.width;
  // Integral image of the edge map, (H+1) x (W+1).
  std::vector<double> integral(static_cast<std::size_t>(W + 1) * (frame.height + 1), 0.0);
  for (int r = 0; r < frame.height; ++r) {
    double row_sum = 0.0;
    for (int c = 0; c < W; ++c) {
      row_sum += edges[static_cast<std::size_t>(r) * W + c];
      integral[static_cast<std::size_t>(r + 1) * (W + 1) + c + 1] =
          integral[static_cast<std::size_t>(r) * (W + 1) + c + 1] + row_sum;
    }
  }
  auto box = [&](int r, int c, int h, int w) {
    auto at = [&](int rr, int cc) { return integral[static_cast<std::size_t>(rr) * (W + 1) + cc]; };
    return at(r + h, c + w) - at(r, c + w) - at(r + h, c) + at(r, c);
  };

  std::vector<std::size_t> offsets;
  for (int r = 0; r < tmpl.height; ++r) {
    for (int c = 0; c < tmpl.width; ++c) {
      if (tmpl.edges[static_cast<std::size_t>(r) * tmpl.width + c]) {
        offsets.push_back(static_cast<std::size_t>(r) * W + c);
      }
    }
  }
  const double n = static_cast<double>(tmpl.width) * tmpl.height;
  const double n_t = static_cast<double>(offsets.size());
  const double var_t = n_t - n_t * n_t / n;

  MatchResult best{{0, 0}, -2.0};
  for (int r = 0; r + tmpl.height <= frame.height; ++r) {
    for (int c = 0; c + tmpl.width <= W; ++c) {
      const double s_w = box(r, c, tmpl.height, tmpl.width);
      const double var_w = s_w - s_w * s_w / n;
      double score = 0.0;
      if (var_w > 1e-12) {
        const std::size_t base = static_cast<std::size_t>(r) * W + c;
        double cross = 0.0;
        for (const auto off : offsets) cross += edges[base + off];
        score = (cross - n_t * s_w / n) / std::sqrt(var_t * var_w);
      }
      if (score > best.score) best = {{r, c}, score};
    }
  }
  best.score = std::clamp(best.score, -1.0, 1.0);
  return best;
}

std::vector<std::vector<std::size_t>> connected_components(const std::vector<std::uint8_t>& mask,
                                                           int width, int height) {
  require(mask.size() == static_cast<std::size_t>(width) * height, ErrorCode::InvalidArgument,
          "mask size does not match dimensions");
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<std::vector<std::size_t>> out;
  std::deque<std::size_t> queue;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || seen[start]) continue;
    std::vector<std::size_t> comp;
    seen[start] = 1;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      comp.push_back(i);
      const int r = static_cast<int>(i / width);
      const int c = static_cast<int>(i % width);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= height || cc >= width) continue;
          const std::size_t j = static_cast<std::size_t>(rr) * width + cc;
          if (mask[j] && !seen[j]) {
            seen[j] = 1;
            queue.push_back(j);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

std::optional<FlameBlob> detect_flame(const IRFrame& frame, std::uint16_t threshold) {
  frame.validate();
  require(threshold > 0 && threshold < 65535, ErrorCode::InvalidArgument,
          "flame threshold must lie in (0, 65535)");
  std::vector<std::uint8_t> mask(frame.data.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = frame.data[i] >= threshold ? 1 : 0;

  const auto comps = connected_components(mask, frame.width, frame.height);
  const std::vector<std::size_t>* best = nullptr;
  for (const auto& comp : comps) {
    if (comp.size() >= kMinFlameArea && (!best || comp.size() > best->size())) best = &comp;
  }
  if (!best) return std::nullopt;

  FlameBlob blob;
  blob.area = best->size();
  blob.top_left = {frame.height, frame.width};
  blob.bottom_right = {-1, -1};
  double sr = 0.0, sc = 0.0;
  for (const auto i : *best) {
    const int r = static_cast<int>(i / frame.width);
    const int c = static_cast<int>(i % frame.width);
    sr += r;
    sc += c;
    blob.top_left = {std::min(blob.top_left.row, r), std::min(blob.top_left.col, c)};
    blob.bottom_right = {std::max(blob.bottom_right.row, r), std::max(blob.bottom_right.col, c)};
  }
  blob.centroid_row = sr / static_cast<double>(blob.area);
  blob.centroid_col = sc / static_cast<double>(blob.area);
  return blob;
}

StandoffMeasurement estimate_standoff(const IRFrame& frame, const TorchTemplate& tmpl,
                                      std::uint16_t threshold) {
  const MatchResult m = match_template(frame, tmpl);
  if (m.score < kMinMatchScore) {
    throw DetectionError(MonitorStage::Torch,
                         "torch not found (best match score " + std::to_string(m.score) + ")");
  }
  const auto flame = detect_flame(frame, threshold);
  if (!flame) throw DetectionError(MonitorStage::Flame, "flame not found");

  StandoffMeasurement out;
  out.tip = {m.location.row + tmpl.anchor.row, m.location.col + tmpl.anchor.col};
  out.flame_top_row = flame->top_left.row;
  out.match_score = m.score;
  out.standoff_mm = static_cast<double>(out.flame_top_row - out.tip.row) / frame.px_per_mm;
  return out;
}

std::size_t select_slice(const SlicePlan& dense_plan, double measured_height,
                         std::optional<std::size_t> current_index, double nominal_height) {
  require(dense_plan.h > 0.0, ErrorCode::InvalidArgument, "plan height increment must be positive");
  require(measured_height >= 0.0, ErrorCode::InvalidArgument, "measured height must be non-negative");
  require(!dense_plan.layers.empty(), ErrorCode::PlanExhausted, "plan has no layers");
  const std::size_t count = dense_plan.layers.size();
  const double top = static_cast<double>(count - 1) * dense_plan.h;
  if (measured_height > top + 1e-9) {
    fail(ErrorCode::PlanExhausted, "measured height " + std::to_string(measured_height) +
                                       " mm is above the plan top " + std::to_string(top) + " mm");
  }
  const std::size_t first = current_index ? *current_index + 1 : 0;
  if (first >= count) fail(ErrorCode::PlanExhausted, "no layer left above the current one");

  const double target = measured_height + nominal_height;
  std::size_t best = first;
  double best_gap = std::abs(static_cast<double>(first) * dense_plan.h - target);
  for (std::size_t k = first + 1; k < count; ++k) {
    const double gap = std::abs(static_cast<double>(k) * dense_plan.h - target);
    if (gap < best_gap - 1e-9) {
      best = k;
      best_gap = gap;
    }
  }
  return best;
}

IRFrame synth_frame(const SynthSpec& spec, const Silhouette& torch) {
  require(spec.width > 0 && spec.height > 0 && spec.px_per_mm > 0.0, ErrorCode::InvalidArgument,
          "synthetic frame needs positive size and px_per_mm");
  require(spec.noise_sigma >= 0.0, ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  IRFrame f;
  f.width = spec.width;
  f.height = spec.height;
  f.px_per_mm = spec.px_per_mm;
  f.data.assign(static_cast<std::size_t>(f.width) * f.height, spec.background);
  auto set = [&](int r, int c, std::uint16_t v) { f.data[static_cast<std::size_t>(r) * f.width + c] = v; };

  if (spec.draw_torch) {
    const int r0 = spec.torch_tip.row - torch.anchor.row;
    const int c0 = spec.torch_tip.col - torch.anchor.col;
    require(r0 >= 0 && c0 >= 0 && r0 + torch.height <= f.height && c0 + torch.width <= f.width,
            ErrorCode::InvalidArgument, "torch silhouette does not fit in the frame");
    for (int r = 0; r < torch.height; ++r) {
      for (int c = 0; c < torch.width; ++c) {
        if (torch.mask[static_cast<std::size_t>(r) * torch.width + c]) set(r0 + r, c0 + c, spec.torch_level);
      }
    }
  }
  if (spec.draw_flame) {
    const double rad = spec.flame_radius;
    const auto& fc = spec.flame_center;
    require(rad > 0.0 && fc.row - rad >= 0 && fc.col - rad >= 0 && fc.row + rad < f.height &&
                fc.col + rad < f.width,
            ErrorCode::InvalidArgument, "flame disk does not fit in the frame");
    const int span = static_cast<int>(std::ceil(rad));
    for (int dr = -span; dr <= span; ++dr) {
      for (int dc = -span; dc <= span; ++dc) {
        if (dr * dr + dc * dc <= rad * rad) set(fc.row + dr, fc.col + dc, spec.flame_level);
      }
    }
  }
  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma * 65535.0);
    for (auto& v : f.data) {
      v = static_cast<std::uint16_t>(std::clamp(std::round(v + noise(rng)), 0.0, 65535.0));
    }
  }
  return f;
}

void write_template(const TorchTemplate& tmpl, const std::filesystem::path& pgm_path,
                    const std::filesystem::path& anchor_path) {
  tmpl.validate();
  GrayImage img{tmpl.width, tmpl.height, 255, {}};
  img.data.reserve(tmpl.edges.size());
  for (const auto e : tmpl.edges) img.data.push_back(e ? 255 : 0);
  write_pgm(img, pgm_path);
  std::ofstream out(anchor_path);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + anchor_path.string());
  out << tmpl.anchor.row << ' ' << tmpl.anchor.col << '\n';
}

TorchTemplate read_template(const std::filesystem::path& pgm_path,
                            const std::filesystem::path& anchor_path) {
  const GrayImage img = read_pgm(pgm_path);
  TorchTemplate t;
  t.width = img.width;
  t.height = img.height;
  t.edges.reserve(img.data.size());
  for (const auto v : img.data) t.edges.push_back(v > 0 ? 1 : 0);
  std::ifstream in(anchor_path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + anchor_path.string());
  require(static_cast<bool>(in >> t.anchor.row >> t.anchor.col), ErrorCode::MalformedInput,
          "anchor file must hold 'row col'");
  t.validate();
  return t;
}

}  // namespace waam
