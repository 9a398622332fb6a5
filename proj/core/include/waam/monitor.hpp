#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "waam/error.hpp"
#include "waam/pgm.hpp"
#include "waam/slicer.hpp"

namespace waam {

inline constexpr std::size_t kMinFlameArea = 25;  // px
inline constexpr double kMinMatchScore = 0.5;
inline constexpr double kEdgeThresholdRatio = 0.25;

struct Pixel {
  int row = 0;
  int col = 0;
  bool operator==(const Pixel&) const = default;
};

/// 16-bit thermal frame.
struct IRFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;
  double px_per_mm = 1.0;

  std::uint16_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  void validate() const;
};

IRFrame frame_from_image(const GrayImage& image, double px_per_mm);
GrayImage frame_image(const IRFrame& frame);

/// Binary mask with the torch tip marked.
struct Silhouette {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;
  Pixel anchor;
};

/// Binary edge bitmap of the torch; `anchor` is the tip offset from the top-left.
struct TorchTemplate {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> edges;
  Pixel anchor;

  void validate() const;
};

/// Nozzle body above a narrower contact tip, with a two-pixel background margin.
Silhouette default_torch_silhouette();

/// Edge map of the silhouette rendered on an empty background.
TorchTemplate make_template(const Silhouette& silhouette);

/// Sobel gradient magnitude, binarised at ratio x the image maximum.
/// Border pixels are zero. An image without gradient yields an empty map.
std::vector<std::uint8_t> edge_map(const std::vector<std::uint16_t>& data, int width, int height,
                                   double ratio = kEdgeThresholdRatio);

struct MatchResult {
  Pixel location;  // template top-left
  double score = 0.0;
};

/// Normalised cross-correlation of the template against the frame's edge map.
/// Windows without edge variance score 0. Ties go to the smallest row, then column.
MatchResult match_template(const IRFrame& frame, const TorchTemplate& tmpl);

struct FlameBlob {
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  Pixel top_left;      // bounding box, inclusive
  Pixel bottom_right;
  std::size_t area = 0;
};

/// 8-connected components of `mask`, each as a list of flat indices in raster order.
std::vector<std::vector<std::size_t>> connected_components(const std::vector<std::uint8_t>& mask,
                                                           int width, int height);

/// Largest 8-connected component of pixels >= threshold with area >= 25 px.
std::optional<FlameBlob> detect_flame(const IRFrame& frame, std::uint16_t threshold);

enum class MonitorStage { Torch, Flame };

class DetectionError : public Error {
 public:
  DetectionError(MonitorStage stage, const std::string& message)
      : Error(ErrorCode::NotFound, message), stage_(stage) {}
  MonitorStage stage() const noexcept { return stage_; }

 private:
  MonitorStage stage_;
};

struct StandoffMeasurement {
  double standoff_mm = 0.0;
  Pixel tip;
  int flame_top_row = 0;
  double match_score = 0.0;
};

/// Vertical distance from torch tip to the top of the flame, in mm.
/// Throws DetectionError naming the stage that failed.
StandoffMeasurement estimate_standoff(const IRFrame& frame, const TorchTemplate& tmpl,
                                      std::uint16_t threshold);

/// Layer whose cumulative height k * h is nearest measured_height + nominal_height,
/// restricted to k > current_index. Ties go to the lower index. Throws
/// PlanExhausted when the measurement lies above the plan or no layer is left.
std::size_t select_slice(const SlicePlan& dense_plan, double measured_height,
                         std::optional<std::size_t> current_index, double nominal_height);

struct SynthSpec {
  int width = 320;
  int height = 240;
  Pixel torch_tip{100, 160};
  Pixel flame_center{150, 160};
  double flame_radius = 10.0;      // px
  double noise_sigma = 0.0;        // fraction of full scale
  double px_per_mm = 4.0;
  std::uint64_t seed = 1;
  std::uint16_t background = 8000;
  std::uint16_t torch_level = 40000;
  std::uint16_t flame_level = 60000;
  bool draw_torch = true;
  bool draw_flame = true;
};

/// Deterministic synthetic frame: torch silhouette placed with its anchor on
/// torch_tip, a filled flame disk, and additive Gaussian noise.
IRFrame synth_frame(const SynthSpec& spec, const Silhouette& torch = default_torch_silhouette());

/// Template as an 8-bit PGM (edges 255) plus a sidecar "row col" text file.
void write_template(const TorchTemplate& tmpl, const std::filesystem::path& pgm_path,
                    const std::filesystem::path& anchor_path);
TorchTemplate read_template(const std::filesystem::path& pgm_path,
                            const std::filesystem::path& anchor_path);

}  // namespace waam
