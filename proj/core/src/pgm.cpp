#include "waam/pgm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "waam/error.hpp"

namespace waam {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long integer(const char* what) {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_] - '0');
      require(v <= 1L << 30, ErrorCode::MalformedInput, std::string("pgm: ") + what + " too large");
      ++pos_;
      ++digits;
    }
    require(digits > 0, ErrorCode::MalformedInput, std::string("pgm: missing ") + what);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage parse_pgm(std::string_view bytes) {
  require(bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5', ErrorCode::MalformedInput,
          "pgm: expected P5 magic");
  HeaderReader h(bytes);
  h.advance(2);
  GrayImage img;
  img.width = static_cast<int>(h.integer("width"));
  img.height = static_cast<int>(h.integer("height"));
  const long maxval = h.integer("maxval");
  require(img.width > 0 && img.height > 0, ErrorCode::MalformedInput, "pgm: empty raster");
  require(maxval > 0 && maxval <= 65535, ErrorCode::MalformedInput, "pgm: maxval out of range");
  img.maxval = static_cast<std::uint16_t>(maxval);
  require(h.pos() < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[h.pos()])),
          ErrorCode::MalformedInput, "pgm: missing separator before raster");
  h.advance(1);

  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  const std::size_t depth = maxval < 256 ? 1 : 2;
  require(bytes.size() - h.pos() >= count * depth, ErrorCode::MalformedInput, "pgm: truncated raster");
  img.data.resize(count);
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + h.pos());
  for (std::size_t i = 0; i < count; ++i) {
    img.data[i] = depth == 1 ? raw[i] : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    require(img.data[i] <= img.maxval, ErrorCode::MalformedInput, "pgm: sample exceeds maxval");
  }
  return img;
}

std::string pgm_bytes(const GrayImage& image) {
  const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
  require(image.width > 0 && image.height > 0 && image.data.size() == count,
          ErrorCode::InvalidArgument, "pgm: raster size does not match dimensions");
  std::string out = "P5\n" + std::to_string(image.width) + ' ' + std::to_string(image.height) +
                    '\n' + std::to_string(image.maxval) + '\n';
  const bool wide = image.maxval >= 256;
  out.reserve(out.size() + count * (wide ? 2 : 1));
  for (const auto v : image.data) {
    if (wide) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  return out;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pgm(bytes);
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out << pgm_bytes(image);
}

}  // namespace waam
