#include "fgaug/imageio/pnm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fgaug/errors.hpp"

namespace fgaug::imageio {
namespace {

struct RawPnm {
  char kind;  // '5' or '6'
  int width, height, maxval;
  std::vector<unsigned char> bytes;
};

// Next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& is, const std::string& path) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw IoError(path, "malformed header: unexpected end of file");
  return tok;
}

int parse_header_int(const std::string& tok, const std::string& path, const char* field) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(path, std::string("malformed header: bad ") + field + " '" + tok + "'");
  }
}

RawPnm read_pnm(const std::filesystem::path& p) {
  const std::string path = p.string();
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError(path, "cannot open file");
  const std::string magic = next_token(is, path);
  if (magic != "P5" && magic != "P6") throw IoError(path, "malformed header: magic '" + magic + "'");
  RawPnm r;
  r.kind = magic[1];
  r.width = parse_header_int(next_token(is, path), path, "width");
  r.height = parse_header_int(next_token(is, path), path, "height");
  r.maxval = parse_header_int(next_token(is, path), path, "maxval");
  if (r.maxval > 255) {
    throw IoError(path, "unsupported bit depth: maxval " + std::to_string(r.maxval));
  }
  const std::size_t n = static_cast<std::size_t>(r.width) * r.height * (r.kind == '6' ? 3 : 1);
  r.bytes.resize(n);
  if (!is.read(reinterpret_cast<char*>(r.bytes.data()), static_cast<std::streamsize>(n))) {
    throw IoError(path, "truncated pixel data");
  }
  return r;
}

void write_pnm(const std::filesystem::path& p, char kind, int w, int h,
               const std::vector<unsigned char>& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(p.string(), "cannot open for writing");
  os << 'P' << kind << '\n' << w << ' ' << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError(p.string(), "write failed");
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  RawPnm r = read_pnm(path);
  Image img(r.width, r.height, r.kind == '6' ? 3 : 1);
  for (std::size_t i = 0; i < r.bytes.size(); ++i) {
    img.pixels[i] = std::min(1.0, static_cast<double>(r.bytes[i]) / r.maxval);
  }
  return img;
}

void save_image(const Image& image, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(image.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  }
  write_pnm(path, image.channels == 3 ? '6' : '5', image.width, image.height, bytes);
}

BinaryMask load_mask(const std::filesystem::path& path) {
  RawPnm r = read_pnm(path);
  if (r.kind != '5') throw IoError(path.string(), "mask must be a single-channel P5 file");
  BinaryMask m(r.width, r.height);
  const int half = (r.maxval + 1) / 2;
  for (std::size_t i = 0; i < r.bytes.size(); ++i) m.values[i] = r.bytes[i] >= half ? 1 : 0;
  return m;
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(mask.values.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.values[i] ? 255 : 0;
  write_pnm(path, '5', mask.width, mask.height, bytes);
}

}  // namespace fgaug::imageio
