#include "lacmatch/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "lacmatch/errors.hpp"

namespace lacmatch {

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_positive(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw InputError("malformed PGM header in " + path.string());
  }
}

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  for (auto& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e;
}

}  // namespace

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // Integer form of 0.299 R + 0.587 G + 0.114 B with round-half-up.
  const int v = 299 * r + 587 * g + 114 * b;
  return static_cast<std::uint8_t>((v + 500) / 1000);
}

RgbImage RgbImage::from_gray(const GrayImage& g) {
  RgbImage out{g.width(), g.height(), {}};
  out.data.resize(static_cast<std::size_t>(3) * g.width() * g.height());
  auto px = g.pixels();
  for (std::size_t i = 0; i < px.size(); ++i)
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = px[i];
  return out;
}

void RgbImage::set(int x, int y, std::uint8_t r, std::uint8_t gr, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  data[i] = r;
  data[i + 1] = gr;
  data[i + 2] = b;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  if (pgm_token(in) != "P5") throw InputError("not a binary PGM (P5): " + path.string());
  const int w = parse_positive(pgm_token(in), path);
  const int h = parse_positive(pgm_token(in), path);
  const int maxval = parse_positive(pgm_token(in), path);
  if (maxval > 255) throw InputError("16-bit PGM not supported: " + path.string());
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw InputError("truncated PGM: " + path.string());
  if (maxval != 255)
    for (auto& v : data)
      v = static_cast<std::uint8_t>(std::lround(255.0 * std::min<int>(v, maxval) / maxval));
  return GrayImage(w, h, std::move(data));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels().data()),
            static_cast<std::streamsize>(img.pixels().size()));
}

GrayImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw InputError("cannot read PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    png_image_free(&image);
    throw InputError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < gray.size(); ++i)
    gray[i] = luma(rgba[4 * i], rgba[4 * i + 1], rgba[4 * i + 2]);
  return GrayImage(w, h, std::move(gray));
}

namespace {

void write_png_raw(const std::filesystem::path& path, int w, int h, std::uint32_t format,
                   const std::uint8_t* data) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, data, 0, nullptr))
    throw InputError("cannot write PNG " + path.string() + ": " + image.message);
}

}  // namespace

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  write_png_raw(path, img.width(), img.height(), PNG_FORMAT_GRAY, img.pixels().data());
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  write_png_raw(path, img.width, img.height, PNG_FORMAT_RGB, img.data.data());
}

GrayImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  in.close();
  if (sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  if (png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  throw InputError("unsupported image format (expected P5 PGM or PNG): " + path.string());
}

void write_image(const std::filesystem::path& path, const GrayImage& img) {
  const std::string ext = lower_ext(path);
  if (ext == ".pgm") return write_pgm(path, img);
  if (ext == ".png") return write_png(path, img);
  throw InputError("unsupported image extension: " + path.string());
}

}  // namespace lacmatch
