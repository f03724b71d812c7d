#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "grf/io.hpp"

namespace grf {
namespace {

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<unsigned char> bytes;
};

void skip_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

int header_int(std::istream& in, const char* what) {
  skip_space(in);
  long v = -1;
  if (!(in >> v) || v <= 0 || v > (1L << 24)) throw Error(Errc::MalformedHeader, std::string("bad ") + what);
  return static_cast<int>(v);
}

Raster read_raster(std::istream& in) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw Error(Errc::MalformedHeader, "expected binary PNM magic P5 or P6");
  Raster r;
  r.channels = magic[1] == '5' ? 1 : 3;
  r.width = header_int(in, "width");
  r.height = header_int(in, "height");
  if (header_int(in, "maxval") != 255) throw Error(Errc::MalformedHeader, "only maxval 255 is supported");
  const int sep = in.get();
  if (sep != ' ' && sep != '\n' && sep != '\r' && sep != '\t')
    throw Error(Errc::MalformedHeader, "missing whitespace after maxval");
  r.bytes.resize(static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height) *
                 static_cast<std::size_t>(r.channels));
  if (!in.read(reinterpret_cast<char*>(r.bytes.data()), static_cast<std::streamsize>(r.bytes.size())))
    throw Error(Errc::MalformedHeader, "raster shorter than the header declares");
  return r;
}

void write_raster(std::ostream& out, int width, int height, int channels, const std::vector<unsigned char>& bytes) {
  out << (channels == 1 ? "P5" : "P6") << '\n' << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "write failed");
}

Raster read_grey(std::istream& in, const char* what) {
  Raster r = read_raster(in);
  if (r.channels != 1) throw Error(Errc::MalformedHeader, std::string(what) + " must be P5");
  return r;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + p.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + p.string());
  return out;
}

}  // namespace

Image read_image(std::istream& in) {
  const Raster r = read_raster(in);
  Image img(r.width, r.height, r.channels);
  std::transform(r.bytes.begin(), r.bytes.end(), img.values.begin(), [](unsigned char b) { return b / 255.0; });
  return img;
}

void write_image(std::ostream& out, const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw Error(Errc::ChannelMismatch, "PNM holds 1 or 3 channels");
  std::vector<unsigned char> bytes(image.values.size());
  std::transform(image.values.begin(), image.values.end(), bytes.begin(), [](double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  write_raster(out, image.width, image.height, image.channels, bytes);
}

Labelling read_labelling(std::istream& in, int label_count) {
  const Raster r = read_grey(in, "labelling");
  Labelling y(r.width, r.height);
  for (std::size_t t = 0; t < r.bytes.size(); ++t) {
    if (label_count > 0 && r.bytes[t] >= label_count)
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(r.bytes[t]) + " at node " + std::to_string(t));
    y.labels[t] = r.bytes[t];
  }
  return y;
}

void write_labelling(std::ostream& out, const Labelling& y) {
  write_raster(out, y.width, y.height, 1, std::vector<unsigned char>(y.labels.begin(), y.labels.end()));
}

ClampMask read_clamp_mask(std::istream& in, int label_count) {
  const Raster r = read_grey(in, "clamp mask");
  ClampMask m(r.width, r.height);
  for (std::size_t t = 0; t < r.bytes.size(); ++t) {
    if (r.bytes[t] == 0) continue;
    const int k = r.bytes[t] - 1;
    if (label_count > 0 && k >= label_count)
      throw Error(Errc::LabelOutOfRange, "clamp label " + std::to_string(k) + " at node " + std::to_string(t));
    m.labels[t] = k;
  }
  return m;
}

void write_clamp_mask(std::ostream& out, const ClampMask& mask) {
  std::vector<unsigned char> bytes(mask.labels.size());
  for (std::size_t t = 0; t < bytes.size(); ++t) {
    const int k = mask.labels[t];
    if (k != ClampMask::kFree && (k < 0 || k > 254))
      throw Error(Errc::LabelOutOfRange, "clamp label " + std::to_string(k) + " does not fit a P5 mask");
    bytes[t] = static_cast<unsigned char>(k + 1);
  }
  write_raster(out, mask.width, mask.height, 1, bytes);
}

Image read_image(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_image(in);
}
void write_image(const std::filesystem::path& path, const Image& image) {
  auto out = open_out(path);
  write_image(out, image);
}
Labelling read_labelling(const std::filesystem::path& path, int label_count) {
  auto in = open_in(path);
  return read_labelling(in, label_count);
}
void write_labelling(const std::filesystem::path& path, const Labelling& y) {
  auto out = open_out(path);
  write_labelling(out, y);
}
ClampMask read_clamp_mask(const std::filesystem::path& path, int label_count) {
  auto in = open_in(path);
  return read_clamp_mask(in, label_count);
}
void write_clamp_mask(const std::filesystem::path& path, const ClampMask& mask) {
  auto out = open_out(path);
  write_clamp_mask(out, mask);
}

}  // namespace grf
