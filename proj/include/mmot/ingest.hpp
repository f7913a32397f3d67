#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mmot/core.hpp"
#include "mmot/rng.hpp"

namespace mmot {

// CSV: comma-separated, '.' decimal, LF or CRLF, no header row. One row per
// sample, one column per dimension.
inline MarginalSamples load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  std::vector<double> data;
  std::size_t dim = 0, rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t cols = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string cell = line.substr(pos, comma - pos);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        raise(ErrorCode::ParseError,
              path + ": non-numeric cell '" + cell + "' in row " +
                  std::to_string(rows + 1));
      data.push_back(v);
      ++cols;
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    ++rows;
    if (dim == 0)
      dim = cols;
    else if (cols != dim)
      raise(ErrorCode::RaggedRows,
            path + ": row " + std::to_string(rows) + " has " +
                std::to_string(cols) + " columns, expected " +
                std::to_string(dim));
  }
  if (rows == 0) raise(ErrorCode::EmptyFile, path + ": no data rows");
  return make_samples(path, dim, std::move(data));
}

inline void save_csv(const MarginalSamples& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path);
  char buf[64];
  for (std::size_t i = 0; i < m.num_points; ++i) {
    for (std::size_t d = 0; d < m.dim; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.data[i * m.dim + d]);
      out << (d ? "," : "") << buf;
    }
    out << '\n';
  }
}

enum class Family { normal, uniform, swiss_roll, banana, funnel, ring };

inline Family family_from_string(const std::string& s) {
  if (s == "normal") return Family::normal;
  if (s == "uniform") return Family::uniform;
  if (s == "swiss_roll") return Family::swiss_roll;
  if (s == "banana") return Family::banana;
  if (s == "funnel") return Family::funnel;
  if (s == "ring") return Family::ring;
  raise(ErrorCode::UnknownFamily, "unknown family '" + s + "'");
}

inline const char* family_name(Family f) {
  switch (f) {
    case Family::normal: return "normal";
    case Family::uniform: return "uniform";
    case Family::swiss_roll: return "swiss_roll";
    case Family::banana: return "banana";
    case Family::funnel: return "funnel";
    case Family::ring: return "ring";
  }
  return "?";
}

struct SyntheticSpec {
  Family family = Family::normal;
  std::size_t num_points = 0;
  std::size_t dim = 2;  // normal and uniform only; the rest are 2-D
  std::uint64_t seed = 0;
};

inline MarginalSamples sample_synthetic(const SyntheticSpec& spec) {
  if (spec.num_points < 1)
    raise(ErrorCode::TooFewPoints, "num_points must be >= 1");
  std::mt19937_64 gen(spec.seed);
  const std::size_t np = spec.num_points;
  std::vector<double> data;
  std::size_t dim = 2;
  switch (spec.family) {
    case Family::normal:
      dim = spec.dim;
      data.reserve(np * dim);
      for (std::size_t i = 0; i < np * dim; ++i)
        data.push_back(rng::normal(gen));
      break;
    case Family::uniform:
      dim = spec.dim;
      data.reserve(np * dim);
      for (std::size_t i = 0; i < np * dim; ++i)
        data.push_back(rng::uniform01(gen));
      break;
    case Family::swiss_roll: {
      data.reserve(np * 2);
      const double t_lo = 1.5 * std::numbers::pi;
      const double t_hi = 4.5 * std::numbers::pi;
      for (std::size_t i = 0; i < np; ++i) {
        const double t = rng::uniform(gen, t_lo, t_hi);
        data.push_back(t * std::cos(t) / t_hi + 0.05 * rng::normal(gen));
        data.push_back(t * std::sin(t) / t_hi + 0.05 * rng::normal(gen));
      }
      break;
    }
    case Family::banana:
      data.reserve(np * 2);
      for (std::size_t i = 0; i < np; ++i) {
        const double z1 = rng::normal(gen);
        const double z2 = rng::normal(gen);
        data.push_back(z1);
        data.push_back(z2 + 0.5 * z1 * z1 - 1.0);
      }
      break;
    case Family::funnel:
      data.reserve(np * 2);
      for (std::size_t i = 0; i < np; ++i) {
        const double z1 = rng::normal(gen);
        data.push_back(z1);
        data.push_back(std::exp(z1 / 2.0) * rng::normal(gen));
      }
      break;
    case Family::ring:
      data.reserve(np * 2);
      for (std::size_t i = 0; i < np; ++i) {
        double r = 1.0 + 0.1 * rng::normal(gen);
        while (r < 0.5 || r > 1.5) r = 1.0 + 0.1 * rng::normal(gen);
        const double theta = rng::uniform(gen, 0.0, 2.0 * std::numbers::pi);
        data.push_back(r * std::cos(theta));
        data.push_back(r * std::sin(theta));
      }
      break;
  }
  std::string id = std::string(family_name(spec.family)) + "-" +
                   std::to_string(spec.seed);
  return make_samples(std::move(id), dim, std::move(data));
}

struct GrayImage {
  std::size_t width = 0, height = 0;
  std::vector<double> pixels;  // row-major, intensities in [0, 1]

  double at(std::size_t row, std::size_t col) const {
    return pixels[row * width + col];
  }
};

namespace detail {

// Reads the next whitespace/comment-delimited token of a PGM header.
inline std::string pgm_token(std::istream& in) {
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

inline std::size_t pgm_uint(std::istream& in, const std::string& path) {
  const std::string tok = pgm_token(in);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    raise(ErrorCode::TruncatedData, path + ": bad PGM header token");
  return static_cast<std::size_t>(std::stoull(tok));
}

}  // namespace detail

inline GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  const std::string magic = detail::pgm_token(in);
  if (magic != "P2" && magic != "P5")
    raise(ErrorCode::BadMagic, path + ": not a P2/P5 PGM file");
  GrayImage img;
  img.width = detail::pgm_uint(in, path);
  img.height = detail::pgm_uint(in, path);
  const std::size_t maxval = detail::pgm_uint(in, path);
  if (maxval == 0 || maxval > 65535)
    raise(ErrorCode::BadMagic, path + ": unsupported maxval");
  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);
  if (magic == "P2") {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string tok = detail::pgm_token(in);
      if (tok.empty())
        raise(ErrorCode::TruncatedData, path + ": truncated P2 data");
      img.pixels[i] = std::stod(tok) / static_cast<double>(maxval);
    }
  } else {
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      raise(ErrorCode::TruncatedData, path + ": truncated P5 data");
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t v =
          bytes_per == 1 ? raw[i]
                         : (static_cast<std::size_t>(raw[2 * i]) << 8) |
                               raw[2 * i + 1];
      img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  for (double v : img.pixels)
    if (!(v >= 0.0 && v <= 1.0))
      raise(ErrorCode::TruncatedData, path + ": intensity out of range");
  return img;
}

inline void save_pgm(const GrayImage& img, const std::string& path,
                     std::size_t maxval = 255) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  for (double v : img.pixels) {
    const std::size_t q = static_cast<std::size_t>(
        std::lround(std::clamp(v, 0.0, 1.0) * static_cast<double>(maxval)));
    if (maxval > 255) out.put(static_cast<char>((q >> 8) & 0xff));
    out.put(static_cast<char>(q & 0xff));
  }
}

enum class ImageMode { grid, intensity_sampled };

// grid: one (x, y, intensity) sample per pixel, x/y at pixel centers in
// [0,1]. intensity_sampled: N_p 2-D pixel-center positions drawn with
// probability proportional to intensity, equal implicit weights 1/N_p.
inline MarginalSamples image_to_samples(const GrayImage& img, std::size_t np,
                                        ImageMode mode,
                                        std::uint64_t seed = 0) {
  const double w = static_cast<double>(img.width);
  const double h = static_cast<double>(img.height);
  if (mode == ImageMode::grid) {
    if (np != img.width * img.height)
      raise(ErrorCode::MismatchedCounts,
            "grid mode requires N_p = width * height");
    std::vector<double> data;
    data.reserve(np * 3);
    for (std::size_t row = 0; row < img.height; ++row)
      for (std::size_t col = 0; col < img.width; ++col) {
        data.push_back((static_cast<double>(col) + 0.5) / w);
        data.push_back((static_cast<double>(row) + 0.5) / h);
        data.push_back(img.at(row, col));
      }
    return make_samples("image-grid", 3, std::move(data));
  }
  if (np < 1) raise(ErrorCode::TooFewPoints, "N_p must be >= 1");
  std::vector<double> cdf(img.pixels.size());
  double total = 0.0;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    total += img.pixels[i];
    cdf[i] = total;
  }
  if (total <= 0.0)
    raise(ErrorCode::ZeroMassImage, "image has zero total intensity");
  std::mt19937_64 gen(seed);
  std::vector<double> data;
  data.reserve(np * 2);
  for (std::size_t i = 0; i < np; ++i) {
    const double u = rng::uniform01(gen) * total;
    const std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const std::size_t pix = std::min(idx, cdf.size() - 1);
    const std::size_t row = pix / img.width;
    const std::size_t col = pix % img.width;
    data.push_back((static_cast<double>(col) + 0.5) / w);
    data.push_back((static_cast<double>(row) + 0.5) / h);
  }
  return make_samples("image-sampled", 2, std::move(data));
}

}  // namespace mmot
