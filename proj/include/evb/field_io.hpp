#pragma once

// File emission: current CSV, 16-bit PGM (P5) and 16-bit grayscale PNG of the
// density and phase. Output is byte-deterministic: fixed "%.12g" formatting,
// fixed node order, C-locale decimal point.

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evb/field.hpp"

namespace evb::io {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::ofstream open_binary(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

inline void put_u32_be(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>((v >> 24) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>(v & 0xff));
}

inline void png_chunk(std::ofstream& out, const char type[4], const std::string& data) {
  std::string hdr;
  put_u32_be(hdr, static_cast<std::uint32_t>(data.size()));
  out.write(hdr.data(), 4);
  std::string body(type, 4);
  body += data;
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                           static_cast<uInt>(body.size()));
  std::string tail;
  put_u32_be(tail, static_cast<std::uint32_t>(crc));
  out.write(tail.data(), 4);
}

}  // namespace detail

// Row-major CSV of the field and its currents:
//   x,y,re,im,rho,jx,jy,jvx,jvy,jpx,jpy
inline void write_field_csv(const std::string& path, const FieldMap& field,
                            const CurrentMap& cur) {
  if (!field.grid.same_as(cur.grid))
    throw std::invalid_argument("write_field_csv: field and current grids differ");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "x,y,re,im,rho,jx,jy,jvx,jvy,jpx,jpy\n";
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const Grid::Point p = field.grid.point(i);
    out << detail::fmt(p.x) << ',' << detail::fmt(p.y) << ','
        << detail::fmt(field.psi[i].real()) << ',' << detail::fmt(field.psi[i].imag()) << ','
        << detail::fmt(cur.rho[i]) << ',' << detail::fmt(cur.j[i][0]) << ','
        << detail::fmt(cur.j[i][1]) << ',' << detail::fmt(cur.j_vortex[i][0]) << ','
        << detail::fmt(cur.j_vortex[i][1]) << ',' << detail::fmt(cur.j_potential[i][0])
        << ',' << detail::fmt(cur.j_potential[i][1]) << '\n';
  }
}

// 16-bit grayscale raster with values already in [0, 65535].
struct Raster16 {
  int width = 0, height = 0;
  std::vector<std::uint16_t> pixels;  // row-major, top row first
};

inline void write_pgm16(const std::string& path, const Raster16& img) {
  auto out = detail::open_binary(path);
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::string bytes;
  bytes.reserve(img.pixels.size() * 2);
  for (std::uint16_t v : img.pixels) {  // big-endian per PGM
    bytes.push_back(static_cast<char>(v >> 8));
    bytes.push_back(static_cast<char>(v & 0xff));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void write_png16(const std::string& path, const Raster16& img) {
  auto out = detail::open_binary(path);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::string ihdr;
  detail::put_u32_be(ihdr, static_cast<std::uint32_t>(img.width));
  detail::put_u32_be(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(16);  // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filter set
  ihdr.push_back(0);   // no interlace
  detail::png_chunk(out, "IHDR", ihdr);

  std::string raw;
  raw.reserve(static_cast<std::size_t>(img.height) * (1 + 2 * img.width));
  for (int row = 0; row < img.height; ++row) {
    raw.push_back(0);  // filter: none
    for (int col = 0; col < img.width; ++col) {
      const std::uint16_t v = img.pixels[static_cast<std::size_t>(row) * img.width + col];
      raw.push_back(static_cast<char>(v >> 8));
      raw.push_back(static_cast<char>(v & 0xff));
    }
  }
  uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
  std::string idat(bound, '\0');
  if (::compress2(reinterpret_cast<Bytef*>(idat.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  9) != Z_OK)
    throw std::runtime_error("png: deflate failed");
  idat.resize(bound);
  detail::png_chunk(out, "IDAT", idat);
  detail::png_chunk(out, "IEND", "");
}

// Density raster: rho mapped linearly [0, max rho] -> [0, 65535].
// Phase raster: arg psi mapped linearly [-pi, pi] -> [0, 65535].
// Polar fields are rasterized by re-evaluating / bilinearly resampling onto a
// square covering the disc; pixels outside r_max are zero. Rows run from
// +y at the top down, image convention.
enum class RasterKind { density, phase };

inline Raster16 rasterize(const FieldMap& field, RasterKind kind, int px = 0) {
  const Grid& g = field.grid;
  Raster16 img;
  if (!g.is_polar()) {
    img.width = g.nx;
    img.height = g.ny;
    img.pixels.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
    double max_rho = 0.0;
    for (const cplx& v : field.psi) max_rho = std::max(max_rho, std::norm(v));
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const cplx v = field.psi[g.index(iy, ix)];
        double t = 0.0;
        if (kind == RasterKind::density)
          t = max_rho > 0.0 ? std::norm(v) / max_rho : 0.0;
        else
          t = (std::arg(v) + pi) / (2.0 * pi);
        const int row = g.ny - 1 - iy;  // +y up in physics, down in image files
        img.pixels[static_cast<std::size_t>(row) * g.nx + ix] =
            static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
      }
    return img;
  }

  const int n = px > 0 ? px : 2 * g.nr;
  img.width = img.height = n;
  img.pixels.assign(static_cast<std::size_t>(n) * n, 0);
  std::vector<cplx> values(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
  const double he = g.r_max;
  double max_rho = 0.0;
  for (int row = 0; row < n; ++row) {
    const double y = he - (2.0 * he) * row / (n - 1);
    for (int col = 0; col < n; ++col) {
      const double x = -he + (2.0 * he) * col / (n - 1);
      const double r = std::hypot(x, y);
      if (r >= g.r_max) continue;
      double phi = std::atan2(y, x);
      if (phi < 0.0) phi += 2.0 * pi;
      // bilinear in (r, phi)
      const double fr = r / g.hr() - 0.5;
      const int ir0 = std::clamp(static_cast<int>(std::floor(fr)), 0, g.nr - 1);
      const int ir1 = std::min(ir0 + 1, g.nr - 1);
      const double tr = std::clamp(fr - ir0, 0.0, 1.0);
      const double fp = phi / g.dphi();
      const int ip0 = static_cast<int>(std::floor(fp)) % g.nphi;
      const int ip1 = (ip0 + 1) % g.nphi;
      const double tp = fp - std::floor(fp);
      const cplx v = (1.0 - tr) * ((1.0 - tp) * field.psi[g.index(ir0, ip0)] +
                                   tp * field.psi[g.index(ir0, ip1)]) +
                     tr * ((1.0 - tp) * field.psi[g.index(ir1, ip0)] +
                           tp * field.psi[g.index(ir1, ip1)]);
      values[static_cast<std::size_t>(row) * n + col] = v;
      max_rho = std::max(max_rho, std::norm(v));
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    double t = 0.0;
    if (kind == RasterKind::density)
      t = max_rho > 0.0 ? std::norm(values[i]) / max_rho : 0.0;
    else
      t = (std::arg(values[i]) + pi) / (2.0 * pi);
    img.pixels[i] = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
  }
  return img;
}

}  // namespace evb::io
