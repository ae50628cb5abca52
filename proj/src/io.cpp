#include "pamri/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace pamri {

namespace {

static_assert(sizeof(double) == 8, "float64 payloads require 8-byte double");

void write_sidecar(const std::string& path, int h, int w, const char* dtype) {
  nlohmann::json j;
  j["shape"] = {h, w};
  j["dtype"] = dtype;
  j["order"] = "row";
  write_text_file(path + ".json", j.dump() + "\n");
}

struct Sidecar {
  int height = 0;
  int width = 0;
  std::string dtype;
};

Sidecar read_sidecar(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path + ".json"));
    Sidecar s;
    const auto shape = j.at("shape");
    if (!shape.is_array() || shape.size() != 2) {
      throw IoError(path + ".json: shape must be [h, w]");
    }
    s.height = shape[0].get<int>();
    s.width = shape[1].get<int>();
    s.dtype = j.at("dtype").get<std::string>();
    if (j.at("order").get<std::string>() != "row") {
      throw IoError(path + ".json: only row-major order is supported");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ".json: " + e.what());
  }
}

void write_payload(const std::string& path, const double* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  // Byte order: x86 and all targets we build for are little-endian; the
  // format is defined as little-endian.
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(double)));
  if (!out) throw IoError("short write to '" + path + "'");
}

std::vector<double> read_payload(const std::string& path, std::size_t n) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open '" + path + "'");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != n * sizeof(double)) {
    throw IoError(path + ": expected " + std::to_string(n * sizeof(double)) +
                  " bytes, found " + std::to_string(bytes));
  }
  std::vector<double> data(n);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("short read from '" + path + "'");
  return data;
}

}  // namespace

void save_complex_array(const std::string& path, const ComplexImage& img) {
  write_payload(path, reinterpret_cast<const double*>(img.data()),
                img.size() * 2);
  write_sidecar(path, img.height(), img.width(), "c128");
}

ComplexImage load_complex_array(const std::string& path) {
  const Sidecar s = read_sidecar(path);
  if (s.dtype != "c128") {
    throw IoError(path + ": expected dtype c128, got " + s.dtype);
  }
  ComplexImage img(s.height, s.width);
  const auto data =
      read_payload(path, static_cast<std::size_t>(s.height) * s.width * 2);
  for (std::size_t i = 0; i < img.size(); ++i) {
    img.data()[i] = cdouble{data[2 * i], data[2 * i + 1]};
  }
  return img;
}

void save_real_array(const std::string& path, const RealArray& arr) {
  write_payload(path, arr.values.data(), arr.values.size());
  write_sidecar(path, arr.height, arr.width, "f64");
}

RealArray load_real_array(const std::string& path) {
  const Sidecar s = read_sidecar(path);
  if (s.dtype != "f64") {
    throw IoError(path + ": expected dtype f64, got " + s.dtype);
  }
  RealArray arr;
  arr.height = s.height;
  arr.width = s.width;
  arr.values = read_payload(path, static_cast<std::size_t>(s.height) * s.width);
  return arr;
}

void save_magnitude_pgm(const std::string& path, const ComplexImage& img) {
  double maxmag = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    maxmag = std::max(maxmag, std::abs(img.data()[i]));
  }
  const double scale = maxmag > 0.0 ? 255.0 / maxmag : 0.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> row(img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      row[c] = static_cast<unsigned char>(
          std::lround(std::abs(img.at(r, c)) * scale));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

void save_boxes_json(const std::string& path,
                     const std::vector<LesionBox>& boxes) {
  nlohmann::json j = nlohmann::json::array();
  for (const LesionBox& b : boxes) {
    j.push_back({{"row_min", b.row_min},
                 {"row_max", b.row_max},
                 {"col_min", b.col_min},
                 {"col_max", b.col_max},
                 {"label", b.label}});
  }
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<LesionBox> load_boxes_json(const std::string& path) {
  std::vector<LesionBox> boxes;
  try {
    const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
    for (const auto& e : j) {
      LesionBox b;
      b.row_min = e.at("row_min").get<int>();
      b.row_max = e.at("row_max").get<int>();
      b.col_min = e.at("col_min").get<int>();
      b.col_max = e.at("col_max").get<int>();
      b.label = e.value("label", std::string{});
      boxes.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return boxes;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("short write to '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace pamri
