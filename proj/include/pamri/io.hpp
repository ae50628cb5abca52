#pragma once

#include <string>
#include <vector>

#include "pamri/field.hpp"
#include "pamri/phantom.hpp"

namespace pamri {

/// Plain real 2D array, row-major.
struct RealArray {
  int height = 0;
  int width = 0;
  std::vector<double> values;
};

/// Array files are raw little-endian float64 payloads with a JSON sidecar
/// `<path>.json` describing {shape, dtype, order}. Complex data ("c128") is
/// interleaved re/im; real data is "f64".
void save_complex_array(const std::string& path, const ComplexImage& img);
ComplexImage load_complex_array(const std::string& path);

void save_real_array(const std::string& path, const RealArray& arr);
RealArray load_real_array(const std::string& path);

/// 8-bit binary PGM of the magnitude image, normalized to its own maximum.
void save_magnitude_pgm(const std::string& path, const ComplexImage& img);

/// Lesion boxes as a JSON list of {row_min,row_max,col_min,col_max,label}.
void save_boxes_json(const std::string& path, const std::vector<LesionBox>& boxes);
std::vector<LesionBox> load_boxes_json(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Fixed-format double for CSV cells so output bytes are reproducible.
std::string format_double(double v);

}  // namespace pamri
