#pragma once

#include "gadv/net.hpp"

#include <string>

namespace gadv {

inline constexpr int kModelFormatVersion = 1;

// JSON document: format_version, input_dim, class_names and a `layers` list
// of {activation, rows, cols, weights (row-major), bias}. Numbers are written
// with 17 significant digits so a load reproduces every weight exactly.
std::string model_to_string(const Net& net);
Net model_from_string(const std::string& text);

void save_model(const Net& net, const std::string& path);
Net load_model(const std::string& path);

}  // namespace gadv
