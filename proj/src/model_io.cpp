#include "gadv/model_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gadv {

namespace {

using nlohmann::json;

void write_number(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

const char* activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "identity";
}

double finite_number(const json& v, const std::string& where) {
  // nlohmann parses NaN/Inf literals as null; reject both forms.
  require(v.is_number(), "non_finite", where + ": weight is not a finite number");
  const double d = v.get<double>();
  require(std::isfinite(d), "non_finite", where + ": weight is not finite");
  return d;
}

}  // namespace

std::string model_to_string(const Net& net) {
  std::ostringstream os;
  os << "{\n  \"format_version\": " << kModelFormatVersion << ",\n";
  os << "  \"input_dim\": " << net.input_dim() << ",\n";
  os << "  \"class_names\": " << json(net.class_names()).dump() << ",\n";
  os << "  \"layers\": [";
  const auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    os << (k ? ",\n" : "\n") << "    {\"activation\": \"" << activation_name(l.activation)
       << "\", \"rows\": " << l.out() << ", \"cols\": " << l.in() << ",\n";
    os << "     \"weights\": [";
    for (Eigen::Index r = 0; r < l.out(); ++r)
      for (Eigen::Index c = 0; c < l.in(); ++c) {
        if (r || c) os << ", ";
        write_number(os, l.weights(r, c));
      }
    os << "],\n     \"bias\": [";
    for (Eigen::Index r = 0; r < l.out(); ++r) {
      if (r) os << ", ";
      write_number(os, l.bias[r]);
    }
    os << "]}";
  }
  os << "\n  ]\n}\n";
  return os.str();
}

Net model_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("parse", std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    require(doc.value("format_version", 0) == kModelFormatVersion, "parse",
            "unsupported model format_version");
    const auto input_dim = doc.at("input_dim").get<Eigen::Index>();
    auto class_names = doc.at("class_names").get<std::vector<std::string>>();
    std::vector<DenseLayer<double>> layers;
    const auto& jl = doc.at("layers");
    require(jl.is_array(), "parse", "layers must be a list");
    for (std::size_t k = 0; k < jl.size(); ++k) {
      const auto& e = jl[k];
      const std::string where = "layer " + std::to_string(k);
      const auto rows = e.at("rows").get<Eigen::Index>();
      const auto cols = e.at("cols").get<Eigen::Index>();
      require(rows > 0 && cols > 0, "shape", where + ": rows and cols must be positive");
      const auto& w = e.at("weights");
      const auto& b = e.at("bias");
      require(w.is_array() && w.size() == std::size_t(rows * cols), "shape",
              where + ": weights list has " + std::to_string(w.size()) +
                  " entries, expected rows*cols = " + std::to_string(rows * cols));
      require(b.is_array() && b.size() == std::size_t(rows), "shape",
              where + ": bias list has " + std::to_string(b.size()) +
                  " entries, expected " + std::to_string(rows));
      DenseLayer<double> l;
      const std::string act = e.at("activation").get<std::string>();
      require(act == "relu" || act == "identity", "parse",
              where + ": unknown activation '" + act + "'");
      l.activation = act == "relu" ? Activation::relu : Activation::identity;
      l.weights.resize(rows, cols);
      l.bias.resize(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c)
          l.weights(r, c) = finite_number(w[std::size_t(r * cols + c)], where);
        l.bias[r] = finite_number(b[std::size_t(r)], where);
      }
      layers.push_back(std::move(l));
    }
    return Net(input_dim, std::move(layers), std::move(class_names));
  } catch (const json::exception& e) {
    throw Error("parse", std::string("malformed model file: ") + e.what());
  }
}

void save_model(const Net& net, const std::string& path) {
  std::ofstream os(path);
  require(bool(os), "io", "cannot open " + path + " for writing");
  os << model_to_string(net);
  require(bool(os), "io", "write failed for " + path);
}

Net load_model(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), "io", "cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return model_from_string(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace gadv
