#pragma once

// JSON gain documents: bounds, explicit vertex ordering, row-major matrices
// and the synthesis settings that produced them.

#include <cstddef>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lpv_models.hpp"
#include "synthesis.hpp"

namespace lpvguide {

class GainDocumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GainDocument {
  std::string kind;  // "dynamic" or "kinematic"
  VertexGainSet set;
  SynthesisConfig config;
  double objective = 0.0;
  std::string status;
  std::vector<double> vertex_max_real;  // validation report, may be empty
};

inline constexpr const char* kVertexOrder =
    "binary counting over the variables in listed order, last variable fastest; bit 1 selects the upper bound";

namespace detail {

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Eigen::VectorXd json_vector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace detail

inline nlohmann::json to_json(const GainDocument& doc) {
  using nlohmann::json;
  doc.set.validate();
  json vars = json::array();
  for (const auto& var : doc.set.bounds.variables) {
    vars.push_back({{"name", var.name}, {"lower", var.lower}, {"upper", var.upper}});
  }
  const auto vertices = enumerate_vertices(doc.set.bounds);
  json entries = json::array();
  for (std::size_t i = 0; i < doc.set.gains.size(); ++i) {
    const Eigen::MatrixXd& K = doc.set.gains[i];
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < K.rows(); ++r) {
      for (Eigen::Index c = 0; c < K.cols(); ++c) flat.push_back(K(r, c));
    }
    json entry = {{"index", i}, {"point", detail::vector_json(vertices[i])}, {"gain", flat}};
    if (i < doc.vertex_max_real.size()) entry["max_real_eig"] = doc.vertex_max_real[i];
    entries.push_back(entry);
  }
  const auto& K0 = doc.set.gains.front();
  return {
      {"kind", doc.kind},
      {"bounds", vars},
      {"vertex_order", kVertexOrder},
      {"rows", K0.rows()},
      {"cols", K0.cols()},
      {"vertices", entries},
      {"config",
       {{"q", detail::vector_json(doc.config.q)},
        {"r", detail::vector_json(doc.config.r)},
        {"gamma_bound", doc.config.gamma_bound},
        {"decay", doc.config.decay},
        {"tol", doc.config.tol},
        {"max_iter", doc.config.max_iter},
        {"gap", doc.config.gap},
        {"trace_cap", doc.config.trace_cap}}},
      {"objective", doc.objective},
      {"status", doc.status},
  };
}

inline GainDocument gain_document_from_json(const nlohmann::json& j) {
  try {
    GainDocument doc;
    doc.kind = j.at("kind").get<std::string>();
    for (const auto& var : j.at("bounds")) {
      doc.set.bounds.variables.push_back(
          {var.at("name").get<std::string>(), var.at("lower").get<double>(), var.at("upper").get<double>()});
    }
    doc.set.bounds.validate();
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    if (rows <= 0 || cols <= 0) throw GainDocumentError("gain document: non-positive matrix shape");
    const auto& entries = j.at("vertices");
    if (entries.size() != doc.set.bounds.vertex_count()) {
      throw GainDocumentError("gain document: " + std::to_string(entries.size()) + " vertices for " +
                              std::to_string(doc.set.bounds.size()) + " scheduling variables");
    }
    const auto vertices = enumerate_vertices(doc.set.bounds);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& entry = entries[i];
      if (entry.at("index").get<std::size_t>() != i) throw GainDocumentError("gain document: vertices out of order");
      if (entry.contains("point")) {
        const Eigen::VectorXd p = detail::json_vector(entry.at("point"));
        if (p.size() != vertices[i].size() || (p - vertices[i]).cwiseAbs().maxCoeff() > 1e-12) {
          throw GainDocumentError("gain document: vertex " + std::to_string(i) + " does not match the bounds");
        }
      }
      const auto flat = entry.at("gain").get<std::vector<double>>();
      if (flat.size() != static_cast<std::size_t>(rows * cols)) {
        throw GainDocumentError("gain document: gain " + std::to_string(i) + " has the wrong size");
      }
      Eigen::MatrixXd K(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) K(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
      }
      doc.set.gains.push_back(K);
      if (entry.contains("max_real_eig")) doc.vertex_max_real.push_back(entry.at("max_real_eig").get<double>());
    }
    doc.set.validate();
    const auto& cfg = j.at("config");
    doc.config.q = detail::json_vector(cfg.at("q"));
    doc.config.r = detail::json_vector(cfg.at("r"));
    doc.config.gamma_bound = cfg.at("gamma_bound").get<double>();
    doc.config.decay = cfg.at("decay").get<double>();
    doc.config.tol = cfg.at("tol").get<double>();
    doc.config.max_iter = cfg.at("max_iter").get<int>();
    doc.config.gap = cfg.at("gap").get<double>();
    doc.config.trace_cap = cfg.at("trace_cap").get<double>();
    doc.objective = j.value("objective", 0.0);
    doc.status = j.value("status", std::string{});
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw GainDocumentError(std::string("gain document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw GainDocumentError(std::string("gain document: ") + e.what());
  }
}

inline GainDocument make_gain_document(const std::string& kind, const SynthesisResult& result) {
  GainDocument doc;
  doc.kind = kind;
  doc.set = result.gains;
  doc.config = result.problem.config;
  doc.objective = result.solution.objective;
  doc.status = to_string(result.solution.status);
  for (const auto& v : result.report.vertices) doc.vertex_max_real.push_back(v.max_real);
  return doc;
}

inline void save_gain_document(const GainDocument& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(doc).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Loads a document and checks it against the bounds and gain shape the
/// caller is configured for.
inline GainDocument load_gain_document(const std::string& path, const SchedulingBounds& expected,
                                       Eigen::Index rows, Eigen::Index cols) {
  std::ifstream in(path);
  if (!in) throw GainDocumentError("cannot read gain document " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw GainDocumentError(path + ": " + e.what());
  }
  GainDocument doc = gain_document_from_json(j);
  if (!(doc.set.bounds == expected)) throw GainDocumentError(path + ": scheduling bounds differ from the configuration");
  if (doc.set.gains.front().rows() != rows || doc.set.gains.front().cols() != cols) {
    throw GainDocumentError(path + ": gains are " + std::to_string(doc.set.gains.front().rows()) + "x" +
                            std::to_string(doc.set.gains.front().cols()) + ", expected " + std::to_string(rows) +
                            "x" + std::to_string(cols));
  }
  return doc;
}

}  // namespace lpvguide
