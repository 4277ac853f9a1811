#include "tgsl/app/snapshot.hpp"

#include <nlohmann/json.hpp>

#include "tgsl/error.hpp"

namespace tgsl::app {

using nlohmann::ordered_json;

std::string snapshot_json(const training::Model& model) {
  ordered_json doc = ordered_json::object();
  for (const auto& p : model.parameters()) {
    const auto& v = p.value();
    doc[p.name()] = {{"rows", v.rows()},
                     {"cols", v.cols()},
                     {"values", std::vector<double>(v.data(), v.data() + v.size())}};
  }
  return doc.dump(1) + "\n";
}

void restore_snapshot(training::Model& model, const std::string& json) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json);
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("snapshot: ") + e.what());
  }
  for (auto& p : model.parameters()) {
    if (!doc.contains(p.name())) {
      throw DataError("snapshot: missing parameter " + p.name());
    }
    const auto& entry = doc[p.name()];
    const auto rows = entry.at("rows").get<ad::Index>();
    const auto cols = entry.at("cols").get<ad::Index>();
    const auto values = entry.at("values").get<std::vector<double>>();
    if (rows != p.rows() || cols != p.cols() ||
        static_cast<ad::Index>(values.size()) != rows * cols) {
      throw DataError("snapshot: parameter " + p.name() + " has shape " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      ", model expects " + p.shape_string());
    }
    std::copy(values.begin(), values.end(), p.mutable_value().data());
  }
}

}  // namespace tgsl::app
