#include "biaslab/model_json.hpp"

#include <string>

namespace biaslab {

using nlohmann::json;

json to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw DimensionError("matrix json: data length " + std::to_string(data.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  return m;
}

json to_json(const ContinuousModel& cm) {
  return {{"F", to_json(cm.F)}, {"G", to_json(cm.G)}, {"Q", to_json(cm.Q)},
          {"H", to_json(cm.H)}, {"R", to_json(cm.R)}};
}

ContinuousModel continuous_model_from_json(const json& j) {
  ContinuousModel cm{matrix_from_json(j.at("F")), matrix_from_json(j.at("G")),
                     matrix_from_json(j.at("Q")), matrix_from_json(j.at("H")),
                     matrix_from_json(j.at("R"))};
  cm.validate();
  return cm;
}

json to_json(const DiscreteModel& dm) {
  return {{"A", to_json(dm.A)}, {"B", to_json(dm.B)}, {"C", to_json(dm.C)},
          {"H", to_json(dm.H)}, {"R", to_json(dm.R)}, {"step", dm.step}};
}

DiscreteModel discrete_model_from_json(const json& j) {
  DiscreteModel dm{matrix_from_json(j.at("A")), matrix_from_json(j.at("B")),
                   matrix_from_json(j.at("C")), matrix_from_json(j.at("H")),
                   matrix_from_json(j.at("R")), j.at("step").get<double>()};
  dm.validate();
  return dm;
}

json to_json(const CoarsenedModel& cm) {
  return {{"factor", cm.factor}, {"window", cm.window}, {"base", to_json(cm.base)},
          {"Ac", to_json(cm.Ac)},  {"Bc", to_json(cm.Bc)},    {"Cc", to_json(cm.Cc)}};
}

CoarsenedModel coarsened_model_from_json(const json& j) {
  CoarsenedModel cm;
  cm.factor = j.at("factor").get<int>();
  cm.window = j.at("window").get<double>();
  cm.base = discrete_model_from_json(j.at("base"));
  cm.Ac = matrix_from_json(j.at("Ac"));
  cm.Bc = matrix_from_json(j.at("Bc"));
  cm.Cc = matrix_from_json(j.at("Cc"));
  const auto md = cm.factor * cm.base.state_dim();
  if (cm.factor < 1) throw DomainError("coarsened model json: factor must be >= 1");
  if (cm.Ac.rows() != md || cm.Ac.cols() != md || cm.Cc.rows() != md || cm.Cc.cols() != md ||
      cm.Bc.rows() != md || cm.Bc.cols() != cm.factor * cm.base.input_dim()) {
    throw DimensionError("coarsened model json: stacked matrices inconsistent with factor");
  }
  return cm;
}

}  // namespace biaslab
