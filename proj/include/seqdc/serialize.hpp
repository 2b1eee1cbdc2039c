#pragma once

#include <json.hpp>

#include "seqdc/classical.hpp"
#include "seqdc/emcm.hpp"
#include "seqdc/quantum.hpp"

namespace seqdc {

using Json = nlohmann::json;

inline Json matrix_to_json(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("matrix_from_json: expected non-empty array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      M(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return M;
}

// Complex entries serialise as [re, im] pairs.
inline Json cmatrix_to_json(const CMatrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      row.push_back(Json::array({M(i, j).real(), M(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix cmatrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("cmatrix_from_json: expected non-empty array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  CMatrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("cmatrix_from_json: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& pair = row.at(static_cast<std::size_t>(c));
      if (!pair.is_array() || pair.size() != 2)
        throw std::invalid_argument("cmatrix_from_json: entries must be [re, im]");
      M(i, c) = std::complex<double>(pair.at(0).get<double>(),
                                     pair.at(1).get<double>());
    }
  }
  return M;
}

inline Json to_json(const ClassicalModel& m) {
  return Json{{"d", m.d},
              {"T0", matrix_to_json(m.T0)},
              {"T1", matrix_to_json(m.T1)},
              {"pi", std::vector<double>(m.pi.data(), m.pi.data() + m.pi.size())}};
}

inline ClassicalModel classical_from_json(const Json& j) {
  ClassicalModel m;
  m.d = j.at("d").get<int>();
  m.T0 = matrix_from_json(j.at("T0"));
  m.T1 = matrix_from_json(j.at("T1"));
  const auto pi = j.at("pi").get<std::vector<double>>();
  m.pi = Eigen::Map<const Eigen::VectorXd>(pi.data(),
                                           static_cast<Eigen::Index>(pi.size()));
  m.validate(1e-9);
  return m;
}

inline Json to_json(const QuantumModel& m) {
  Json kraus = Json::array();
  for (const auto& family : m.kraus) {
    Json ops = Json::array();
    for (const auto& K : family) ops.push_back(cmatrix_to_json(K));
    kraus.push_back(std::move(ops));
  }
  return Json{{"d", m.d}, {"kraus", std::move(kraus)}, {"rho", cmatrix_to_json(m.rho)}};
}

inline QuantumModel quantum_from_json(const Json& j) {
  QuantumModel m;
  m.d = j.at("d").get<int>();
  const auto& kraus = j.at("kraus");
  if (!kraus.is_array() || kraus.size() != 2)
    throw std::invalid_argument("quantum_from_json: expected two outcome families");
  for (std::size_t a = 0; a < 2; ++a)
    for (const auto& op : kraus.at(a))
      m.kraus[a].push_back(cmatrix_from_json(op));
  m.rho = cmatrix_from_json(j.at("rho"));
  return m;
}

inline Json to_json(const EmcmParams& p) {
  return Json{{"L", p.L}, {"n", p.n}, {"k", p.k},
              {"t", p.t}, {"z", p.z}, {"q", p.q}};
}

inline EmcmParams emcm_params_from_json(const Json& j) {
  EmcmParams p{j.at("L").get<int>(), j.at("n").get<int>(), j.at("k").get<int>(),
               j.at("t").get<int>(), j.at("z").get<int>(), j.at("q").get<double>()};
  p.validate();
  return p;
}

}  // namespace seqdc
