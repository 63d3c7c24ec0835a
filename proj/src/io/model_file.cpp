#include <fstream>
#include <json.hpp>
#include <sstream>

#include "spkr/io.hpp"

namespace spkr {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

json covariance_to_json(const Covariance& c) {
  switch (c.type()) {
    case CovType::Spherical: return c.scalar();
    case CovType::Diagonal: return c.diag();
    case CovType::Full: {
      json rows = json::array();
      for (Eigen::Index i = 0; i < c.matrix().rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(c.matrix().cols()));
        for (Eigen::Index j = 0; j < c.matrix().cols(); ++j) row[static_cast<std::size_t>(j)] = c.matrix()(i, j);
        rows.push_back(row);
      }
      return rows;
    }
  }
  return nullptr;
}

CovType parse_cov_type(const std::string& s) {
  if (s == "spherical") return CovType::Spherical;
  if (s == "diagonal") return CovType::Diagonal;
  if (s == "full") return CovType::Full;
  fail(Errc::ParseError, "model file: unknown cov_type '" + s + "'");
}

Covariance covariance_from_json(const json& j, CovType type, std::size_t d) {
  switch (type) {
    case CovType::Spherical: return Covariance::spherical(d, j.get<double>());
    case CovType::Diagonal: return Covariance::diagonal(j.get<Vector>());
    case CovType::Full: {
      const auto rows = j.get<std::vector<Vector>>();
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) fail(Errc::DimensionMismatch, "model file: covariance row has wrong length");
        for (std::size_t k = 0; k < d; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
      return Covariance::full(std::move(m));
    }
  }
  fail(Errc::ParseError, "model file: bad covariance");
}

json preprocess_to_json(const PreprocessParams& p) {
  json steps = json::array();
  for (auto s : p.steps) steps.push_back(std::string(to_string(s)));
  return {{"steps", steps}, {"mean", p.mean}};
}

PreprocessParams preprocess_from_json(const json& j) {
  PreprocessParams p;
  p.mean = j.at("mean").get<Vector>();
  for (const auto& s : j.at("steps")) p.steps.push_back(parse_preprocess_step(s.get<std::string>()));
  return p;
}

}  // namespace

std::string model_to_json(const BackendModel& model) {
  json j;
  j["format"] = "spkr-model";
  j["version"] = kVersion;
  j["kind"] = std::string(kind_of(model));
  j["preprocess"] = preprocess_to_json(preprocess_of(model));
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CosineModel>) {
          j["dim"] = m.preprocess.mean.size();
          j["params"] = json::object();
        } else if constexpr (std::is_same_v<M, PldaModel>) {
          j["dim"] = m.dim();
          j["params"] = {{"cov_type", std::string(to_string(m.cov_type()))},
                         {"mu", m.mu()},
                         {"between", covariance_to_json(m.between())},
                         {"within", covariance_to_json(m.within())}};
        } else {
          j["dim"] = m.dim();
          j["params"] = {{"mu", m.mu()}, {"b", m.b()}, {"w", m.w()}};
        }
      },
      model);
  return j.dump(2) + "\n";
}

BackendModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::ParseError, std::string("model file: ") + e.what());
  }
  try {
    if (j.at("format") != "spkr-model") fail(Errc::ParseError, "model file: unrecognized format tag");
    if (j.at("version").get<int>() != kVersion) fail(Errc::ParseError, "model file: unsupported version");
    const auto kind = j.at("kind").get<std::string>();
    const auto d = j.at("dim").get<std::size_t>();
    PreprocessParams pre = preprocess_from_json(j.at("preprocess"));
    if (pre.mean.size() != d) fail(Errc::DimensionMismatch, "model file: preprocessing mean has wrong dimension");
    const json& p = j.at("params");
    if (kind == "cosine") return CosineModel{std::move(pre)};
    if (kind == "plda") {
      const CovType t = parse_cov_type(p.at("cov_type").get<std::string>());
      return PldaModel(p.at("mu").get<Vector>(), covariance_from_json(p.at("between"), t, d),
                       covariance_from_json(p.at("within"), t, d), std::move(pre));
    }
    if (kind == "psda") {
      return PsdaModel(p.at("mu").get<Vector>(), p.at("b").get<double>(), p.at("w").get<double>(), std::move(pre));
    }
    fail(Errc::ParseError, "model file: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(Errc::ParseError, std::string("model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const BackendModel& model) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot open '" + path.string() + "' for writing");
  out << model_to_json(model);
  if (!out) fail(Errc::IoError, "write to '" + path.string() + "' failed");
}

BackendModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace spkr
