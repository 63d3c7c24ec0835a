#include <cmath>
#include <string>

#include "spkr/backends.hpp"
#include "spkr/specfun.hpp"

namespace spkr {

std::string_view to_string(CovType t) noexcept {
  switch (t) {
    case CovType::Spherical: return "spherical";
    case CovType::Diagonal: return "diagonal";
    case CovType::Full: return "full";
  }
  return "unknown";
}

Covariance Covariance::spherical(std::size_t dim, double variance) {
  Covariance c;
  c.type_ = CovType::Spherical;
  c.dim_ = dim;
  c.scalar_ = variance;
  return c;
}

Covariance Covariance::diagonal(Vector variances) {
  Covariance c;
  c.type_ = CovType::Diagonal;
  c.dim_ = variances.size();
  c.diag_ = std::move(variances);
  return c;
}

Covariance Covariance::full(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols()) fail(Errc::DimensionMismatch, "Covariance::full: matrix is not square");
  Covariance c;
  c.type_ = CovType::Full;
  c.dim_ = static_cast<std::size_t>(matrix.rows());
  c.matrix_ = std::move(matrix);
  return c;
}

double Covariance::scalar() const {
  if (type_ != CovType::Spherical) fail(Errc::InvalidArgument, "Covariance::scalar on non-spherical covariance");
  return scalar_;
}

const Vector& Covariance::diag() const {
  if (type_ != CovType::Diagonal) fail(Errc::InvalidArgument, "Covariance::diag on non-diagonal covariance");
  return diag_;
}

const Eigen::MatrixXd& Covariance::matrix() const {
  if (type_ != CovType::Full) fail(Errc::InvalidArgument, "Covariance::matrix on non-full covariance");
  return matrix_;
}

Eigen::MatrixXd Covariance::dense() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  switch (type_) {
    case CovType::Spherical:
      return Eigen::MatrixXd::Identity(d, d) * scalar_;
    case CovType::Diagonal:
      return Eigen::Map<const Eigen::VectorXd>(diag_.data(), d).asDiagonal();
    case CovType::Full:
      return matrix_;
  }
  return {};
}

namespace {

void validate_covariance(const Covariance& c, std::size_t dim, const char* name) {
  if (c.dim() != dim) {
    fail(Errc::DimensionMismatch, std::string("PldaModel: ") + name + " covariance has dimension " +
                                      std::to_string(c.dim()) + ", expected " + std::to_string(dim));
  }
  switch (c.type()) {
    case CovType::Spherical:
      if (!(c.scalar() > 0.0) || !std::isfinite(c.scalar())) {
        fail(Errc::SingularCovariance, std::string("PldaModel: ") + name + " variance must be positive and finite");
      }
      break;
    case CovType::Diagonal:
      for (double v : c.diag()) {
        if (!(v > 0.0) || !std::isfinite(v)) {
          fail(Errc::SingularCovariance, std::string("PldaModel: ") + name + " variances must be positive and finite");
        }
      }
      break;
    case CovType::Full:
      break;
  }
}

// Inverse and log-determinant through a Cholesky factorization.
void invert_spd(const Eigen::MatrixXd& m, Eigen::MatrixXd& inv, double& log_det, const char* name) {
  if (!m.allFinite()) fail(Errc::SingularCovariance, std::string("PldaModel: ") + name + " covariance is not finite");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff())) {
    fail(Errc::SingularCovariance, std::string("PldaModel: ") + name + " covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    fail(Errc::SingularCovariance, std::string("PldaModel: ") + name + " covariance is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  log_det = 2.0 * l.diagonal().array().log().sum();
  inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  inv = 0.5 * (inv + inv.transpose());
}

}  // namespace

PldaModel::PldaModel(Vector mu, Covariance between, Covariance within, PreprocessParams preprocess)
    : mu_(std::move(mu)), between_(std::move(between)), within_(std::move(within)), preprocess_(std::move(preprocess)) {
  const std::size_t d = mu_.size();
  if (d == 0) fail(Errc::InvalidArgument, "PldaModel: dimension must be >= 1");
  check_finite(mu_, "PldaModel mean");
  if (between_.type() != within_.type()) {
    fail(Errc::InvalidArgument, "PldaModel: between and within covariances must share a structural form");
  }
  validate_covariance(between_, d, "between");
  validate_covariance(within_, d, "within");
  if (preprocess_.mean.size() != d) {
    fail(Errc::DimensionMismatch, "PldaModel: preprocessing mean dimension does not match model");
  }
  if (between_.type() == CovType::Full) {
    invert_spd(between_.matrix(), between_inv_, log_det_between_, "between");
    invert_spd(within_.matrix(), within_inv_, log_det_within_, "within");
  }
}

PsdaModel::PsdaModel(Vector mu, double b, double w, PreprocessParams preprocess)
    : mu_(std::move(mu)), b_(b), w_(w), preprocess_(std::move(preprocess)) {
  const std::size_t d = mu_.size();
  if (d < 2) fail(Errc::InvalidArgument, "PsdaModel: dimension must be >= 2");
  check_finite(mu_, "PsdaModel mean direction");
  const double norm = l2_norm(mu_);
  if (std::abs(norm - 1.0) > 1e-6) fail(Errc::InvalidArgument, "PsdaModel: mean direction must be unit-norm");
  if (!(b_ > 0.0) || !(w_ > 0.0) || !std::isfinite(b_) || !std::isfinite(w_)) {
    fail(Errc::InvalidArgument, "PsdaModel: concentrations must be positive and finite");
  }
  if (preprocess_.mean.size() != d) {
    fail(Errc::DimensionMismatch, "PsdaModel: preprocessing mean dimension does not match model");
  }
  if (preprocess_.steps.empty() || preprocess_.steps.back() != PreprocessStep::LengthNorm) {
    fail(Errc::InvalidArgument, "PsdaModel: preprocessing must end with length normalization");
  }
  log_norm_w_ = specfun::vmf_log_norm(static_cast<int>(d), w_);
  log_norm_b_ = specfun::vmf_log_norm(static_cast<int>(d), b_);
}

const PreprocessParams& preprocess_of(const BackendModel& model) {
  return std::visit([](const auto& m) -> const PreprocessParams& {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, CosineModel>) {
      return m.preprocess;
    } else {
      return m.preprocess();
    }
  }, model);
}

std::string_view kind_of(const BackendModel& model) {
  switch (model.index()) {
    case 0: return "cosine";
    case 1: return "plda";
    default: return "psda";
  }
}

ScoreMode parse_score_mode(std::string_view name) {
  if (name == "bythebook") return ScoreMode::ByTheBook;
  if (name == "csea") return ScoreMode::Csea;
  if (name == "cssa") return ScoreMode::Cssa;
  fail(Errc::InvalidArgument, "unknown scoring mode '" + std::string(name) + "'");
}

std::string_view to_string(ScoreMode mode) noexcept {
  switch (mode) {
    case ScoreMode::ByTheBook: return "bythebook";
    case ScoreMode::Csea: return "csea";
    case ScoreMode::Cssa: return "cssa";
  }
  return "unknown";
}

double score_trial(const BackendModel& model, ScoreMode mode, std::span<const Embedding> enroll,
                   std::span<const Embedding> test) {
  switch (mode) {
    case ScoreMode::Csea:
      return cosine_multi(enroll, test, CosineMode::Csea);
    case ScoreMode::Cssa:
      return cosine_multi(enroll, test, CosineMode::Cssa);
    case ScoreMode::ByTheBook:
      break;
  }
  if (const auto* plda = std::get_if<PldaModel>(&model)) return plda_llr(enroll, test, *plda);
  if (const auto* psda = std::get_if<PsdaModel>(&model)) return psda_llr(enroll, test, *psda);
  fail(Errc::ModeMismatch, "by-the-book scoring requires a PLDA or PSDA model, got a cosine model");
}

}  // namespace spkr
