#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spkr/core.hpp"

namespace spkr {

enum class CovType { Spherical, Diagonal, Full };

std::string_view to_string(CovType t) noexcept;

/// Covariance in one of three structural forms. Spherical stores one scalar,
/// Diagonal a vector, Full a dense symmetric matrix.
class Covariance {
 public:
  static Covariance spherical(std::size_t dim, double variance);
  static Covariance diagonal(Vector variances);
  static Covariance full(Eigen::MatrixXd matrix);

  CovType type() const noexcept { return type_; }
  std::size_t dim() const noexcept { return dim_; }
  double scalar() const;
  const Vector& diag() const;
  const Eigen::MatrixXd& matrix() const;
  Eigen::MatrixXd dense() const;

 private:
  CovType type_ = CovType::Spherical;
  std::size_t dim_ = 0;
  double scalar_ = 0.0;
  Vector diag_;
  Eigen::MatrixXd matrix_;
};

/// Two-covariance PLDA: y ~ N(mu, B), x | y ~ N(y, W).
/// `mu` lives in the preprocessed space. Immutable after construction; the
/// constructor validates positive definiteness and caches the inverses and
/// log-determinants used by scoring.
class PldaModel {
 public:
  PldaModel(Vector mu, Covariance between, Covariance within, PreprocessParams preprocess);

  std::size_t dim() const noexcept { return mu_.size(); }
  CovType cov_type() const noexcept { return between_.type(); }
  const Vector& mu() const noexcept { return mu_; }
  const Covariance& between() const noexcept { return between_; }
  const Covariance& within() const noexcept { return within_; }
  const PreprocessParams& preprocess() const noexcept { return preprocess_; }

  // Cached for the Full form only.
  const Eigen::MatrixXd& between_inv() const noexcept { return between_inv_; }
  const Eigen::MatrixXd& within_inv() const noexcept { return within_inv_; }
  double log_det_between() const noexcept { return log_det_between_; }
  double log_det_within() const noexcept { return log_det_within_; }

 private:
  Vector mu_;
  Covariance between_;
  Covariance within_;
  PreprocessParams preprocess_;
  Eigen::MatrixXd between_inv_;
  Eigen::MatrixXd within_inv_;
  double log_det_between_ = 0.0;
  double log_det_within_ = 0.0;
};

/// PSDA: y ~ VMF(mu, b), x | y ~ VMF(y, w), all on the unit sphere.
class PsdaModel {
 public:
  PsdaModel(Vector mu, double b, double w, PreprocessParams preprocess);

  std::size_t dim() const noexcept { return mu_.size(); }
  const Vector& mu() const noexcept { return mu_; }
  double b() const noexcept { return b_; }
  double w() const noexcept { return w_; }
  const PreprocessParams& preprocess() const noexcept { return preprocess_; }
  // log C_d(w), cached.
  double log_norm_w() const noexcept { return log_norm_w_; }
  double log_norm_b() const noexcept { return log_norm_b_; }

 private:
  Vector mu_;
  double b_;
  double w_;
  PreprocessParams preprocess_;
  double log_norm_w_;
  double log_norm_b_;
};

/// Cosine back-ends need nothing beyond preprocessing.
struct CosineModel {
  PreprocessParams preprocess;
};

using BackendModel = std::variant<CosineModel, PldaModel, PsdaModel>;

const PreprocessParams& preprocess_of(const BackendModel& model);
std::string_view kind_of(const BackendModel& model);

enum class CosineMode { Csea, Cssa };
enum class ScoreMode { ByTheBook, Csea, Cssa };

ScoreMode parse_score_mode(std::string_view name);
std::string_view to_string(ScoreMode mode) noexcept;

// --- cosine ----------------------------------------------------------------

double cosine_score(const Embedding& a, const Embedding& b);
double cosine_multi(std::span<const Embedding> enroll, std::span<const Embedding> test, CosineMode mode);

// --- PLDA ------------------------------------------------------------------

/// log \int prod_j N(x_j | y, W) N(y | mu, B) dy in closed form; 0 for an empty set.
double plda_log_marginal(std::span<const Embedding> xs, const PldaModel& m);
/// By-the-book LLR: marginal(enroll + test) - marginal(enroll) - marginal(test).
double plda_llr(std::span<const Embedding> enroll, std::span<const Embedding> test, const PldaModel& m);

// --- PSDA ------------------------------------------------------------------

double psda_log_marginal(std::span<const Embedding> xs, const PsdaModel& m);
double psda_llr(std::span<const Embedding> enroll, std::span<const Embedding> test, const PsdaModel& m);

/// Scores one trial whose embeddings are already preprocessed for `model`.
/// Throws ModeMismatch for by-the-book scoring with a cosine model.
double score_trial(const BackendModel& model, ScoreMode mode, std::span<const Embedding> enroll,
                   std::span<const Embedding> test);

// --- training --------------------------------------------------------------

struct PldaTrainOptions {
  int iterations = 20;
  double variance_floor = 1e-8;
};

struct PldaTrainResult {
  PldaModel model;
  // Data log-likelihood at the initial estimate and after every EM iteration.
  std::vector<double> loglik;
};

/// Estimates a PLDA model by EM. `xs` are raw embeddings; `steps` is the
/// preprocessing pipeline to fit and apply. With a Center step the centering
/// mean is the training mean and the model's prior mean is fixed at zero;
/// otherwise the prior mean is the global mean of the preprocessed data.
PldaTrainResult train_plda(std::span<const Embedding> xs, std::span<const std::string> labels, CovType cov_type,
                           std::vector<PreprocessStep> steps, const PldaTrainOptions& options = {});

struct PsdaTrainOptions {
  int iterations = 20;
  // Concentrations are clamped here when the mean resultant length reaches 1.
  double max_concentration = 1e7;
};

struct PsdaTrainResult {
  PsdaModel model;
  std::vector<double> loglik;
  std::vector<std::string> warnings;
  bool concentration_clamped = false;
};

/// Estimates a PSDA model by EM. `xs` are raw embeddings; `steps` must end with
/// LengthNorm (default: LengthNorm only).
PsdaTrainResult train_psda(std::span<const Embedding> xs, std::span<const std::string> labels,
                           std::vector<PreprocessStep> steps = {PreprocessStep::LengthNorm},
                           const PsdaTrainOptions& options = {});

}  // namespace spkr
