#include <cmath>
#include <string>

#include "spkr/core.hpp"
#include "spkr/kernels.hpp"

namespace spkr {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptySet: return "EmptySet";
    case Errc::DomainError: return "DomainError";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::DegenerateScatter: return "DegenerateScatter";
    case Errc::ConcentrationOverflow: return "ConcentrationOverflow";
    case Errc::EmptyScores: return "EmptyScores";
    case Errc::RecordingMismatch: return "RecordingMismatch";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidRegion: return "InvalidRegion";
    case Errc::MissingId: return "MissingId";
    case Errc::ModeMismatch: return "ModeMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(Errc code) noexcept {
  switch (code) {
    case Errc::DomainError:
    case Errc::SingularCovariance:
    case Errc::DegenerateScatter:
    case Errc::ConcentrationOverflow:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(PreprocessStep step) noexcept {
  return step == PreprocessStep::Center ? "center" : "length_norm";
}

PreprocessStep parse_preprocess_step(std::string_view name) {
  if (name == "center") return PreprocessStep::Center;
  if (name == "length_norm") return PreprocessStep::LengthNorm;
  fail(Errc::ParseError, "unknown preprocessing step '" + std::string(name) + "'");
}

bool PreprocessParams::has(PreprocessStep step) const noexcept {
  for (PreprocessStep s : steps) {
    if (s == step) return true;
  }
  return false;
}

PreprocessParams default_plda_preprocess(Vector mean) {
  return PreprocessParams{std::move(mean), {PreprocessStep::Center, PreprocessStep::LengthNorm}};
}

PreprocessParams default_psda_preprocess(std::size_t dim) {
  return PreprocessParams{Vector(dim, 0.0), {PreprocessStep::LengthNorm}};
}

double l2_norm(std::span<const double> v) { return std::sqrt(kernels::squared_norm(v)); }

void check_finite(std::span<const double> v, std::string_view what) {
  for (double x : v) {
    if (!std::isfinite(x)) fail(Errc::NonFinite, std::string(what) + ": non-finite value");
  }
}

void check_same_dim(std::span<const Embedding> xs, std::size_t dim, std::string_view what) {
  for (const Embedding& x : xs) {
    if (x.dim() != dim) {
      fail(Errc::DimensionMismatch, std::string(what) + ": embedding '" + x.id + "' has dimension " +
                                        std::to_string(x.dim()) + ", expected " + std::to_string(dim));
    }
  }
}

Embedding preprocess(const Embedding& x, const PreprocessParams& p) {
  if (x.dim() != p.mean.size()) {
    fail(Errc::DimensionMismatch, "preprocess: embedding '" + x.id + "' has dimension " +
                                      std::to_string(x.dim()) + ", preprocessing expects " +
                                      std::to_string(p.mean.size()));
  }
  check_finite(x.vec, "preprocess: embedding '" + x.id + "'");
  Embedding out = x;
  for (PreprocessStep step : p.steps) {
    if (step == PreprocessStep::Center) {
      kernels::axpy(-1.0, p.mean, out.vec);
    } else {
      const double norm = l2_norm(out.vec);
      if (norm == 0.0) fail(Errc::ZeroVector, "preprocess: cannot length-normalize zero vector '" + x.id + "'");
      kernels::scale(1.0 / norm, out.vec);
    }
  }
  return out;
}

std::vector<Embedding> preprocess_all(std::span<const Embedding> xs, const PreprocessParams& p) {
  std::vector<Embedding> out;
  out.reserve(xs.size());
  for (const Embedding& x : xs) out.push_back(preprocess(x, p));
  return out;
}

Vector mean_embedding(std::span<const Embedding> xs) {
  if (xs.empty()) fail(Errc::EmptySet, "mean_embedding: empty set");
  const std::size_t d = xs.front().dim();
  check_same_dim(xs, d, "mean_embedding");
  Vector mean(d, 0.0);
  for (const Embedding& x : xs) kernels::axpy(1.0, x.vec, mean);
  kernels::scale(1.0 / static_cast<double>(xs.size()), mean);
  return mean;
}

}  // namespace spkr
