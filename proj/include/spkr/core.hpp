#pragma once

#include <span>
#include <string>
#include <vector>

#include "spkr/error.hpp"

namespace spkr {

using Vector = std::vector<double>;

struct Embedding {
  std::string id;
  Vector vec;

  std::size_t dim() const noexcept { return vec.size(); }
};

/// Verification trial: enrollment ids, test ids and the ground-truth label.
struct Trial {
  std::vector<std::string> enroll;
  std::vector<std::string> test;
  bool target = false;
};

enum class PreprocessStep { Center, LengthNorm };

std::string_view to_string(PreprocessStep step) noexcept;
PreprocessStep parse_preprocess_step(std::string_view name);

/// Preprocessing applied to raw embeddings before a back-end sees them.
/// `mean` is the training mean used by the Center step; it is ignored (but
/// must still match the dimension) when Center is absent.
struct PreprocessParams {
  Vector mean;
  std::vector<PreprocessStep> steps;

  bool has(PreprocessStep step) const noexcept;
};

/// Default pipelines: Center then LengthNorm for PLDA and cosine back-ends,
/// LengthNorm alone for PSDA.
PreprocessParams default_plda_preprocess(Vector mean);
PreprocessParams default_psda_preprocess(std::size_t dim);

/// Throws DimensionMismatch / ZeroVector / NonFinite.
Embedding preprocess(const Embedding& x, const PreprocessParams& p);
std::vector<Embedding> preprocess_all(std::span<const Embedding> xs, const PreprocessParams& p);

/// Componentwise arithmetic mean. Throws EmptySet or DimensionMismatch.
Vector mean_embedding(std::span<const Embedding> xs);

// Helpers shared by the back-ends.
void check_same_dim(std::span<const Embedding> xs, std::size_t dim, std::string_view what);
void check_finite(std::span<const double> v, std::string_view what);
double l2_norm(std::span<const double> v);

}  // namespace spkr
