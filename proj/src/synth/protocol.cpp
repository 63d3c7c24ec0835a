#include <algorithm>
#include <map>

#include "spkr/synth.hpp"

namespace spkr {

namespace {

// Partial Fisher-Yates: the first k entries of a random permutation of ids.
std::vector<std::string> draw(const std::vector<std::string>& ids, std::size_t k, SplitMix64& rng) {
  std::vector<std::string> pool = ids;
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(k);
  return pool;
}

}  // namespace

std::vector<Trial> make_protocol(std::span<const Embedding> embeddings, std::span<const std::string> labels,
                                 const ProtocolConfig& config) {
  if (embeddings.size() != labels.size()) fail(Errc::DimensionMismatch, "make_protocol: labels do not match embeddings");
  if (config.n_enroll < 1 || config.n_test < 1) fail(Errc::InvalidArgument, "make_protocol: set sizes must be >= 1");

  // Speakers in first-appearance order so the protocol is independent of map ordering.
  std::vector<std::string> speakers;
  std::map<std::string, std::vector<std::string>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& m = members[labels[i]];
    if (m.empty()) speakers.push_back(labels[i]);
    m.push_back(embeddings[i].id);
  }
  std::vector<std::size_t> target_ok, enroll_ok, test_ok;
  for (std::size_t s = 0; s < speakers.size(); ++s) {
    const std::size_t c = members[speakers[s]].size();
    if (c >= config.n_enroll + config.n_test) target_ok.push_back(s);
    if (c >= config.n_enroll) enroll_ok.push_back(s);
    if (c >= config.n_test) test_ok.push_back(s);
  }
  const std::size_t n_target = (config.n_trials + 1) / 2;
  const std::size_t n_impostor = config.n_trials / 2;
  if (n_target > 0 && target_ok.empty()) {
    fail(Errc::InsufficientData, "make_protocol: no speaker has " + std::to_string(config.n_enroll + config.n_test) +
                                     " embeddings for a target trial");
  }
  if (n_impostor > 0) {
    const bool possible = !enroll_ok.empty() && !test_ok.empty() &&
                          !(enroll_ok.size() == 1 && test_ok.size() == 1 && enroll_ok[0] == test_ok[0]);
    if (!possible) fail(Errc::InsufficientData, "make_protocol: impostor trials need two eligible speakers");
  }

  SplitMix64 rng(config.seed);
  std::vector<Trial> trials;
  trials.reserve(config.n_trials);
  for (std::size_t i = 0; i < n_target; ++i) {
    const auto& ids = members[speakers[target_ok[rng.below(target_ok.size())]]];
    auto picked = draw(ids, config.n_enroll + config.n_test, rng);
    Trial t;
    t.enroll.assign(picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(config.n_enroll));
    t.test.assign(picked.begin() + static_cast<std::ptrdiff_t>(config.n_enroll), picked.end());
    t.target = true;
    trials.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < n_impostor; ++i) {
    std::size_t a = 0, b = 0;
    do {
      a = enroll_ok[rng.below(enroll_ok.size())];
      b = test_ok[rng.below(test_ok.size())];
    } while (a == b);
    Trial t;
    t.enroll = draw(members[speakers[a]], config.n_enroll, rng);
    t.test = draw(members[speakers[b]], config.n_test, rng);
    trials.push_back(std::move(t));
  }
  for (std::size_t i = trials.size(); i > 1; --i) std::swap(trials[i - 1], trials[rng.below(i)]);
  return trials;
}

std::vector<Trial> pool_protocols(std::span<const std::vector<Trial>> protocols) {
  std::vector<Trial> out;
  for (const auto& p : protocols) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace spkr
