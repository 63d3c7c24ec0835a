// spkr: train back-ends, score trials, cluster embedding streams and evaluate.
//
// Exit codes: 0 success, 2 data error, 3 numerical error, 64 usage error.

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "spkr/backends.hpp"
#include "spkr/clustering.hpp"
#include "spkr/io.hpp"
#include "spkr/log.hpp"
#include "spkr/metrics.hpp"
#include "spkr/synth.hpp"

namespace {

using nlohmann::json;
using namespace spkr;

constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::optional<std::uint64_t> seed;
  std::string log_level = "warn";
  std::string output;
};

json global_config(const Global& g) {
  return {{"seed", g.seed ? json(*g.seed) : json(nullptr)}, {"log_level", g.log_level}, {"output", g.output}};
}

// NaN and infinities have no JSON literal; they are reported as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit_report(const Global& g, const std::string& command, json config, json result) {
  config["global"] = global_config(g);
  const json report = {{"command", command}, {"config", std::move(config)}, {"result", std::move(result)}};
  const std::string text = report.dump(2) + "\n";
  if (g.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.output);
  if (!out) fail(Errc::IoError, "cannot open report file '" + g.output + "'");
  out << text;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot open '" + path + "' for writing");
  return out;
}

// Archive embeddings indexed by id; duplicate ids are a data error.
struct Archive {
  std::vector<Embedding> xs;
  std::map<std::string, std::size_t> index;

  explicit Archive(const std::string& path) : xs(read_archive(std::filesystem::path(path))) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!index.emplace(xs[i].id, i).second) fail(Errc::InvalidArgument, "duplicate id '" + xs[i].id + "' in archive");
    }
  }

  std::size_t at(const std::string& id) const {
    const auto it = index.find(id);
    if (it == index.end()) fail(Errc::MissingId, "id '" + id + "' not found in the embedding archive");
    return it->second;
  }
};

unsigned worker_count(unsigned requested) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return std::clamp(requested == 0 ? hw : requested, 1u, hw);
}

// Runs fn(i) for i in [0, n) on a bounded pool. Results must be written by
// index so the output does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers && w < n; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string embeddings, labels, backend, out;
  int iterations = 20;
};

int cmd_train(const Global& g, const TrainArgs& a) {
  const auto xs = read_archive(std::filesystem::path(a.embeddings));
  const auto pairs = read_labels(std::filesystem::path(a.labels));
  std::map<std::string, std::string> speaker_of;
  for (const auto& [id, spk] : pairs) {
    if (!speaker_of.emplace(id, spk).second) fail(Errc::InvalidArgument, "duplicate id '" + id + "' in label file");
  }
  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (const auto& x : xs) {
    const auto it = speaker_of.find(x.id);
    if (it == speaker_of.end()) fail(Errc::MissingId, "embedding '" + x.id + "' has no label");
    labels.push_back(it->second);
    seen.insert(x.id);
  }
  for (const auto& [id, spk] : pairs) {
    if (!seen.count(id)) fail(Errc::MissingId, "labelled id '" + id + "' is not in the embedding archive");
  }
  if (xs.empty()) fail(Errc::InsufficientData, "train: empty embedding archive");

  json result = {{"backend", a.backend},
                 {"n_embeddings", xs.size()},
                 {"n_speakers", std::set<std::string>(labels.begin(), labels.end()).size()},
                 {"dim", xs.front().dim()}};
  BackendModel model = CosineModel{};
  if (a.backend == "cosine") {
    model = CosineModel{default_plda_preprocess(mean_embedding(xs))};
    result["loglik"] = nullptr;
  } else if (a.backend == "psda") {
    auto r = train_psda(xs, labels, {PreprocessStep::LengthNorm}, {a.iterations, 1e7});
    for (const auto& w : r.warnings) log::warn(w);
    result["loglik"] = number(r.loglik.back());
    result["loglik_trace"] = r.loglik;
    result["params"] = {{"b", r.model.b()}, {"w", r.model.w()}};
    result["warnings"] = r.warnings;
    model = std::move(r.model);
  } else {
    const CovType t = a.backend == "sph-plda"    ? CovType::Spherical
                      : a.backend == "diag-plda" ? CovType::Diagonal
                                                 : CovType::Full;
    auto r = train_plda(xs, labels, t, {PreprocessStep::Center, PreprocessStep::LengthNorm},
                        {a.iterations, 1e-8});
    result["loglik"] = number(r.loglik.back());
    result["loglik_trace"] = r.loglik;
    if (t == CovType::Spherical) {
      result["params"] = {{"between_variance", r.model.between().scalar()},
                          {"within_variance", r.model.within().scalar()}};
    } else {
      const auto d = static_cast<double>(r.model.dim());
      result["params"] = {{"between_mean_variance", r.model.between().dense().trace() / d},
                          {"within_mean_variance", r.model.within().dense().trace() / d}};
    }
    model = std::move(r.model);
  }
  save_model(a.out, model);
  result["model"] = a.out;
  emit_report(g, "train",
              {{"embeddings", a.embeddings}, {"labels", a.labels}, {"backend", a.backend}, {"out", a.out},
               {"iterations", a.iterations}},
              std::move(result));
  return 0;
}

// --- score -----------------------------------------------------------------

struct ScoreArgs {
  std::string model, embeddings, trials, mode, out;
  unsigned threads = 0;
};

int cmd_score(const Global& g, const ScoreArgs& a) {
  const BackendModel model = load_model(a.model);
  const ScoreMode mode = parse_score_mode(a.mode);
  if (mode == ScoreMode::ByTheBook && std::holds_alternative<CosineModel>(model)) {
    fail(Errc::ModeMismatch, "score: by-the-book scoring needs a PLDA or PSDA model, got a cosine model");
  }
  const Archive archive(a.embeddings);
  const auto trials = read_trials(std::filesystem::path(a.trials));

  // Preprocess only what the trials reference, once per id.
  std::vector<std::size_t> used;
  for (const auto& t : trials) {
    for (const auto* side : {&t.enroll, &t.test})
      for (const auto& id : *side) used.push_back(archive.at(id));
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::vector<Embedding> pre(archive.xs.size());
  const auto& params = preprocess_of(model);
  for (std::size_t i : used) pre[i] = preprocess(archive.xs[i], params);

  std::vector<ScoredTrial> scores(trials.size());
  parallel_for(trials.size(), worker_count(a.threads), [&](std::size_t i) {
    std::vector<Embedding> e, t;
    for (const auto& id : trials[i].enroll) e.push_back(pre[archive.at(id)]);
    for (const auto& id : trials[i].test) t.push_back(pre[archive.at(id)]);
    const double s = score_trial(model, mode, e, t);
    if (!std::isfinite(s)) fail(Errc::DomainError, "score: non-finite score for trial " + std::to_string(i + 1));
    scores[i] = {s, trials[i].target};
  });
  auto out = open_out(a.out);
  write_scores(out, scores);

  const auto n_target = static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const Trial& t) {
    return t.target;
  }));
  emit_report(g, "score",
              {{"model", a.model}, {"embeddings", a.embeddings}, {"trials", a.trials}, {"mode", a.mode},
               {"out", a.out}, {"threads", a.threads}},
              {{"model_kind", std::string(kind_of(model))},
               {"n_trials", trials.size()},
               {"n_target", n_target},
               {"n_impostor", trials.size() - n_target}});
  return 0;
}

// --- eval-verif ------------------------------------------------------------

struct EvalVerifArgs {
  std::vector<std::string> scores;
  bool pooled = false;
  double p_target = 0.01, c_miss = 1.0, c_fa = 1.0;
};

json verification_entry(const ScoreSet& s, const DcfConfig& c) {
  const auto e = eer(s);
  const auto m = min_dcf(s, c);
  return {{"eer", e.eer},
          {"eer_threshold", number(e.threshold)},
          {"min_dcf", m.min_dcf},
          {"min_dcf_threshold", number(m.threshold)},
          {"n_target", s.target.size()},
          {"n_impostor", s.nontarget.size()}};
}

int cmd_eval_verif(const Global& g, const EvalVerifArgs& a) {
  const DcfConfig c{a.p_target, a.c_miss, a.c_fa};
  json inputs = json::array();
  ScoreSet pooled;
  for (const auto& path : a.scores) {
    const ScoreSet s = to_score_set(read_scores(std::filesystem::path(path)));
    json entry = verification_entry(s, c);
    entry["path"] = path;
    inputs.push_back(std::move(entry));
    pooled.target.insert(pooled.target.end(), s.target.begin(), s.target.end());
    pooled.nontarget.insert(pooled.nontarget.end(), s.nontarget.begin(), s.nontarget.end());
  }
  emit_report(g, "eval-verif",
              {{"scores", a.scores}, {"pooled", a.pooled}, {"p_target", a.p_target}, {"c_miss", a.c_miss},
               {"c_fa", a.c_fa}},
              {{"inputs", std::move(inputs)}, {"pooled", a.pooled ? verification_entry(pooled, c) : json(nullptr)}});
  return 0;
}

// --- cluster ---------------------------------------------------------------

struct ClusterArgs {
  std::string model, embeddings, order, algo = "vb", scorer = "csea", out, steps;
  std::optional<double> tau;
  double p_new = 0.01;
  bool hard = false;
  int iters = 1;
};

int cmd_cluster(const Global& g, const ClusterArgs& a) {
  const BackendModel model = load_model(a.model);
  const Archive archive(a.embeddings);
  std::vector<std::size_t> order;
  if (a.order.empty()) {
    for (std::size_t i = 0; i < archive.xs.size(); ++i) order.push_back(i);
  } else {
    for (const auto& id : read_id_list(std::filesystem::path(a.order))) order.push_back(archive.at(id));
  }
  std::vector<Embedding> events;
  events.reserve(order.size());
  for (std::size_t i : order) events.push_back(preprocess(archive.xs[i], preprocess_of(model)));

  StreamResult r;
  if (a.algo == "vb") {
    OnlineModel online = std::holds_alternative<PldaModel>(model) ? OnlineModel(std::get<PldaModel>(model))
                         : std::holds_alternative<PsdaModel>(model)
                             ? OnlineModel(std::get<PsdaModel>(model))
                             : throw UsageError("cluster: --algo vb needs a PLDA or PSDA model");
    OnlineConfig cfg;
    cfg.p_new = a.p_new;
    cfg.n_update_iters = a.iters;
    cfg.assignment = a.hard ? Assignment::Hard : Assignment::Soft;
    r = run_stream_vb(events, std::move(online), cfg);
  } else {
    if (!a.tau) throw UsageError("cluster: --algo threshold requires --tau");
    ScoreMode mode = ScoreMode::Csea;
    if (a.scorer == "cssa") mode = ScoreMode::Cssa;
    if (a.scorer == "plda" || a.scorer == "psda") {
      const bool ok = a.scorer == "plda" ? std::holds_alternative<PldaModel>(model)
                                         : std::holds_alternative<PsdaModel>(model);
      if (!ok) throw UsageError("cluster: --scorer " + a.scorer + " does not match the model kind");
      mode = ScoreMode::ByTheBook;
    }
    r = run_stream_threshold(events, make_scorer(model, mode), *a.tau);
  }

  auto out = open_out(a.out);
  for (std::size_t i = 0; i < events.size(); ++i) out << events[i].id << ' ' << r.labels[i] << '\n';
  if (!a.steps.empty()) {
    auto steps = open_out(a.steps);
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& o = r.outcomes[i];
      steps << json{{"event_id", events[i].id}, {"gamma", o.gamma}, {"assigned", o.assigned}, {"K", o.num_clusters}}
                   .dump()
            << '\n';
    }
  }
  emit_report(g, "cluster",
              {{"model", a.model},
               {"embeddings", a.embeddings},
               {"order", a.order},
               {"algo", a.algo},
               {"scorer", a.scorer},
               {"tau", a.tau ? json(*a.tau) : json(nullptr)},
               {"p_new", a.p_new},
               {"hard", a.hard},
               {"iters", a.iters},
               {"out", a.out},
               {"steps", a.steps}},
              {{"n_events", events.size()}, {"num_clusters", r.num_clusters}});
  return 0;
}

// --- eval-diar -------------------------------------------------------------

struct EvalDiarArgs {
  std::string ref, hyp;
  double collar = 0.25;
  bool skip_overlap = true;
};

int cmd_eval_diar(const Global& g, const EvalDiarArgs& a) {
  const Annotation ref = read_rttm(std::filesystem::path(a.ref));
  const Annotation hyp = read_rttm(std::filesystem::path(a.hyp));
  const auto rep = score_diarization(ref, hyp, {a.collar, a.skip_overlap});
  json per = json::object();
  for (const auto& [name, rs] : rep.per_recording) {
    per[name] = {{"der", number(rs.der.der())}, {"jer", rs.jer}, {"scored", rs.der.scored},
                 {"miss", rs.der.miss},         {"false_alarm", rs.der.false_alarm}, {"confusion", rs.der.confusion}};
  }
  emit_report(g, "eval-diar", {{"ref", a.ref}, {"hyp", a.hyp}, {"collar", a.collar}, {"skip_overlap", a.skip_overlap}},
              {{"der", number(rep.der.der())},
               {"jer", rep.jer},
               {"scored", rep.der.scored},
               {"miss", rep.der.miss},
               {"false_alarm", rep.der.false_alarm},
               {"confusion", rep.der.confusion},
               {"per_recording", std::move(per)}});
  return 0;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string spec, out_embeddings, out_labels, out_trials, out_order, stream_order;
};

struct ProtocolSpec {
  std::string name;
  ProtocolConfig config;
};

SynthSpec parse_synth_spec(const json& j, std::vector<ProtocolSpec>& protocols) {
  SynthSpec s;
  const json& m = j.at("model");
  const auto kind = m.at("kind").get<std::string>();
  const auto d = m.at("dim").get<std::size_t>();
  if (d == 0) fail(Errc::InvalidArgument, "synth spec: dim must be >= 1");
  Vector mu = m.contains("mu") ? m.at("mu").get<Vector>() : Vector(d, 0.0);
  if (kind == "plda") {
    auto g = PldaGenerator::spherical(d, m.at("between").get<double>(), m.at("within").get<double>());
    if (m.contains("mu")) g.mu = mu;
    if (g.mu.size() != d) fail(Errc::DimensionMismatch, "synth spec: mu has the wrong dimension");
    s.model = std::move(g);
  } else if (kind == "psda") {
    if (!m.contains("mu")) mu.back() = 1.0;
    if (mu.size() != d) fail(Errc::DimensionMismatch, "synth spec: mu has the wrong dimension");
    s.model = PsdaGenerator{mu, m.at("b").get<double>(), m.at("w").get<double>()};
  } else {
    fail(Errc::InvalidArgument, "synth spec: unknown model kind '" + kind + "'");
  }
  s.n_speakers = j.at("n_speakers").get<std::size_t>();
  const json& c = j.at("count");
  if (c.is_array()) {
    if (c.size() != 2) fail(Errc::InvalidArgument, "synth spec: count range must be [min, max]");
    s.count_min = c[0].get<std::size_t>();
    s.count_max = c[1].get<std::size_t>();
  } else {
    s.count_min = s.count_max = c.get<std::size_t>();
  }
  s.seed = j.value("seed", std::uint64_t{0});
  s.stream_order = parse_stream_order(j.value("stream_order", std::string("grouped")));
  if (j.contains("protocols")) {
    std::uint64_t k = 0;
    for (const auto& p : j.at("protocols")) {
      ProtocolSpec ps;
      ps.config.n_enroll = p.at("n_enroll").get<std::size_t>();
      ps.config.n_test = p.at("n_test").get<std::size_t>();
      ps.config.n_trials = p.value("n_trials", std::size_t{1000});
      ps.name = p.value("name", std::to_string(ps.config.n_enroll) + "-" + std::to_string(ps.config.n_test));
      ps.config.seed = split_seed(s.seed ^ 0x5bd1e995ULL, k++);
      protocols.push_back(std::move(ps));
    }
  }
  return s;
}

int cmd_synth(const Global& g, const SynthArgs& a) {
  std::ifstream in(a.spec);
  if (!in) fail(Errc::IoError, "cannot open synth spec '" + a.spec + "'");
  json j;
  std::vector<ProtocolSpec> protocols;
  SynthSpec spec;
  try {
    j = json::parse(in);
    spec = parse_synth_spec(j, protocols);
  } catch (const json::exception& e) {
    fail(Errc::ParseError, std::string("synth spec: ") + e.what());
  }
  if (g.seed) {
    spec.seed = *g.seed;
    for (std::size_t k = 0; k < protocols.size(); ++k) protocols[k].config.seed = split_seed(spec.seed ^ 0x5bd1e995ULL, k);
  }
  if (!a.stream_order.empty()) spec.stream_order = parse_stream_order(a.stream_order);

  const SynthData data = sample(spec);
  write_archive(std::filesystem::path(a.out_embeddings), data.embeddings);
  {
    auto out = open_out(a.out_labels);
    std::vector<std::string> ids;
    for (const auto& x : data.embeddings) ids.push_back(x.id);
    write_labels(out, ids, data.labels);
  }
  if (!a.out_order.empty()) {
    auto out = open_out(a.out_order);
    for (std::size_t i : data.order) out << data.embeddings[i].id << '\n';
  }
  json written = json::array();
  if (!protocols.empty()) {
    if (a.out_trials.empty()) throw UsageError("synth: the synth spec lists protocols but --out-trials is not set");
    std::vector<std::vector<Trial>> all;
    for (const auto& p : protocols) {
      all.push_back(make_protocol(data.embeddings, data.labels, p.config));
      const std::string path = a.out_trials + "." + p.name + ".trials";
      auto out = open_out(path);
      write_trials(out, all.back());
      written.push_back({{"name", p.name}, {"path", path}, {"n_trials", all.back().size()}});
    }
    const auto pooled = pool_protocols(all);
    const std::string path = a.out_trials + ".pooled.trials";
    auto out = open_out(path);
    write_trials(out, pooled);
    written.push_back({{"name", "pooled"}, {"path", path}, {"n_trials", pooled.size()}});
  }
  j["seed"] = spec.seed;
  j["stream_order"] = std::string(to_string(spec.stream_order));
  emit_report(g, "synth",
              {{"spec", a.spec},
               {"resolved_spec", j},
               {"out_embeddings", a.out_embeddings},
               {"out_labels", a.out_labels},
               {"out_trials", a.out_trials},
               {"out_order", a.out_order}},
              {{"n_embeddings", data.embeddings.size()}, {"n_speakers", data.speakers.size()}, {"trials", written}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker embedding back-ends: training, scoring, online clustering and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides any seed in input specs)");
  app.add_option("--log-level", g.log_level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));
  app.add_option("--output", g.output, "Write the JSON report here instead of stdout");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a back-end from labelled embeddings");
  c_train->add_option("--embeddings", train.embeddings, "Embedding archive")->required();
  c_train->add_option("--labels", train.labels, "Label file, '<id> <speaker>' per line")->required();
  c_train->add_option("--backend", train.backend, "Back-end to train")
      ->required()
      ->check(CLI::IsMember({"sph-plda", "diag-plda", "full-plda", "psda", "cosine"}));
  c_train->add_option("--out", train.out, "Model file to write")->required();
  c_train->add_option("--iters", train.iterations, "EM iterations")->check(CLI::PositiveNumber);

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Score a trial list");
  c_score->add_option("--model", score.model, "Model file from train")->required();
  c_score->add_option("--embeddings", score.embeddings, "Embedding archive")->required();
  c_score->add_option("--trials", score.trials, "Trial list")->required();
  c_score->add_option("--mode", score.mode, "Scoring rule for multi-embedding trials")->required()->check(CLI::IsMember({"bythebook", "csea", "cssa"}));
  c_score->add_option("--out", score.out, "Output: '<score> <label>' per trial")->required();
  c_score->add_option("--threads", score.threads, "Worker threads (0 = all cores)");

  EvalVerifArgs ev;
  auto* c_ev = app.add_subcommand("eval-verif", "EER and minDCF of score files");
  c_ev->add_option("--scores", ev.scores, "One or more score files")->required()->expected(1, -1);
  c_ev->add_flag("--pooled", ev.pooled, "Also evaluate the concatenation of all inputs");
  c_ev->add_option("--p-target", ev.p_target, "Target prior of the detection cost (default 0.01)")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  c_ev->add_option("--c-miss", ev.c_miss, "Cost of a miss (default 1)")->check(CLI::PositiveNumber);
  c_ev->add_option("--c-fa", ev.c_fa, "Cost of a false alarm (default 1)")->check(CLI::PositiveNumber);

  ClusterArgs cl;
  double tau = 0.0;
  auto* c_cl = app.add_subcommand("cluster", "Online clustering of an embedding stream");
  c_cl->add_option("--model", cl.model, "Model file from train")->required();
  c_cl->add_option("--embeddings", cl.embeddings, "Embedding archive")->required();
  c_cl->add_option("--order", cl.order, "Event order, one id per line (default: archive order)");
  c_cl->add_option("--algo", cl.algo, "Variational Bayes (default) or threshold baseline")->check(CLI::IsMember({"threshold", "vb"}));
  c_cl->add_option("--scorer", cl.scorer, "Scorer for --algo threshold")
      ->check(CLI::IsMember({"csea", "cssa", "plda", "psda"}));
  auto* tau_opt = c_cl->add_option("--tau", tau, "Threshold for --algo threshold");
  c_cl->add_option("--p-new", cl.p_new, "Prior of the unknown-speaker class")->check(CLI::Range(1e-300, 1.0 - 1e-12));
  c_cl->add_flag("--hard", cl.hard, "Hard assignments");
  c_cl->add_option("--iters", cl.iters, "Update iterations per event")->check(CLI::PositiveNumber);
  c_cl->add_option("--out", cl.out, "Output: '<id> <cluster>' per event")->required();
  c_cl->add_option("--steps", cl.steps, "Optional per-event JSON-lines trace");

  EvalDiarArgs ed;
  auto* c_ed = app.add_subcommand("eval-diar", "DER and JER of an RTTM hypothesis");
  c_ed->add_option("--ref", ed.ref, "Reference RTTM")->required();
  c_ed->add_option("--hyp", ed.hyp, "Hypothesis RTTM")->required();
  c_ed->add_option("--collar", ed.collar, "No-score collar in seconds around reference boundaries (default 0.25)")->check(CLI::NonNegativeNumber);
  c_ed->add_flag("--skip-overlap,!--no-skip-overlap", ed.skip_overlap, "Exclude overlapped reference speech from DER");

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Sample synthetic embeddings, labels and trial lists");
  c_sy->add_option("--spec", sy.spec, "JSON generator spec")->required();
  c_sy->add_option("--out-embeddings", sy.out_embeddings, "Embedding archive to write")->required();
  c_sy->add_option("--out-labels", sy.out_labels, "Label file to write")->required();
  c_sy->add_option("--out-trials", sy.out_trials, "Prefix for '<prefix>.<protocol>.trials' files");
  c_sy->add_option("--out-order", sy.out_order, "Stream order, one id per line");
  c_sy->add_option("--stream-order", sy.stream_order)->check(CLI::IsMember({"grouped", "shuffled", "interleaved"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (*seed_opt) g.seed = seed;
  if (*tau_opt) cl.tau = tau;

  try {
    log::set_level(log::parse_level(g.log_level));
    if (*c_train) return cmd_train(g, train);
    if (*c_score) return cmd_score(g, score);
    if (*c_ev) return cmd_eval_verif(g, ev);
    if (*c_cl) return cmd_cluster(g, cl);
    if (*c_ed) return cmd_eval_diar(g, ed);
    if (*c_sy) return cmd_synth(g, sy);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
