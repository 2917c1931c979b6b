#include "commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <list>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lirlab/curation/curate.hpp"
#include "lirlab/embedding_store.hpp"
#include "lirlab/loss/bounds.hpp"
#include "lirlab/loss/collapse.hpp"
#include "lirlab/maxsim.hpp"
#include "lirlab/metrics.hpp"
#include "lirlab/random.hpp"
#include "lirlab/synth.hpp"
#include "lirlab/worker_pool.hpp"

namespace lirlab::cli {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::FormatError:
    case ErrorCode::ZeroNormToken:
      return kExitIo;
    case ErrorCode::AgentUnavailable:
    case ErrorCode::EmptyResponse:
      return kExitUpstream;
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::TieDetected:
      return kExitVerification;
    default:
      return kExitConfig;
  }
}

namespace {

fs::path reports_dir(const Settings& s) {
  fs::path dir = s.str("out");
  if (dir.empty()) dir = ".";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  f << text;
  if (!f) raise(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

fs::path required_path(const Settings& s, const std::string& key, const char* command) {
  auto p = s.path(key);
  if (!p) raise(ErrorCode::InvalidConfig, fmt::format("{} needs '{}' (--{} or --set {}=PATH)", command, key, key, key));
  return *p;
}

std::size_t positive(const Settings& s, const std::string& key) {
  const auto v = s.size(key);
  if (v == 0) raise(ErrorCode::InvalidConfig, "config key '" + key + "' must be positive");
  return v;
}

curation::PayloadResolver image_resolver(const std::optional<fs::path>& dir) {
  if (!dir) return curation::id_only_resolver();
  if (!fs::is_directory(*dir)) raise(ErrorCode::IoError, "images directory '" + dir->string() + "' not found");
  std::map<std::string, fs::path> by_stem;
  for (const auto& entry : fs::directory_iterator(*dir)) {
    if (!entry.is_regular_file()) continue;
    const auto stem = entry.path().stem().string();
    auto it = by_stem.find(stem);
    if (it == by_stem.end() || entry.path() < it->second) by_stem[stem] = entry.path();
  }
  return [by_stem = std::move(by_stem)](const std::string& id) {
    const auto it = by_stem.find(id);
    if (it == by_stem.end()) raise(ErrorCode::IoError, "no image file for id '" + id + "'");
    return curation::ImagePayload{id, it->second.string()};
  };
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace

int cmd_curate(const Settings& s, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  const auto store = load_embedding_store(required_path(s, "embeddings", "curate"));

  curation::CurationOptions options;
  options.mining.q1 = s.size("mining.q1");
  options.mining.q2 = s.size("mining.q2");
  options.mining.seed = s.u64("seed");
  options.mining.allow_reuse = s.boolean("mining.allow_reuse");
  curation::validate_window(options.mining, store.size());
  options.protocol = curation::protocol_from_string(s.str("curate.protocol"));
  options.failure_policy = curation::failure_policy_from_string(s.str("mining.failure_policy"));
  options.max_in_flight = positive(s, "agent.max_in_flight");
  if (auto p = s.path("prompts.caption")) options.templates.caption = load_template(curation::TemplateName::caption, *p);
  if (auto p = s.path("prompts.modification")) {
    options.templates.modification = load_template(curation::TemplateName::modification, *p);
  }
  if (auto p = s.path("prompts.direct")) {
    options.templates.direct = load_template(curation::TemplateName::modification_direct, *p);
  }

  std::unique_ptr<curation::Agent> agent;
  const auto& mode = s.str("agent.mode");
  if (mode == "mock") {
    agent = std::make_unique<curation::MockAgent>();
  } else if (mode == "live") {
    curation::AgentEndpoint ep;
    ep.base_url = s.str("agent.base_url");
    ep.model = s.str("agent.model");
    const auto& key_var = s.str("agent.api_key_env");
    if (auto key = env ? env(key_var) : std::nullopt; key && !key->empty()) {
      ep.api_key = *key;
    } else {
      raise(ErrorCode::InvalidConfig, "live agent needs an API key in $" + key_var);
    }
    ep.timeout_seconds = s.real("agent.timeout");
    ep.max_retries = static_cast<int>(s.size("agent.max_retries"));
    ep.retry_backoff = std::chrono::milliseconds(s.size("agent.retry_backoff_ms"));
    ep.temperature = s.real("agent.temperature");
    agent = std::make_unique<curation::HttpAgent>(ep);
  } else {
    raise(ErrorCode::InvalidConfig, "agent.mode must be mock or live, got '" + mode + "'");
  }

  const auto resolver = image_resolver(s.path("agent.images_dir"));
  const auto dest = s.path("triplets_out").value_or(reports_dir(s) / "triplets.jsonl");

  WorkerPool pool(s.size("threads"));
  const auto result = curation::curate_triplets(store, resolver, options, *agent, pool);
  curation::write_triplets_jsonl(result.triplets, dest);

  for (const auto& f : result.failures) {
    err << "skipped: ref_id=" << f.ref_id << " " << to_string(f.code) << ": " << f.message << '\n';
  }
  out << fmt::format("curated {} triplets window=[{},{}] protocol={} agent={} skipped={} -> {}\n",
                     result.triplets.size(), options.mining.q1, options.mining.q2, to_string(options.protocol),
                     agent->model(), result.failures.size(), dest.string());
  return kExitOk;
}

int cmd_verify_bounds(const Settings& s, std::ostream& out) {
  const auto n = positive(s, "bounds.n");
  const double tau = s.real("loss.tau");
  const double noise = s.real("bounds.noise");
  const auto seed = s.u64("seed");
  if (!(tau > 0.0) || !std::isfinite(tau)) raise(ErrorCode::InvalidConfig, "loss.tau must be a positive number");
  if (!(noise >= 0.0) || !std::isfinite(noise)) raise(ErrorCode::InvalidConfig, "bounds.noise must be >= 0");

  loss::Batch batch;
  std::string source = "synthetic";
  if (auto path = s.path("embeddings")) {
    const auto store = normalize_store(load_embedding_store(*path));
    std::vector<TokenMatrix64> queries;
    for (std::size_t i = 0; i < std::min(n, store.size()); ++i) queries.push_back(store.matrix(i).cast<double>());
    batch = loss::make_permuted_batch(std::move(queries), noise, tau, seed);
    source = path->string();
  } else {
    batch = loss::make_permuted_batch(n, positive(s, "bounds.p"), positive(s, "bounds.d"), noise, tau, seed);
  }

  const auto report = loss::verify_bounds(batch);
  ojson doc;
  doc["config"] = {{"source", source}, {"n", report.n},   {"p", report.p},   {"d", report.d},
                   {"tau", tau},       {"noise", noise}, {"seed", seed}};
  const auto fields = ojson::parse(loss::to_json(report));
  for (const auto& [k, v] : fields.items()) doc[k] = v;
  const auto dest = reports_dir(s) / "bounds_report.json";
  write_text(dest, doc.dump(2) + "\n");

  const bool ok = report.proposition_ok && report.corollary_ok;
  out << fmt::format("verify-bounds n={} L={:.6f} Ls={:.6f} gap={:.6g} log_bound={:.6g} proposition_ok={} "
                     "corollary_ok={} -> {}\n",
                     report.n, report.loss_maxsim, report.loss_standard, report.gap, report.log_bound,
                     report.proposition_ok, report.corollary_ok, dest.string());
  return ok ? kExitOk : kExitVerification;
}

int cmd_collapse_lab(const Settings& s, std::ostream& out) {
  loss::CollapseConfig cfg;
  cfg.m = s.size("collapse.m");
  cfg.p = s.size("collapse.p");
  cfg.d = s.size("collapse.d");
  cfg.tau = s.real("collapse.tau");
  cfg.steps = s.size("collapse.steps");
  cfg.step_size = s.real("collapse.step_size");
  cfg.step_rule = loss::step_rule_from_string(s.str("collapse.step_rule"));
  cfg.tie_v_to_u = s.boolean("collapse.tie_v_to_u");
  cfg.seed = s.u64("seed");
  const double threshold = s.real("collapse.threshold");
  if (!(threshold > 0.0)) raise(ErrorCode::InvalidConfig, "collapse.threshold must be > 0");
  loss::validate(cfg);

  const auto report = loss::collapse_lab(cfg);
  const auto dest = reports_dir(s) / "collapse_report.json";
  write_text(dest, loss::to_json(cfg, report, threshold) + "\n");
  if (auto csv = s.path("collapse.trace_csv")) loss::write_trace_csv(report, *csv);

  const bool ok = report.etf_error < threshold && report.alignment_error < threshold;
  out << fmt::format("collapse-lab m={} p={} d={} steps={} objective={:.6f} etf_error={:.3e} alignment_error={:.3e} "
                     "ok={} -> {}\n",
                     cfg.m, cfg.p, cfg.d, cfg.steps, report.final_objective, report.etf_error,
                     report.alignment_error, ok, dest.string());
  return ok ? kExitOk : kExitVerification;
}

int cmd_eval(const Settings& s, std::ostream& out) {
  const auto queries = normalize_store(load_embedding_store(required_path(s, "queries", "eval")));
  const auto candidates = normalize_store(load_embedding_store(required_path(s, "candidates", "eval")));
  const auto anns = metrics::load_annotations(required_path(s, "annotations", "eval"));
  const auto ks = s.cutoffs("ks");
  const auto subset_ks = s.cutoffs("subset_ks");
  if (ks.empty()) raise(ErrorCode::InvalidConfig, "ks is empty");

  WorkerPool pool(s.size("threads"));
  const auto scores = maxsim_matrix(queries, candidates, pool);
  std::vector<RankedList> rankings(queries.size());
  pool.parallel_for(queries.size(), [&](std::size_t i) {
    rankings[i] = top_k(scores.row(i), candidates.ids(), candidates.size(), std::nullopt, queries.id(i));
  });
  std::map<std::string, RankedList> run;
  for (auto& r : rankings) {
    auto id = r.query_id;
    run.emplace(std::move(id), std::move(r));
  }

  const auto report =
      metrics::evaluate(run, anns, ks, subset_ks.empty() ? std::nullopt : std::optional(subset_ks));
  const auto dest = reports_dir(s) / "metrics_report.json";
  write_text(dest, metrics::to_json(report));

  std::string line = fmt::format("eval queries={}", report.query_count);
  for (const auto& [k, v] : report.recall_at) line += fmt::format(" R@{}={:.6f}", k, v);
  for (const auto& [k, v] : report.recall_subset_at) line += fmt::format(" Rsub@{}={:.6f}", k, v);
  for (const auto& [k, v] : report.map_at) line += fmt::format(" mAP@{}={:.6f}", k, v);
  out << line << " -> " << dest.string() << '\n';
  return kExitOk;
}

int cmd_bench(const Settings& s, std::ostream& out) {
  SynthSpec spec;
  spec.n = positive(s, "bench.n");
  spec.p = positive(s, "bench.p");
  spec.d = positive(s, "bench.d");
  spec.seed = s.u64("seed");
  const auto repeats = positive(s, "bench.repeats");
  const auto store = synth_embeddings(spec);

  WorkerPool pool(s.size("threads"));
  const auto reference = maxsim_matrix(store, store, pool);
  const auto sum = checksum(reference);

  // Spot-check the optimized path against the brute kernel before timing.
  constexpr std::size_t kSamplePairs = 32;
  constexpr double kSampleTolerance = 1e-6;
  SeededStream rng(derive_seed(spec.seed, 0xbe4c));
  double worst = 0.0;
  for (std::size_t t = 0; t < kSamplePairs; ++t) {
    const auto i = rng.below(spec.n);
    const auto j = rng.below(spec.n);
    const double brute = maxsim_brute(store.matrix(i), store.matrix(j));
    worst = std::max(worst, std::abs(brute - reference.at(i, j)));
  }
  if (!(worst <= kSampleTolerance)) {
    raise(ErrorCode::ChecksumMismatch, fmt::format("sampled scores differ from brute force by {:.3e}", worst));
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scores = maxsim_matrix(store, store, pool);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    if (checksum(scores) != sum) raise(ErrorCode::ChecksumMismatch, "score matrix changed between repetitions");
    best = std::min(best, dt.count());
  }
  best = std::max(best, 1e-9);
  const double pairs = static_cast<double>(spec.n) * static_cast<double>(spec.n);

  ojson doc;
  doc["pairs_per_second"] = pairs / best;
  doc["n"] = spec.n;
  doc["p"] = spec.p;
  doc["d"] = spec.d;
  doc["threads"] = pool.size();
  doc["wall_seconds"] = best;
  doc["repeats"] = repeats;
  doc["seed"] = spec.seed;
  doc["checksum"] = hex64(sum);
  doc["sample_pairs"] = kSamplePairs;
  doc["sample_max_abs_diff"] = worst;
  const auto dest = reports_dir(s) / "bench_report.json";
  write_text(dest, doc.dump(2) + "\n");

  out << fmt::format("bench n={} p={} d={} threads={} pairs/s={:.4g} wall={:.4g}s checksum={} -> {}\n", spec.n,
                     spec.p, spec.d, pool.size(), pairs / best, best, hex64(sum), dest.string());
  return kExitOk;
}

int cmd_synth(const Settings& s, std::ostream& out) {
  SynthSpec spec;
  spec.n = s.size("synth.n");
  spec.p = s.size("synth.p");
  spec.d = s.size("synth.d");
  spec.seed = s.u64("seed");
  if (const auto c = s.size("synth.clusters"); c > 0) spec.cluster_count = c;
  spec.noise_scale = s.real("synth.noise");
  const auto store = synth_embeddings(spec);
  const auto dest = s.path("synth.output").value_or(reports_dir(s) / "synthetic.temb");
  save_embedding_store(store, dest);
  out << fmt::format("synth n={} p={} d={} -> {}\n", spec.n, spec.p, spec.d, dest.string());
  return kExitOk;
}

namespace {

std::string settings_footer() {
  std::string text = "\nConfiguration keys (set with --set KEY=VALUE, a --config file, or LIRLAB_<KEY> env vars;\n"
                     "flag > environment > file > default). Defaults tagged [published] reproduce the reference\n"
                     "experimental setup; every other default is a local choice:\n";
  for (const auto& info : setting_table()) {
    const auto shown = info.default_value.empty() ? std::string("\"\"") : info.default_value;
    text += fmt::format("  {:<22} {:<14} {}{}\n", info.key, shown, info.help, info.published ? " [published]" : "");
  }
  return text;
}

struct Binding {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

class FlagSet {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& b = bindings_.emplace_back();
    b.key = key;
    b.option = app->add_option(flag, b.value, help + " (" + key + ")");
  }
  void collect(std::map<std::string, std::string>& into) const {
    for (const auto& b : bindings_) {
      if (b.option->count() > 0) into[b.key] = b.value;
    }
  }

 private:
  std::list<Binding> bindings_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Token-level late-interaction retrieval lab: triplet curation, loss bound checks, "
               "collapse experiments, evaluation and kernel benchmarks.",
               "lirlab"};
  app.require_subcommand(1);
  app.footer(settings_footer());

  std::string config_path;
  std::vector<std::string> sets;
  FlagSet flags;
  app.add_option("--config", config_path, "key=value configuration file");
  flags.add(&app, "--seed", "seed", "base random seed");
  flags.add(&app, "--threads", "threads", "worker threads, 0 = auto");
  flags.add(&app, "--out", "out", "report directory");
  app.add_option("--set", sets, "override any configuration key, KEY=VALUE")->take_all();

  auto* curate = app.add_subcommand("curate", "mine targets and generate modification texts into triplet JSONL");
  flags.add(curate, "--embeddings", "embeddings", "TEMB store");
  flags.add(curate, "--triplets-out", "triplets_out", "output JSONL");
  flags.add(curate, "--q1", "mining.q1", "window start rank");
  flags.add(curate, "--q2", "mining.q2", "window end rank");
  flags.add(curate, "--protocol", "curate.protocol", "two_step | direct");
  flags.add(curate, "--agent", "agent.mode", "mock | live");

  auto* bounds = app.add_subcommand("verify-bounds", "check the MaxSim InfoNCE lower bound and gap bound on a batch");
  flags.add(bounds, "--embeddings", "embeddings", "TEMB store supplying the query tokens");
  flags.add(bounds, "--n", "bounds.n", "batch size");
  flags.add(bounds, "--tau", "loss.tau", "temperature");

  auto* collapse = app.add_subcommand("collapse-lab", "optimize free token sets and measure simplex ETF collapse");
  flags.add(collapse, "--m", "collapse.m", "items");
  flags.add(collapse, "--p", "collapse.p", "tokens per item");
  flags.add(collapse, "--d", "collapse.d", "dimension");
  flags.add(collapse, "--tau", "collapse.tau", "temperature");
  flags.add(collapse, "--steps", "collapse.steps", "iterations");
  flags.add(collapse, "--step-size", "collapse.step_size", "step size");
  flags.add(collapse, "--trace-csv", "collapse.trace_csv", "per-step CSV trace");

  auto* eval = app.add_subcommand("eval", "rank candidates for composed queries and report R@K, R_subset@K, mAP@K");
  flags.add(eval, "--queries", "queries", "query TEMB store");
  flags.add(eval, "--candidates", "candidates", "candidate TEMB store");
  flags.add(eval, "--annotations", "annotations", "annotation JSONL");
  flags.add(eval, "--ks", "ks", "comma-separated cutoffs");

  auto* bench = app.add_subcommand("bench", "time the MaxSim score-matrix kernel");
  flags.add(bench, "--n", "bench.n", "items");
  flags.add(bench, "--p", "bench.p", "tokens per item");
  flags.add(bench, "--d", "bench.d", "dimension");

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic TEMB store");
  flags.add(synth, "--n", "synth.n", "items");
  flags.add(synth, "--p", "synth.p", "tokens per item");
  flags.add(synth, "--d", "synth.d", "dimension");
  flags.add(synth, "--clusters", "synth.clusters", "cluster count");
  flags.add(synth, "--output", "synth.output", "output path");

  for (auto* sub : {curate, bounds, collapse, eval, bench, synth}) sub->fallthrough();

  std::vector<std::string> argv_store{"lirlab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << to_string(ErrorCode::InvalidConfig) << ": " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    std::map<std::string, std::string> overrides;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) raise(ErrorCode::InvalidConfig, "--set expects KEY=VALUE, got '" + kv + "'");
      overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    flags.collect(overrides);  // dedicated flags win over --set
    const auto settings = Settings::resolve(
        config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path), env, overrides);

    if (curate->parsed()) return cmd_curate(settings, out, err, env);
    if (bounds->parsed()) return cmd_verify_bounds(settings, out);
    if (collapse->parsed()) return cmd_collapse_lab(settings, out);
    if (eval->parsed()) return cmd_eval(settings, out);
    if (bench->parsed()) return cmd_bench(settings, out);
    return cmd_synth(settings, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << to_string(ErrorCode::IoError) << ": " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return kExitVerification;
  }
}

}  // namespace lirlab::cli
