#include "lirlab/loss/collapse.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "json.hpp"
#include "lirlab/loss/assignment.hpp"
#include "lirlab/loss/infonce.hpp"
#include "lirlab/random.hpp"

namespace lirlab::loss {

StepRule step_rule_from_string(std::string_view s) {
  if (s == "armijo") return StepRule::armijo;
  if (s == "constant") return StepRule::constant;
  raise(ErrorCode::InvalidConfig, "unknown step rule '" + std::string(s) + "' (expected armijo or constant)");
}

std::string_view to_string(StepRule rule) noexcept { return rule == StepRule::armijo ? "armijo" : "constant"; }

void validate(const CollapseConfig& cfg) {
  if (cfg.m < 2) raise(ErrorCode::InvalidConfig, "collapse lab needs M >= 2");
  if (cfg.p < 1 || cfg.d < 1) raise(ErrorCode::InvalidConfig, "collapse lab needs p >= 1 and d >= 1");
  if (cfg.d * cfg.p < cfg.m - 1) {
    raise(ErrorCode::InvalidConfig,
          fmt::format("collapse lab needs d*p >= M-1, got d*p={} and M-1={}", cfg.d * cfg.p, cfg.m - 1));
  }
  if (!(cfg.tau > 0.0)) raise(ErrorCode::InvalidConfig, "collapse lab needs tau > 0");
  if (!(cfg.step_size > 0.0)) raise(ErrorCode::InvalidConfig, "collapse lab needs step_size > 0");
}

namespace {

using Params = std::vector<std::vector<double>>;  // one p*d vector per item

constexpr double kArmijoC = 1e-4;
constexpr double kMaxStep = 1e8;
constexpr int kMaxHalvings = 80;

std::vector<TokenMatrix64> to_matrices(const Params& x, std::size_t p, std::size_t d) {
  std::vector<TokenMatrix64> out;
  out.reserve(x.size());
  for (const auto& v : x) out.emplace_back(p, d, v);
  return out;
}

void normalize_rows(std::vector<double>& x, std::size_t d) {
  for (std::size_t off = 0; off < x.size(); off += d) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += x[off + k] * x[off + k];
    const double norm = std::sqrt(sq);
    for (std::size_t k = 0; k < d; ++k) x[off + k] /= norm;
  }
}

Params random_unit(SeededStream& rng, std::size_t m, std::size_t p, std::size_t d) {
  Params x(m, std::vector<double>(p * d));
  for (auto& v : x) {
    for (auto& c : v) c = rng.gaussian();
    normalize_rows(v, d);
  }
  return x;
}

struct State {
  Params u;
  Params v;
};

Batch as_batch(const State& st, const CollapseConfig& cfg) {
  Batch b;
  b.tau = cfg.tau;
  b.queries = to_matrices(st.u, cfg.p, cfg.d);
  b.targets = cfg.tie_v_to_u ? b.queries : to_matrices(st.v, cfg.p, cfg.d);
  return b;
}

double value_and_grad(const State& st, const CollapseConfig& cfg, Params& gu, Params& gv) {
  BatchGradient g;
  const double value = infonce_maxsim_value_and_grad(as_batch(st, cfg), g, TiePolicy::first_index);
  gu = std::move(g.queries);
  gv = std::move(g.targets);
  if (cfg.tie_v_to_u) {
    for (std::size_t i = 0; i < gu.size(); ++i) {
      for (std::size_t k = 0; k < gu[i].size(); ++k) gu[i][k] += gv[i][k];
    }
  }
  return value;
}

double value_only(const State& st, const CollapseConfig& cfg) { return infonce_maxsim(as_batch(st, cfg)); }

State step_from(const State& st, const Params& gu, const Params& gv, double step, const CollapseConfig& cfg) {
  State next = st;
  for (std::size_t i = 0; i < next.u.size(); ++i) {
    for (std::size_t k = 0; k < next.u[i].size(); ++k) next.u[i][k] += step * gu[i][k];
    normalize_rows(next.u[i], cfg.d);
  }
  if (cfg.tie_v_to_u) {
    next.v = next.u;
  } else {
    for (std::size_t i = 0; i < next.v.size(); ++i) {
      for (std::size_t k = 0; k < next.v[i].size(); ++k) next.v[i][k] += step * gv[i][k];
      normalize_rows(next.v[i], cfg.d);
    }
  }
  return next;
}

// <g, x_new - x_old>, the first-order predicted increase of a projected step.
double predicted_increase(const State& from, const State& to, const Params& gu, const Params& gv,
                          const CollapseConfig& cfg) {
  double total = 0.0;
  for (std::size_t i = 0; i < from.u.size(); ++i) {
    for (std::size_t k = 0; k < from.u[i].size(); ++k) total += gu[i][k] * (to.u[i][k] - from.u[i][k]);
    if (!cfg.tie_v_to_u) {
      for (std::size_t k = 0; k < from.v[i].size(); ++k) total += gv[i][k] * (to.v[i][k] - from.v[i][k]);
    }
  }
  return total;
}

}  // namespace

double etf_error(const std::vector<TokenMatrix64>& queries) {
  const auto m = queries.size();
  if (m < 2) return 0.0;
  const double target = -1.0 / static_cast<double>(m - 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto ui = normalize_tokens(queries[i]);
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto uj = normalize_tokens(queries[j]);
      double dot = 0.0;
      for (std::size_t k = 0; k < ui.values().size(); ++k) dot += ui.values()[k] * uj.values()[k];
      dot /= static_cast<double>(ui.tokens());
      worst = std::max(worst, std::abs(dot - target));
    }
  }
  return worst;
}

double alignment_error(const std::vector<TokenMatrix64>& queries, const std::vector<TokenMatrix64>& targets) {
  double worst = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto u = normalize_tokens(queries[i]);
    const auto v = normalize_tokens(targets[i]);
    auto sigma = argmax_assignment(u, v);
    if (!sigma.bijective) {
      for (std::size_t s = 0; s < sigma.map.size(); ++s) sigma.map[s] = s;
    }
    double sq = 0.0;
    for (std::size_t s = 0; s < u.tokens(); ++s) {
      const auto us = u.row(s);
      const auto vs = v.row(sigma.map[s]);
      for (std::size_t k = 0; k < u.dim(); ++k) sq += (us[k] - vs[k]) * (us[k] - vs[k]);
    }
    worst = std::max(worst, std::sqrt(sq / static_cast<double>(u.tokens())));
  }
  return worst;
}

CollapseReport collapse_lab(const CollapseConfig& cfg) {
  validate(cfg);
  SeededStream rng(derive_seed(cfg.seed, 0xE7F));
  State st;
  st.u = random_unit(rng, cfg.m, cfg.p, cfg.d);
  st.v = cfg.tie_v_to_u ? st.u : random_unit(rng, cfg.m, cfg.p, cfg.d);

  CollapseReport report;
  report.objective_trace.reserve(cfg.steps);
  report.etf_trace.reserve(cfg.steps);
  report.alignment_trace.reserve(cfg.steps);

  Params gu, gv;
  double value = value_and_grad(st, cfg, gu, gv);
  double step = cfg.step_size;
  for (std::size_t it = 0; it < cfg.steps; ++it) {
    if (cfg.step_rule == StepRule::constant) {
      st = step_from(st, gu, gv, cfg.step_size, cfg);
    } else {
      // Double the previous step, then halve until the sufficient-increase
      // condition holds. If no step qualifies the iterate stays put.
      double trial = std::min(step * 2.0, kMaxStep);
      bool accepted = false;
      for (int h = 0; h < kMaxHalvings; ++h, trial *= 0.5) {
        State next = step_from(st, gu, gv, trial, cfg);
        const double next_value = value_only(next, cfg);
        if (next_value >= value + kArmijoC * predicted_increase(st, next, gu, gv, cfg)) {
          st = std::move(next);
          accepted = true;
          break;
        }
      }
      step = accepted ? trial : cfg.step_size;
    }
    value = value_and_grad(st, cfg, gu, gv);

    const auto u = to_matrices(st.u, cfg.p, cfg.d);
    const auto v = to_matrices(st.v, cfg.p, cfg.d);
    report.objective_trace.push_back(value);
    report.etf_trace.push_back(etf_error(u));
    report.alignment_trace.push_back(alignment_error(u, v));
  }

  report.queries = to_matrices(st.u, cfg.p, cfg.d);
  report.targets = to_matrices(st.v, cfg.p, cfg.d);
  report.final_objective = value;
  report.etf_error = etf_error(report.queries);
  report.alignment_error = alignment_error(report.queries, report.targets);
  return report;
}

std::string to_json(const CollapseConfig& cfg, const CollapseReport& report, double threshold) {
  nlohmann::ordered_json config;
  config["m"] = cfg.m;
  config["p"] = cfg.p;
  config["d"] = cfg.d;
  config["tau"] = cfg.tau;
  config["steps"] = cfg.steps;
  config["step_size"] = cfg.step_size;
  config["step_rule"] = to_string(cfg.step_rule);
  config["seed"] = cfg.seed;
  config["tie_v_to_u"] = cfg.tie_v_to_u;
  config["threshold"] = threshold;

  nlohmann::ordered_json j;
  j["config"] = config;
  j["final_objective"] = report.final_objective;
  j["etf_error"] = report.etf_error;
  j["alignment_error"] = report.alignment_error;
  j["etf_target"] = -1.0 / static_cast<double>(cfg.m - 1);
  j["converged"] = report.etf_error < threshold && report.alignment_error < threshold;
  j["objective_trace"] = report.objective_trace;
  return j.dump(2);
}

void write_trace_csv(const CollapseReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << "step,objective,etf_error,alignment_error\n";
  for (std::size_t i = 0; i < report.objective_trace.size(); ++i) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i + 1, report.objective_trace[i], report.etf_trace[i],
                       report.alignment_trace[i]);
  }
  out.flush();
  if (!out) raise(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace lirlab::loss
