#include "lirlab/loss/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "lirlab/random.hpp"

namespace lirlab::loss {

BoundReport verify_bounds(const Batch& batch) {
  validate_batch(batch);
  const auto n = batch.size();
  BoundReport r;
  r.n = n;
  r.p = batch.queries.front().tokens();
  r.d = batch.queries.front().dim();
  r.tau = batch.tau;

  std::vector<Assignment> sigmas;
  sigmas.reserve(n);
  r.assumption_holds = true;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = argmax_assignment(batch.queries[i], batch.targets[i]);
    if (!a.bijective) {
      r.assumption_holds = false;
      a = max_weight_bijection(batch.queries[i], batch.targets[i]);
    }
    sigmas.push_back(std::move(a));
  }
  r.outside_hypothesis = !r.assumption_holds;

  const auto s = batch_scores(batch);
  r.loss_maxsim = infonce_from_scores(s, batch.tau);
  r.loss_standard = standard_infonce(batch, sigmas);
  r.gap = r.loss_standard - r.loss_maxsim;

  r.p1 = std::numeric_limits<double>::infinity();
  r.p2 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    r.p1 = std::min(r.p1, s.at(i, i));
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) r.p2 = std::max(r.p2, s.at(i, j));
    }
  }
  if (n == 1) r.p2 = r.p1;
  const double exponent = (r.p2 - r.p1) / batch.tau;
  r.bound = static_cast<double>(n - 1) * std::exp(exponent);
  r.log_bound = n == 1 ? -std::numeric_limits<double>::infinity() : std::log(static_cast<double>(n - 1)) + exponent;

  r.proposition_ok = r.loss_maxsim <= r.loss_standard + kBoundSlack;
  r.corollary_ok = r.gap <= r.bound + kBoundSlack;
  return r;
}

Batch make_permuted_batch(std::vector<TokenMatrix64> queries, double noise, double tau, std::uint64_t seed) {
  if (queries.empty()) raise(ErrorCode::InvalidArgument, "permuted batch needs N >= 1");
  SeededStream rng(derive_seed(seed, 0xB0B));
  Batch b;
  b.tau = tau;
  for (auto& q : queries) {
    const auto p = q.tokens();
    const auto d = q.dim();
    auto u = normalize_tokens(q);
    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = p; k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);
    std::vector<double> v(p * d);
    for (std::size_t t = 0; t < p; ++t) {
      const auto src = u.row(perm[t]);
      for (std::size_t k = 0; k < d; ++k) v[t * d + k] = src[k] + noise * rng.gaussian();
    }
    b.targets.push_back(normalize_tokens(TokenMatrix64(p, d, std::move(v))));
    b.queries.push_back(std::move(u));
  }
  return b;
}

Batch make_permuted_batch(std::size_t n, std::size_t p, std::size_t d, double noise, double tau,
                          std::uint64_t seed) {
  if (n == 0 || p == 0 || d == 0) raise(ErrorCode::InvalidArgument, "permuted batch needs positive N, p, d");
  SeededStream rng(derive_seed(seed, 0xA11CE));
  std::vector<TokenMatrix64> queries;
  queries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> u(p * d);
    for (auto& x : u) x = rng.gaussian();
    queries.push_back(normalize_tokens(TokenMatrix64(p, d, std::move(u))));
  }
  return make_permuted_batch(std::move(queries), noise, tau, seed);
}

namespace {
nlohmann::ordered_json number(double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nullptr; }
}  // namespace

std::string to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["p"] = r.p;
  j["d"] = r.d;
  j["tau"] = number(r.tau);
  j["loss_maxsim"] = number(r.loss_maxsim);
  j["loss_standard"] = number(r.loss_standard);
  j["gap"] = number(r.gap);
  j["p1"] = number(r.p1);
  j["p2"] = number(r.p2);
  j["bound"] = number(r.bound);
  j["log_bound"] = number(r.log_bound);
  j["assumption_holds"] = r.assumption_holds;
  j["outside_hypothesis"] = r.outside_hypothesis;
  j["proposition_ok"] = r.proposition_ok;
  j["corollary_ok"] = r.corollary_ok;
  return j.dump(2);
}

}  // namespace lirlab::loss
