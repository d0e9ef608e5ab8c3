#include "infoloc/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "infoloc/channels.hpp"
#include "infoloc/errors.hpp"
#include "infoloc/measures.hpp"
#include "infoloc/tolerances.hpp"
#include "infoloc/version.hpp"

namespace infoloc {

using nlohmann::json;

namespace {

void require_multiparty(const DensityOperator& rho) {
  if (rho.split().occupied_parties().size() < 2)
    throw ValidationError("bounds need a state shared by at least two parties");
}

double purity(const DensityOperator& rho) { return (rho.matrix() * rho.matrix()).trace().real(); }

}  // namespace

UpperBound localizable_upper_bound(const DensityOperator& rho) {
  require_multiparty(rho);
  UpperBound best;
  best.il_upper = std::numeric_limits<double>::infinity();
  for (const auto& party : rho.split().occupied_parties()) {
    const ComplexMatrix red = rho.reduced(party);
    const double lambda = hermitian_eigenvalues(red).front();
    const double bound = rho.num_bits() - min_entropy(red);
    if (bound < best.il_upper) best = {bound, party, lambda};
  }
  return best;
}

std::vector<LowerBoundEntry> localizable_lower_bounds(const DensityOperator& rho, const OptimizerConfig& config) {
  require_multiparty(rho);
  config.validate();
  const double s = von_neumann_entropy(rho);
  std::vector<LowerBoundEntry> out;
  for (int k = 1; k <= config.copies; ++k) {
    OptimizerConfig cfg = config;
    cfg.copies = k;
    LowerBoundEntry e;
    e.copies = k;
    if (k == 2 && !out.empty()) {
      const AdaptiveProductBasis warm[] = {tensor_square(out.front().search.basis)};
      e.search = minimize_h(rho, cfg, warm);
    } else {
      e.search = minimize_h(rho, cfg);
    }
    e.h_total = e.search.h;
    e.il_lower = rho.num_bits() - e.h_total / k;
    e.distance = std::max(0.0, e.h_total / k - s);
    out.push_back(std::move(e));
  }
  auto best = std::max_element(out.begin(), out.end(),
                               [](const auto& a, const auto& b) { return a.il_lower < b.il_lower; });
  best->best = true;
  return out;
}

bool is_pure_bipartite(const DensityOperator& rho) {
  return rho.split().occupied_parties().size() == 2 && std::abs(purity(rho) - 1.0) <= tol::pure;
}

PureStateExact pure_state_exact(const DensityOperator& psi) {
  const auto form = schmidt(psi);
  const double sa = form.entanglement_entropy();
  return {psi.num_bits() - sa, sa};
}

BoundsReport deficit_interval(const DensityOperator& rho, const OptimizerConfig& config) {
  BoundsReport r;
  r.n_bits = rho.num_bits();
  r.entropy = von_neumann_entropy(rho);
  r.information = r.n_bits - r.entropy;
  r.upper = localizable_upper_bound(rho);
  r.lower = localizable_lower_bounds(rho, config);
  for (const auto& e : r.lower) {
    if (e.best) {
      r.il_lower = e.il_lower;
      r.best_copies = e.copies;
      r.delta_conjectured = e.distance;
      r.delta_upper_ipb = e.distance;
    }
    if (e.copies == 1) r.monotone_m = r.n_bits - e.h_total;
  }
  r.delta_lower_min_entropy = r.information - r.upper.il_upper;  // S_inf(rho_X) - S
  r.delta_lower = std::max(0.0, r.delta_lower_min_entropy);
  r.delta_upper = std::max(0.0, r.information - r.il_lower);
  if (is_pure_bipartite(rho)) {
    const auto exact = pure_state_exact(rho);
    r.il_exact = exact.il;
    r.delta_lower = std::max(r.delta_lower, exact.delta);
    r.delta_upper = std::min(r.delta_upper, exact.delta);
  }
  return r;
}

std::vector<std::string> report_violations(const BoundsReport& r) {
  std::vector<std::string> bad;
  const double values[] = {r.information, r.upper.il_upper, r.il_lower, r.delta_lower, r.delta_upper,
                           r.delta_conjectured, r.monotone_m};
  if (!std::all_of(std::begin(values), std::end(values), [](double x) { return std::isfinite(x); }))
    bad.push_back("finite");
  if (r.il_lower > r.upper.il_upper + 1e-6) bad.push_back("il_lower<=il_upper");
  if (r.delta_lower > r.delta_upper + 1e-6) bad.push_back("delta_lower<=delta_upper");
  if (r.delta_lower < -1e-9 || r.delta_upper < -1e-9 || r.delta_conjectured < -1e-9) bad.push_back("delta>=0");
  return bad;
}

json report_to_json(const BoundsReport& r, const OptimizerConfig& config) {
  json lower = json::array();
  json diagnostics = json::array();
  for (const auto& e : r.lower) {
    lower.push_back(json{{"copies", e.copies},
                         {"il_lower", e.il_lower},
                         {"h_star", e.h_total},
                         {"distance_per_copy", e.distance},
                         {"best", e.best}});
    json trace = json::array();
    int converged = 0;
    for (const auto& t : e.search.trace) {
      converged += t.polish_converged ? 1 : 0;
      trace.push_back(json{{"restart", t.index},
                           {"seed", t.seed},
                           {"h_after_anneal", t.h_after_anneal},
                           {"h_final", t.h_final},
                           {"best_so_far", t.best_so_far},
                           {"polish_sweeps", t.polish_sweeps},
                           {"polish_converged", t.polish_converged}});
    }
    diagnostics.push_back(json{{"copies", e.copies},
                               {"best_restart", e.search.best_restart},
                               {"restarts_converged", converged},
                               {"best_basis", basis_to_json(e.search.basis)},
                               {"trace", trace}});
  }
  json out{{"N", r.n_bits},
           {"S", r.entropy},
           {"I", r.information},
           {"il_upper", r.upper.il_upper},
           {"il_upper_party", r.upper.party},
           {"il_upper_lambda_max", r.upper.lambda_max},
           {"il_lower", r.il_lower},
           {"il_lower_copies", r.best_copies},
           {"il_lower_by_copies", lower},
           {"il_exact", r.il_exact ? json(*r.il_exact) : json(nullptr)},
           {"delta_lower", r.delta_lower},
           {"delta_upper", r.delta_upper},
           {"delta_conjectured", r.delta_conjectured},
           {"delta_lower_min_entropy", r.delta_lower_min_entropy},
           {"delta_upper_ipb", r.delta_upper_ipb},
           {"M", r.monotone_m},
           {"tolerances",
            {{"optimizer", config.tolerance},
             {"interval_consistency", 1e-6},
             {"hermitian", tol::hermitian},
             {"unit_trace", tol::unit_trace},
             {"log_clamp", tol::log_clamp}}},
           {"config", config_to_json(config)},
           {"tool_version", kVersion},
           {"diagnostics", diagnostics}};
  return out;
}

FidelityCeiling rains_fidelity_ceiling(const DensityOperator& rho, const DistRateParams& params) {
  require_multiparty(rho);
  const double n_bits = rho.num_bits();
  if (!(params.rate >= 0.0 && params.rate <= n_bits + 1e-12)) {
    throw ValidationError("rate must lie in [0, N]", {{"rate", params.rate, "out of range"}});
  }
  if (params.n < 1) throw ValidationError("copies must be positive", {{"n", double(params.n), ""}});
  double lambda = 1.0;
  for (const auto& party : rho.split().occupied_parties())
    lambda = std::min(lambda, hermitian_eigenvalues(rho.reduced(party)).front());
  lambda = std::clamp(lambda, tol::log_clamp, 1.0);
  const double n = static_cast<double>(params.n);
  FidelityCeiling out;
  out.lambda_max = lambda;
  out.log2_ceiling = std::min(0.0, n * (n_bits - params.rate) + n * std::log2(lambda));
  out.ceiling = std::exp2(out.log2_ceiling);
  return out;
}

double monotone_m(const DensityOperator& rho, const OptimizerConfig& config,
                  std::span<const AdaptiveProductBasis> warm_starts) {
  OptimizerConfig cfg = config;
  cfg.copies = 1;
  return rho.num_bits() - minimize_h(rho, cfg, warm_starts).h;
}

// Monotonicity scan -----------------------------------------------------------

namespace {

// Basis for rho ⊗ (factor of dim d appended to party `level` of the chain):
// party `level` gets U ⊗ I_d, later parties ignore the new index.
AdaptiveProductBasis extend_basis(const AdaptiveProductBasis& b, int level, int d) {
  AdaptiveProductBasis out;
  out.parties = b.parties;
  out.party_dims = b.party_dims;
  out.party_dims[level] *= d;
  const int m = static_cast<int>(b.party_dims.size());
  for (int l = 0; l < m; ++l) {
    int count = 1;
    for (int q = 0; q < l; ++q) count *= out.party_dims[q];
    std::vector<ComplexMatrix> lvl;
    for (int node = 0; node < count; ++node) {
      // decode prefix digits in the new dims, map digit `level` back to the old one
      int rem = node;
      std::vector<int> digits(l);
      for (int q = l - 1; q >= 0; --q) {
        digits[q] = rem % out.party_dims[q];
        rem /= out.party_dims[q];
      }
      int old = 0;
      for (int q = 0; q < l; ++q) {
        const int digit = q == level ? digits[q] / d : digits[q];
        old = old * b.party_dims[q] + digit;
      }
      const ComplexMatrix& u = b.levels[l][old];
      lvl.push_back(l == level ? tensor(u, ComplexMatrix::identity(d)) : u);
    }
    out.levels.push_back(std::move(lvl));
  }
  return out;
}

int chain_position(const DensityOperator& rho, const std::string& party) {
  const auto chain = group_by_party(rho).split().occupied_parties();
  return static_cast<int>(std::find(chain.begin(), chain.end(), party) - chain.begin());
}

struct Searched {
  double h;
  AdaptiveProductBasis basis;
};

Searched search(const DensityOperator& rho, const OptimizerConfig& cfg, std::span<const AdaptiveProductBasis> warm = {}) {
  auto r = minimize_h(rho, cfg, warm);
  return {r.h, std::move(r.basis)};
}

Searched polish_only(const DensityOperator& rho, const OptimizerConfig& cfg, const AdaptiveProductBasis& warm) {
  OptimizerConfig c = cfg;
  c.restarts = 0;
  auto r = minimize_h(rho, c, std::span<const AdaptiveProductBasis>(&warm, 1));
  return {r.h, std::move(r.basis)};
}

ScanTrial run_trial(const ScanConfig& config, int trial) {
  ScanTrial t;
  t.trial = trial;
  t.seed = config.seed * 1000003ULL + static_cast<std::uint64_t>(trial);
  std::mt19937_64 rng(t.seed);
  OptimizerConfig cfg = config.optimizer;
  cfg.copies = 1;
  cfg.seed = rng();

  auto random_state = [&](std::vector<std::string> assignment) {
    std::vector<int> dims(assignment.size(), 2);
    const int dim = 1 << assignment.size();
    const int rank = 1 + static_cast<int>(rng() % dim);
    return validate(random_density(dim, rank, rng()), PartySplit::from_assignment(std::move(assignment), dims));
  };
  auto pick_party = [&]() { return std::string(rng() % 2 == 0 ? "A" : "B"); };

  switch (trial % 4) {
    case 0: {
      t.kind = "local_unitary";
      const auto rho = (trial / 4) % 2 == 0 ? random_state({"A", "B"}) : random_state({"A", "B", "B"});
      const std::string party = pick_party();
      const ComplexMatrix u = random_unitary(rho.split().party_dim(party), rng());
      const auto after = apply_step(rho, ApplyLocalUnitary{party, u});

      const auto chain = group_by_party(rho).split().occupied_parties();
      std::vector<ComplexMatrix> forward, backward;
      for (const auto& p : chain) {
        const int d = rho.split().party_dim(p);
        forward.push_back(p == party ? u : ComplexMatrix::identity(d));
        backward.push_back(p == party ? u.adjoint() : ComplexMatrix::identity(d));
      }
      auto before_s = search(rho, cfg);
      const AdaptiveProductBasis seeded = before_s.basis.conjugated(forward);
      auto after_s = search(after, cfg, std::span<const AdaptiveProductBasis>(&seeded, 1));
      // exchange the better basis across until both sides agree
      for (int round = 0; round < 4 && std::abs(after_s.h - before_s.h) > config.tolerance / 4; ++round) {
        if (after_s.h < before_s.h) {
          auto r = polish_only(rho, cfg, after_s.basis.conjugated(backward));
          if (r.h < before_s.h) before_s = std::move(r);
        } else {
          auto r = polish_only(after, cfg, before_s.basis.conjugated(forward));
          if (r.h < after_s.h) after_s = std::move(r);
        }
      }
      t.m_before = rho.num_bits() - before_s.h;
      t.m_after = after.num_bits() - after_s.h;
      break;
    }
    case 1: {
      t.kind = "partial_trace";
      const bool bob_pair = (trial / 4) % 2 == 0;
      const auto rho = bob_pair ? random_state({"A", "B", "B"}) : random_state({"A", "A", "B"});
      const std::string party = bob_pair ? "B" : "A";
      const int factor = bob_pair ? 2 : 1;
      const auto after = apply_step(rho, TraceOut{party, factor});
      const auto after_s = search(after, cfg);
      const AdaptiveProductBasis seeded = extend_basis(after_s.basis, chain_position(rho, party), 2);
      const auto before_s = search(rho, cfg, std::span<const AdaptiveProductBasis>(&seeded, 1));
      t.m_before = rho.num_bits() - before_s.h;
      t.m_after = after.num_bits() - after_s.h;
      break;
    }
    case 2: {
      t.kind = "local_dephasing";
      const auto rho = random_state({"A", "B"});
      const std::string party = pick_party();
      const ComplexMatrix basis = random_unitary(2, rng());
      const auto after = apply_step(rho, DephaseLocal{party, rho.split().factors_of(party), basis});
      const auto before_s = search(rho, cfg);
      const auto after_s = search(after, cfg, std::span<const AdaptiveProductBasis>(&before_s.basis, 1));
      const auto before_r = polish_only(rho, cfg, after_s.basis);
      t.m_before = rho.num_bits() - std::min(before_s.h, before_r.h);
      t.m_after = after.num_bits() - after_s.h;
      break;
    }
    default: {
      t.kind = "noise";
      const auto rho = random_state({"A", "B"});
      const std::string party = pick_party();
      const auto after = apply_step(rho, AddMaxMixedAncilla{party, 2});
      const auto before_s = search(rho, cfg);
      const AdaptiveProductBasis seeded = extend_basis(before_s.basis, chain_position(rho, party), 2);
      const auto after_s = search(after, cfg, std::span<const AdaptiveProductBasis>(&seeded, 1));
      t.m_before = rho.num_bits() - before_s.h;
      t.m_after = after.num_bits() - after_s.h;
      break;
    }
  }
  t.delta_m = t.m_after - t.m_before;
  return t;
}

}  // namespace

ScanTrial replay_scan_trial(const ScanConfig& config, int trial) { return run_trial(config, trial); }

ScanReport monotonicity_scan(const ScanConfig& config) {
  if (config.trials < 0) throw ValidationError("trials must be non-negative");
  std::vector<ScanTrial> results(config.trials);
  int workers = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(1, config.trials));
  if (workers == 1) {
    for (int i = 0; i < config.trials; ++i) results[i] = run_trial(config, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < config.trials; i = next++) results[i] = run_trial(config, i);
      });
  }

  ScanReport report;
  report.trials = config.trials;
  const std::string kinds[] = {"local_unitary", "partial_trace", "local_dephasing", "noise"};
  for (const auto& k : kinds) {
    report.trials_by_kind.emplace_back(k, 0);
    report.max_delta_by_kind.emplace_back(k, -std::numeric_limits<double>::infinity());
  }
  for (const auto& t : results) {
    const auto idx = std::find(std::begin(kinds), std::end(kinds), t.kind) - std::begin(kinds);
    report.trials_by_kind[idx].second += 1;
    auto& worst = report.max_delta_by_kind[idx].second;
    if (t.kind == "local_unitary") {
      worst = std::max(worst, std::abs(t.delta_m));
      if (std::abs(t.delta_m) > config.tolerance) report.violations.push_back(t);
    } else if (t.kind == "partial_trace") {
      worst = std::max(worst, t.delta_m);
      if (t.delta_m > config.tolerance) report.violations.push_back(t);
    } else {
      worst = std::max(worst, t.delta_m);
      if (t.delta_m > config.tolerance) report.candidates.push_back(t);
    }
  }
  return report;
}

json scan_report_to_json(const ScanReport& report, const ScanConfig& config) {
  auto trials_json = [](const std::vector<ScanTrial>& ts) {
    json arr = json::array();
    for (const auto& t : ts)
      arr.push_back(json{{"trial", t.trial},
                         {"seed", t.seed},
                         {"kind", t.kind},
                         {"M_before", t.m_before},
                         {"M_after", t.m_after},
                         {"delta_M", t.delta_m}});
    return arr;
  };
  json by_kind = json::object();
  for (std::size_t i = 0; i < report.trials_by_kind.size(); ++i) {
    const double worst = report.max_delta_by_kind[i].second;
    by_kind[report.trials_by_kind[i].first] = json{
        {"trials", report.trials_by_kind[i].second},
        {"max_delta_M", std::isfinite(worst) ? json(worst) : json(nullptr)},
        {"asserted", i < 2}};
  }
  return json{{"trials", report.trials},
              {"seed", config.seed},
              {"tolerance", config.tolerance},
              {"by_kind", by_kind},
              {"violations", trials_json(report.violations)},
              {"candidate_counterexamples", trials_json(report.candidates)},
              {"optimizer", config_to_json(config.optimizer)},
              {"tool_version", kVersion}};
}

}  // namespace infoloc
