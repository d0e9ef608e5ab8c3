#include "infoloc/ipbopt.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "infoloc/errors.hpp"
#include "infoloc/measures.hpp"
#include "infoloc/tolerances.hpp"

namespace infoloc {

using nlohmann::json;

namespace {

int nodes_at_level(std::span<const int> dims, int level) {
  int n = 1;
  for (int q = 0; q < level; ++q) n *= dims[q];
  return n;
}

}  // namespace

AdaptiveProductBasis AdaptiveProductBasis::standard(std::vector<std::string> parties, std::vector<int> party_dims) {
  AdaptiveProductBasis b;
  b.parties = std::move(parties);
  b.party_dims = std::move(party_dims);
  for (std::size_t l = 0; l < b.party_dims.size(); ++l) {
    const int count = nodes_at_level(b.party_dims, static_cast<int>(l));
    b.levels.emplace_back(count, ComplexMatrix::identity(b.party_dims[l]));
  }
  return b;
}

void AdaptiveProductBasis::validate(double tol) const {
  if (party_dims.empty()) throw ValidationError("adaptive basis has no parties");
  if (parties.size() != party_dims.size()) throw ValidationError("adaptive basis: party labels and dims differ in length");
  if (levels.size() != party_dims.size()) throw ValidationError("adaptive basis: one level per party required");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const int count = nodes_at_level(party_dims, static_cast<int>(l));
    if (static_cast<int>(levels[l].size()) != count) {
      throw ValidationError("adaptive basis: level " + std::to_string(l) + " needs " + std::to_string(count) +
                            " unitaries");
    }
    for (const auto& u : levels[l]) {
      if (u.dim() != party_dims[l]) throw ValidationError("adaptive basis: unitary dimension mismatch");
      require_unitary(u, tol, "adaptive basis unitary");
    }
  }
}

AdaptiveProductBasis AdaptiveProductBasis::conjugated(std::span<const ComplexMatrix> local_unitaries) const {
  if (local_unitaries.size() != levels.size()) throw DimensionError("conjugated: one unitary per party required");
  AdaptiveProductBasis out = *this;
  for (std::size_t l = 0; l < levels.size(); ++l)
    for (auto& u : out.levels[l]) u = local_unitaries[l] * u;
  return out;
}

AdaptiveProductBasis tensor_square(const AdaptiveProductBasis& basis) {
  AdaptiveProductBasis out;
  out.parties = basis.parties;
  for (int d : basis.party_dims) out.party_dims.push_back(d * d);
  for (std::size_t l = 0; l < basis.levels.size(); ++l) {
    // prefix over composite indices c_p = a_p * d_p + b_p, row-major
    std::size_t count = 1;
    for (std::size_t p = 0; p < l; ++p) count *= static_cast<std::size_t>(out.party_dims[p]);
    std::vector<ComplexMatrix> level;
    level.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      std::size_t rest = t, first = 0, second = 0, stride = 1;
      for (std::size_t p = l; p-- > 0;) {
        const auto d = static_cast<std::size_t>(basis.party_dims[p]);
        const std::size_t c = rest % (d * d);
        rest /= d * d;
        first += (c / d) * stride;
        second += (c % d) * stride;
        stride *= d;
      }
      level.push_back(tensor(basis.levels[l][first], basis.levels[l][second]));
    }
    out.levels.push_back(std::move(level));
  }
  return out;
}

ComplexMatrix basis_vectors(const AdaptiveProductBasis& basis) {
  basis.validate(1e-8);
  const int m = static_cast<int>(basis.party_dims.size());
  // vectors[n] for prefix n at the current level
  std::vector<ComplexVector> current{ComplexVector{1.0}};
  for (int l = 0; l < m; ++l) {
    std::vector<ComplexVector> next;
    next.reserve(current.size() * basis.party_dims[l]);
    for (std::size_t n = 0; n < current.size(); ++n) {
      const auto& u = basis.levels[l][n];
      for (int i = 0; i < basis.party_dims[l]; ++i) next.push_back(tensor(current[n], u.column(i)));
    }
    current = std::move(next);
  }
  ComplexMatrix out(basis.total_dim());
  for (std::size_t c = 0; c < current.size(); ++c) out.set_column(static_cast<int>(c), current[c]);
  return out;
}

namespace {

struct Chain {
  DensityOperator grouped;
  std::vector<std::string> parties;
  std::vector<int> dims;
};

Chain make_chain(const DensityOperator& rho) {
  DensityOperator grouped = group_by_party(rho);
  Chain c{grouped, grouped.split().occupied_parties(), {}};
  for (const auto& p : c.parties) c.dims.push_back(grouped.split().party_dim(p));
  return c;
}

// Conditional reduced operators along the chain. R[l][n] is the operator on
// parties l.. given the prefix n of earlier basis indices; leaves are the
// basis probabilities. Changing one unitary only recomputes its subtree.
class ChainEvaluator {
 public:
  ChainEvaluator(const ComplexMatrix& rho, std::vector<int> dims) : dims_(std::move(dims)) {
    const int m = static_cast<int>(dims_.size());
    rest_.assign(m + 1, 1);
    for (int l = m - 1; l >= 0; --l) rest_[l] = rest_[l + 1] * dims_[l];
    ops_.resize(m);
    units_.resize(m);
    for (int l = 0; l < m; ++l) {
      const int count = nodes_at_level(dims_, l);
      ops_[l].assign(count, ComplexMatrix(rest_[l]));
      units_[l].assign(count, ComplexMatrix::identity(dims_[l]));
    }
    ops_[0][0] = rho;
    probs_.assign(rest_[0], 0.0);
    recompute(0, 0);
  }

  int levels() const { return static_cast<int>(dims_.size()); }
  int nodes(int level) const { return static_cast<int>(units_[level].size()); }
  int dim(int level) const { return dims_[level]; }
  const ComplexMatrix& unitary(int level, int node) const { return units_[level][node]; }
  double entropy() const { return shannon_entropy(probs_); }

  void set_unitary(int level, int node, ComplexMatrix u) {
    units_[level][node] = std::move(u);
    recompute(level, node);
  }

  // Saved copy of everything below (level, node).
  struct Snapshot {
    int level = 0;
    int node = 0;
    ComplexMatrix unitary;
    std::vector<std::vector<ComplexMatrix>> ops;
    std::vector<double> probs;
  };

  Snapshot save(int level, int node) const {
    Snapshot s{level, node, units_[level][node], {}, {}};
    int span = 1;
    for (int l = level + 1; l <= levels(); ++l) {
      span *= dims_[l - 1];
      const auto first = static_cast<std::size_t>(node) * span;
      if (l < levels()) {
        s.ops.emplace_back(ops_[l].begin() + first, ops_[l].begin() + first + span);
      } else {
        s.probs.assign(probs_.begin() + first, probs_.begin() + first + span);
      }
    }
    return s;
  }

  void restore(Snapshot&& s) {
    units_[s.level][s.node] = std::move(s.unitary);
    int span = 1;
    for (int l = s.level + 1; l <= levels(); ++l) {
      span *= dims_[l - 1];
      const auto first = static_cast<std::size_t>(s.node) * span;
      if (l < levels()) {
        std::move(s.ops[l - s.level - 1].begin(), s.ops[l - s.level - 1].end(), ops_[l].begin() + first);
      } else {
        std::copy(s.probs.begin(), s.probs.end(), probs_.begin() + first);
      }
    }
  }

 private:
  void recompute(int level, int node) {
    const int d = dims_[level];
    const int r = rest_[level + 1];
    const ComplexMatrix& op = ops_[level][node];
    const ComplexMatrix& u = units_[level][node];
    const bool leaf = level + 1 == levels();
    // w = op (U ⊗ I) restricted to the columns we need
    const int big = d * r;
    std::vector<Complex> w(static_cast<std::size_t>(big) * big);
    for (int row = 0; row < big; ++row)
      for (int i = 0; i < d; ++i)
        for (int b = 0; b < r; ++b) {
          Complex acc = 0.0;
          for (int y = 0; y < d; ++y) acc += op(row, y * r + b) * u(y, i);
          w[static_cast<std::size_t>(row) * big + i * r + b] = acc;
        }
    for (int i = 0; i < d; ++i) {
      const int child = node * d + i;
      if (leaf) {
        Complex acc = 0.0;
        for (int x = 0; x < d; ++x) acc += std::conj(u(x, i)) * w[static_cast<std::size_t>(x) * big + i];
        probs_[child] = acc.real();
        continue;
      }
      ComplexMatrix& blk = ops_[level + 1][child];
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
          Complex acc = 0.0;
          for (int x = 0; x < d; ++x) acc += std::conj(u(x, i)) * w[static_cast<std::size_t>(x * r + a) * big + i * r + b];
          blk(a, b) = acc;
        }
      recompute(level + 1, child);
    }
  }

  std::vector<int> dims_;
  std::vector<int> rest_;
  std::vector<std::vector<ComplexMatrix>> ops_;
  std::vector<std::vector<ComplexMatrix>> units_;
  std::vector<double> probs_;
};

// Each node's unitary is base * exp(i H(params)); random restarts draw a Haar
// base with zero generator, warm starts use the given unitary as base.
struct ParamState {
  std::vector<std::vector<ComplexMatrix>> base;
  std::vector<std::vector<std::vector<double>>> params;
  // flat index -> (level, node, component)
  std::vector<std::array<int, 3>> index;
};

ParamState make_params(std::span<const int> dims, std::vector<std::vector<ComplexMatrix>> base) {
  ParamState s;
  s.base = std::move(base);
  s.params.resize(dims.size());
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const int d = dims[l];
    s.params[l].assign(s.base[l].size(), std::vector<double>(static_cast<std::size_t>(d) * d, 0.0));
    for (std::size_t n = 0; n < s.base[l].size(); ++n)
      for (int k = 0; k < d * d; ++k) s.index.push_back({static_cast<int>(l), static_cast<int>(n), k});
  }
  return s;
}

ComplexMatrix node_unitary(const ParamState& s, int level, int node) {
  const auto& p = s.params[level][node];
  const int d = s.base[level][node].dim();
  bool zero = std::all_of(p.begin(), p.end(), [](double x) { return x == 0.0; });
  if (zero) return s.base[level][node];
  return s.base[level][node] * expi_hermitian(hermitian_from_params(d, p));
}

void load_all(const ParamState& s, ChainEvaluator& eval) {
  // set deepest levels first so the final top-level recompute is the only full pass
  for (int l = eval.levels() - 1; l >= 0; --l)
    for (int n = 0; n < eval.nodes(l); ++n) eval.set_unitary(l, n, node_unitary(s, l, n));
}

struct RestartOutcome {
  RestartTrace trace;
  std::vector<std::vector<ComplexMatrix>> unitaries;
};

RestartOutcome run_restart(const ComplexMatrix& rho, const std::vector<int>& dims, const OptimizerConfig& cfg,
                           int index, const AdaptiveProductBasis* warm) {
  RestartOutcome out;
  out.trace.index = index;
  out.trace.seed = cfg.seed + static_cast<std::uint64_t>(index);
  out.trace.warm_start = warm != nullptr;
  std::mt19937_64 rng(out.trace.seed);

  std::vector<std::vector<ComplexMatrix>> base;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const int count = nodes_at_level(dims, static_cast<int>(l));
    std::vector<ComplexMatrix> lvl;
    for (int n = 0; n < count; ++n) lvl.push_back(warm ? warm->levels[l][n] : random_unitary(dims[l], rng()));
    base.push_back(std::move(lvl));
  }
  ParamState state = make_params(dims, std::move(base));
  ChainEvaluator eval(rho, dims);
  load_all(state, eval);
  double h = eval.entropy();

  const int nparams = static_cast<int>(state.index.size());
  std::uniform_int_distribution<int> pick(0, nparams - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto try_change = [&](int j, double delta) {
    const auto [l, n, k] = state.index[j];
    auto snap = eval.save(l, n);
    state.params[l][n][k] += delta;
    eval.set_unitary(l, n, node_unitary(state, l, n));
    return std::pair{eval.entropy(), std::move(snap)};
  };
  auto undo = [&](int j, double delta, ChainEvaluator::Snapshot&& snap) {
    const auto [l, n, k] = state.index[j];
    state.params[l][n][k] -= delta;
    eval.restore(std::move(snap));
  };

  if (!warm) {
    double temperature = cfg.initial_temperature;
    auto best_params = state.params;
    double best = h;
    for (int step = 0; step < cfg.anneal_steps; ++step) {
      if (step > 0 && step % cfg.cooling_interval == 0) temperature *= cfg.cooling_factor;
      const int j = pick(rng);
      const double delta = gauss(rng) * cfg.step_size * std::sqrt(temperature / cfg.initial_temperature);
      auto [h_new, snap] = try_change(j, delta);
      const double u = unif(rng);
      if (h_new <= h || u < std::exp(-(h_new - h) / temperature)) {
        h = h_new;
        if (h < best) {
          best = h;
          best_params = state.params;
        }
      } else {
        undo(j, delta, std::move(snap));
      }
    }
    state.params = std::move(best_params);
    load_all(state, eval);
    h = eval.entropy();
  }
  out.trace.h_after_anneal = h;

  std::vector<double> steps(nparams, cfg.step_size * 0.1);
  int sweep = 0;
  bool converged = false;
  for (; sweep < cfg.polish_sweeps; ++sweep) {
    if (*std::max_element(steps.begin(), steps.end()) < cfg.tolerance) {
      converged = true;
      break;
    }
    // re-centre: coordinates are then tangent directions at the current point
    for (int l = 0; l < eval.levels(); ++l)
      for (int n = 0; n < eval.nodes(l); ++n) {
        state.base[l][n] = eval.unitary(l, n);
        std::fill(state.params[l][n].begin(), state.params[l][n].end(), 0.0);
      }
    for (int j = 0; j < nparams; ++j) {
      if (steps[j] < cfg.tolerance * 1e-3) continue;
      bool improved = false;
      for (double sign : {1.0, -1.0}) {
        const double delta = sign * steps[j];
        auto [h_new, snap] = try_change(j, delta);
        if (h_new < h) {
          // parabola through 0, delta, 2*delta; jump to its vertex when that is lower
          const double h0 = h;
          h = h_new;
          improved = true;
          auto [h_far, snap_far] = try_change(j, delta);
          const double curv = h_far - 2.0 * h_new + h0;
          if (h_far < h) {
            h = h_far;
          } else {
            undo(j, delta, std::move(snap_far));
          }
          if (curv > 0.0) {
            const double vertex = delta * (1.0 - (h_far - h0) / (2.0 * curv));  // offset from 0
            const double here = (h == h_far) ? 2.0 * delta : delta;
            const double move = vertex - here;
            if (std::abs(move) > 1e-15) {
              auto [h_v, snap_v] = try_change(j, move);
              if (h_v < h) {
                h = h_v;
              } else {
                undo(j, move, std::move(snap_v));
              }
            }
          }
          break;
        }
        undo(j, delta, std::move(snap));
      }
      steps[j] *= improved ? 1.5 : 0.5;
    }
    // pattern move along the net displacement of this sweep
    const auto moved = state.params;
    for (double factor = 2.0; factor <= 64.0; factor *= 2.0) {
      for (std::size_t l = 0; l < moved.size(); ++l)
        for (std::size_t n = 0; n < moved[l].size(); ++n)
          for (std::size_t k = 0; k < moved[l][n].size(); ++k) state.params[l][n][k] = factor * moved[l][n][k];
      load_all(state, eval);
      const double h_new = eval.entropy();
      if (!(h_new < h)) {
        for (std::size_t l = 0; l < moved.size(); ++l)
          for (std::size_t n = 0; n < moved[l].size(); ++n)
            for (std::size_t k = 0; k < moved[l][n].size(); ++k) state.params[l][n][k] = factor / 2.0 * moved[l][n][k];
        load_all(state, eval);
        h = eval.entropy();
        break;
      }
      h = h_new;
    }
  }
  if (!converged && *std::max_element(steps.begin(), steps.end()) < cfg.tolerance) converged = true;
  out.trace.polish_sweeps = sweep;
  out.trace.polish_converged = converged;
  out.trace.h_final = h;
  for (int l = 0; l < eval.levels(); ++l) {
    std::vector<ComplexMatrix> lvl;
    for (int n = 0; n < eval.nodes(l); ++n) lvl.push_back(eval.unitary(l, n));
    out.unitaries.push_back(std::move(lvl));
  }
  return out;
}

}  // namespace

double h_over_ipb(const DensityOperator& rho, const AdaptiveProductBasis& basis) {
  const Chain chain = make_chain(rho);
  if (chain.dims != basis.party_dims)
    throw DimensionError("adaptive basis party dimensions do not match the state");
  return shannon_entropy_in_basis(chain.grouped.matrix(), basis_vectors(basis));
}

void OptimizerConfig::validate() const {
  std::vector<Violation> bad;
  if (copies != 1 && copies != 2) bad.push_back({"copies", double(copies), "must be 1 or 2"});
  if (restarts < 0) bad.push_back({"restarts", double(restarts), "must be non-negative"});
  if (!(initial_temperature > 0)) bad.push_back({"initial_temperature", initial_temperature, "must be positive"});
  if (!(cooling_factor > 0 && cooling_factor <= 1)) bad.push_back({"cooling_factor", cooling_factor, "must be in (0,1]"});
  if (cooling_interval < 1) bad.push_back({"cooling_interval", double(cooling_interval), "must be positive"});
  if (anneal_steps < 0) bad.push_back({"anneal_steps", double(anneal_steps), "must be non-negative"});
  if (polish_sweeps < 0) bad.push_back({"polish_sweeps", double(polish_sweeps), "must be non-negative"});
  if (!(step_size > 0)) bad.push_back({"step_size", step_size, "must be positive"});
  if (!(tolerance > 0)) bad.push_back({"tolerance", tolerance, "must be positive"});
  if (threads < 0) bad.push_back({"threads", double(threads), "must be non-negative"});
  if (!bad.empty()) {
    std::string msg = "invalid optimizer config:";
    for (const auto& v : bad) msg += " " + v.check;
    throw ValidationError(msg, std::move(bad));
  }
}

json config_to_json(const OptimizerConfig& c) {
  return json{{"copies", c.copies},
              {"restarts", c.restarts},
              {"initial_temperature", c.initial_temperature},
              {"cooling_factor", c.cooling_factor},
              {"cooling_interval", c.cooling_interval},
              {"anneal_steps", c.anneal_steps},
              {"polish_sweeps", c.polish_sweeps},
              {"step_size", c.step_size},
              {"seed", c.seed},
              {"tolerance", c.tolerance}};
}

OptimizerConfig config_from_json(const json& doc, OptimizerConfig c) {
  if (!doc.is_object()) throw ParseError("optimizer config must be an object");
  try {
    c.copies = doc.value("copies", c.copies);
    c.restarts = doc.value("restarts", c.restarts);
    c.initial_temperature = doc.value("initial_temperature", c.initial_temperature);
    c.cooling_factor = doc.value("cooling_factor", c.cooling_factor);
    c.cooling_interval = doc.value("cooling_interval", c.cooling_interval);
    c.anneal_steps = doc.value("anneal_steps", c.anneal_steps);
    c.polish_sweeps = doc.value("polish_sweeps", c.polish_sweeps);
    c.step_size = doc.value("step_size", c.step_size);
    c.seed = doc.value("seed", c.seed);
    c.tolerance = doc.value("tolerance", c.tolerance);
    c.threads = doc.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw ParseError(std::string("optimizer config: ") + e.what());
  }
  return c;
}

MinimizeResult minimize_h(const DensityOperator& rho, const OptimizerConfig& config,
                          std::span<const AdaptiveProductBasis> warm_starts) {
  config.validate();
  const double total = std::pow(static_cast<double>(rho.dim()), config.copies);
  if (total > tol::optimizer_dim_cap) {
    throw CapacityError("optimizer dimension cap exceeded: " + std::to_string(static_cast<long long>(total)) + " > " +
                        std::to_string(tol::optimizer_dim_cap));
  }
  const Chain chain = make_chain(tensor_power_grouped(rho, config.copies));
  for (const auto& w : warm_starts) {
    if (w.party_dims != chain.dims) throw DimensionError("warm start basis does not match the state's party chain");
    w.validate(1e-8);
  }

  const int jobs = config.restarts + static_cast<int>(warm_starts.size());
  if (jobs == 0) throw ValidationError("optimizer needs at least one restart or warm start");
  std::vector<RestartOutcome> outcomes(jobs);
  auto job = [&](int index) {
    const AdaptiveProductBasis* warm = index < config.restarts ? nullptr : &warm_starts[index - config.restarts];
    outcomes[index] = run_restart(chain.grouped.matrix(), chain.dims, config, index, warm);
  };
  int workers = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, jobs);
  if (workers == 1) {
    for (int i = 0; i < jobs; ++i) job(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < jobs; i = next++) job(i);
      });
  }

  MinimizeResult result;
  result.copies = config.copies;
  result.h = std::numeric_limits<double>::infinity();
  for (int i = 0; i < jobs; ++i) {
    auto& o = outcomes[i];
    if (o.trace.h_final < result.h) {
      result.h = o.trace.h_final;
      result.best_restart = i;
    }
    o.trace.best_so_far = result.h;
    result.trace.push_back(o.trace);
  }
  result.basis.parties = chain.parties;
  result.basis.party_dims = chain.dims;
  result.basis.levels = std::move(outcomes[result.best_restart].unitaries);
  return result;
}

DistanceResult relative_entropy_distance(const DensityOperator& rho, const OptimizerConfig& config) {
  DistanceResult out;
  if (config.copies == 2) {
    OptimizerConfig single = config;
    single.copies = 1;
    const AdaptiveProductBasis warm[] = {tensor_square(minimize_h(rho, single).basis)};
    out.search = minimize_h(rho, config, warm);
  } else {
    out.search = minimize_h(rho, config);
  }
  out.entropy = von_neumann_entropy(rho);
  out.h_per_copy = out.search.h / config.copies;
  out.distance = std::max(0.0, out.h_per_copy - out.entropy);
  return out;
}

std::string to_string(IpbVerdict v) {
  switch (v) {
    case IpbVerdict::yes:
      return "yes";
    case IpbVerdict::no:
      return "no";
    case IpbVerdict::undecided:
      return "undecided";
  }
  return "undecided";
}

namespace {

struct Factored {
  ComplexVector head;  // first-party vector
  ComplexVector tail;  // remainder
  double second = 0.0;
};

Factored factor_first(const ComplexVector& v, int d, int r) {
  Factored f;
  ComplexMatrix red(d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      Complex acc = 0.0;
      for (int j = 0; j < r; ++j) acc += v[i * r + j] * std::conj(v[k * r + j]);
      red(i, k) = acc;
    }
  const auto eig = hermitian_eig(red);
  f.second = d > 1 && r > 1 ? std::sqrt(std::max(eig.eigenvalues[1], 0.0)) : 0.0;
  f.head = eig.eigenvectors.column(0);
  f.tail.assign(r, 0.0);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < d; ++i) f.tail[j] += std::conj(f.head[i]) * v[i * r + j];
  return f;
}

struct PatternFailure {
  std::string reason;
  double value = 0.0;
};

// Recursively reads an adaptive product basis off a set of orthonormal vectors.
// Fills levels[l] from position `node` onward; returns a failure description if
// the vectors are not of the adaptive form.
std::optional<PatternFailure> read_chain(const std::vector<ComplexVector>& vecs, std::span<const int> dims, int level,
                                         int node, double tol, std::vector<std::vector<ComplexMatrix>>& levels) {
  const int d = dims[level];
  int r = 1;
  for (std::size_t q = level + 1; q < dims.size(); ++q) r *= dims[q];

  std::vector<ComplexVector> heads;
  std::vector<std::vector<ComplexVector>> groups;
  for (const auto& v : vecs) {
    auto f = factor_first(v, d, r);
    // squared weight: the coefficient itself carries sqrt(rounding) noise
    const double weight = f.second * f.second;
    if (weight > tol) return PatternFailure{"entangled basis vector (second Schmidt weight)", weight};
    bool placed = false;
    for (std::size_t g = 0; g < heads.size(); ++g) {
      const Complex ov = inner(heads[g], f.head);
      const double mag = std::abs(ov);
      if (mag >= 1.0 - tol) {
        const Complex phase = ov / mag;  // head = phase * heads[g]
        for (auto& x : f.tail) x *= phase;
        groups[g].push_back(std::move(f.tail));
        placed = true;
        break;
      }
      if (mag > tol) return PatternFailure{"first-party vectors neither equal nor orthogonal", mag};
    }
    if (!placed) {
      heads.push_back(std::move(f.head));
      groups.push_back({std::move(f.tail)});
    }
  }
  if (static_cast<int>(heads.size()) != d) {
    return PatternFailure{"party " + std::to_string(level) + " uses " + std::to_string(heads.size()) +
                              " distinct local vectors instead of " + std::to_string(d),
                          double(heads.size())};
  }
  ComplexMatrix u(d);
  for (int i = 0; i < d; ++i) u.set_column(i, heads[i]);
  levels[level][node] = u;
  if (level + 1 == static_cast<int>(dims.size())) return std::nullopt;
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(groups[i].size()) != r) {
      return PatternFailure{"conditional block of party " + std::to_string(level + 1) + " has wrong size",
                            double(groups[i].size())};
    }
    if (auto fail = read_chain(groups[i], dims, level + 1, node * d + i, tol, levels)) return fail;
  }
  return std::nullopt;
}

}  // namespace

IpbStateResult is_ipb_state(const DensityOperator& sigma, double tol) {
  const Chain chain = make_chain(sigma);
  const auto eig = hermitian_eig(chain.grouped.matrix());
  const int dim = sigma.dim();

  // cluster sizes of (near-)degenerate eigenvalues
  std::vector<int> cluster_size(dim, 1);
  double min_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < dim; ++k) min_gap = std::min(min_gap, eig.eigenvalues[k] - eig.eigenvalues[k + 1]);
  {
    int start = 0;
    for (int k = 1; k <= dim; ++k) {
      if (k == dim || eig.eigenvalues[k - 1] - eig.eigenvalues[k] >= tol::degenerate_gap) {
        for (int j = start; j < k; ++j) cluster_size[j] = k - start;
        start = k;
      }
    }
  }

  // one eigenspace: every basis diagonalizes sigma, so the computed one says nothing
  if (dim > 1 && cluster_size[0] == dim)
    return {IpbVerdict::undecided, "fully degenerate spectrum; eigenbasis is arbitrary", min_gap, std::nullopt};

  std::vector<ComplexVector> vecs;
  for (int k = 0; k < dim; ++k) vecs.push_back(eig.eigenvectors.column(k));

  // a nondegenerate eigenvector is unique up to phase: if it is entangled across
  // any cut of the chain the answer is a definite no
  {
    int r = dim;
    for (std::size_t l = 0; l + 1 < chain.dims.size(); ++l) {
      r /= chain.dims[l];
      for (int k = 0; k < dim; ++k) {
        if (cluster_size[k] != 1) continue;
        // Schmidt across (parties 0..l | rest) of the full vector
        const auto coeffs = schmidt_coefficients(vecs[k], dim / r, r);
        const double weight = coeffs.size() > 1 ? coeffs[1] * coeffs[1] : 0.0;
        if (weight > tol) {
          std::ostringstream msg;
          msg << "nondegenerate eigenvector " << k << " (eigenvalue " << eig.eigenvalues[k]
              << ") is entangled; second Schmidt weight";
          return {IpbVerdict::no, msg.str(), weight, std::nullopt};
        }
      }
    }
  }

  std::vector<std::vector<ComplexMatrix>> levels;
  for (std::size_t l = 0; l < chain.dims.size(); ++l)
    levels.emplace_back(nodes_at_level(chain.dims, static_cast<int>(l)), ComplexMatrix::identity(chain.dims[l]));
  const auto failure = read_chain(vecs, chain.dims, 0, 0, std::max(tol, 1e-9), levels);
  if (!failure) {
    AdaptiveProductBasis b{chain.parties, chain.dims, std::move(levels)};
    return {IpbVerdict::yes, "eigenbasis is an adaptive product basis", 0.0, std::move(b)};
  }
  const bool degenerate = std::any_of(cluster_size.begin(), cluster_size.end(), [](int s) { return s > 1; });
  if (degenerate) {
    return {IpbVerdict::undecided, "degenerate spectrum; computed eigenbasis failed: " + failure->reason, min_gap,
            std::nullopt};
  }
  return {IpbVerdict::no, failure->reason, failure->value, std::nullopt};
}

json basis_to_json(const AdaptiveProductBasis& basis) {
  json levels = json::array();
  for (const auto& lvl : basis.levels) {
    json arr = json::array();
    for (const auto& u : lvl) arr.push_back(matrix_to_json(u));
    levels.push_back(std::move(arr));
  }
  return json{{"parties", basis.parties}, {"party_dims", basis.party_dims}, {"levels", levels}};
}

AdaptiveProductBasis basis_from_json(const json& doc) {
  AdaptiveProductBasis b;
  try {
    b.parties = doc.at("parties").get<std::vector<std::string>>();
    b.party_dims = doc.at("party_dims").get<std::vector<int>>();
    for (const auto& lvl : doc.at("levels")) {
      std::vector<ComplexMatrix> us;
      for (const auto& u : lvl) us.push_back(matrix_from_json(u));
      b.levels.push_back(std::move(us));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("adaptive basis: ") + e.what());
  }
  b.validate();
  return b;
}

}  // namespace infoloc
