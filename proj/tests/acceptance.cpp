// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "infoloc/bounds.hpp"
#include "infoloc/channels.hpp"
#include "infoloc/cli.hpp"
#include "infoloc/distillsim.hpp"
#include "infoloc/measures.hpp"
#include "oracles.hpp"

using namespace infoloc;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

json cli_json(const std::vector<std::string>& args) {
  std::vector<std::string> full{"infoloc"};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = cli::run(full, out, err);
  if (code != cli::kOk) throw std::runtime_error("cli exit " + std::to_string(code) + ": " + err.str());
  return json::parse(out.str());
}

// 1. Bell deficit through the command line
void bell_deficit(Outcome& o) {
  const auto t0 = Clock::now();
  const json r = cli_json({"bounds", "--catalog", "bell"});
  const double secs = seconds_since(t0);
  const double i = r["I"], up = r["il_upper"], lo = r["il_lower"], dl = r["delta_lower"], du = r["delta_upper"];
  o.require(std::abs(i - 2.0) <= 1e-9, "I = 2 +- 1e-9");
  o.require(std::abs(up - 1.0) <= 1e-9, "il_upper = 1 +- 1e-9");
  o.require(std::abs(lo - 1.0) <= 1e-4, "il_lower = 1 +- 1e-4");
  o.require(std::abs(dl - 1.0) <= 1e-4 && std::abs(du - 1.0) <= 1e-4, "delta interval = [1,1] +- 1e-4");
  o.require(secs < 30.0, "runtime < 30 s");
  o.detail << "I=" << i << " il_upper=" << up << " il_lower=" << lo << " delta=[" << dl << "," << du << "] "
           << secs << "s";
}

// 2. Pure-state law on a nine-point theta grid
void pure_state_law(Outcome& o) {
  double worst = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const double theta = k * M_PI / 16.0;
    const double expected = oracle::h2(std::cos(theta) * std::cos(theta));
    const auto r = deficit_interval(catalog("pure_schmidt", json{{"theta", theta}}), OptimizerConfig{});
    const double mid = 0.5 * (r.delta_lower + r.delta_upper);
    worst = std::max({worst, std::abs(r.delta_conjectured - expected), std::abs(mid - expected)});
  }
  o.require(worst <= 2e-3, "|delta - H2(cos^2 theta)| <= 2e-3");
  o.detail << "max deviation " << worst << " over 9 points";
}

// 3. GHZ deficit
void ghz_deficit(Outcome& o) {
  const json r = cli_json({"bounds", "--catalog", "ghz"});
  const double dl = r["delta_lower"], du = r["delta_upper"];
  o.require(std::abs(dl - 1.0) <= 1e-3 && std::abs(du - 1.0) <= 1e-3, "delta interval = [1,1] +- 1e-3");
  o.detail << "delta=[" << dl << "," << du << "]";
}

// 4. Classically correlated state
void classical_tight(Outcome& o) {
  const auto r = deficit_interval(catalog("classical_correlated"), OptimizerConfig{});
  o.require(std::abs(r.upper.il_upper - 1.0) <= 1e-6 && std::abs(r.il_lower - 1.0) <= 1e-6, "I_l bounds = 1");
  o.require(std::abs(r.delta_lower) <= 1e-6 && std::abs(r.delta_upper) <= 1e-6, "delta = 0 +- 1e-6");
  o.detail << "il=[" << r.il_lower << "," << r.upper.il_upper << "] delta=[" << r.delta_lower << "," << r.delta_upper
           << "]";
}

// 5. Distillation thresholds, brute force agreement, full curve timing
void distillation(Outcome& o) {
  const Spectrum s({0.9, 0.1});
  const double hi = typical_fidelity(s, 2000, 2000 * 0.55);
  const double lo = typical_fidelity(s, 2000, 2000 * 0.40);
  o.require(hi >= 0.99, "F(2000, 0.55) >= 0.99");
  o.require(lo <= 0.01, "F(2000, 0.40) <= 0.01");

  double worst = 0.0;
  int cases = 0;
  for (const auto& p : std::vector<std::vector<double>>{{0.9, 0.1}, {0.6, 0.3, 0.1}}) {
    const Spectrum sp(p);
    const double log2d = std::log2(double(p.size()));
    for (int n = 1; n <= 12; ++n)
      for (int cut = 0; cut <= 8; ++cut) {
        const double bits = n * log2d * cut / 8.0;
        worst = std::max(worst, std::abs(typical_fidelity(sp, n, bits) - oracle::brute_typical_fidelity(p, n, bits)));
        ++cases;
      }
  }
  o.require(worst <= 1e-12, "DP = brute force to 1e-12");

  const auto t0 = Clock::now();
  const std::vector<long long> ns{100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000, 100000};
  const auto curve = rate_curve(s, ns, 0.99);
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "full curve < 60 s");
  bool decreasing = true;
  for (std::size_t i = 1; i < curve.size(); ++i) decreasing = decreasing && curve[i].rate < curve[i - 1].rate;
  o.require(decreasing, "rate decreasing in n");
  o.detail << "F(0.55)=" << hi << " F(0.40)=" << lo << " brute max diff " << worst << " over " << cases
           << " cases; curve " << curve.front().rate << " -> " << curve.back().rate << " (S=" << s.entropy_bits()
           << ") in " << secs << "s";
}

// 6. Rains ceiling
void rains(Outcome& o) {
  const auto bell = catalog("bell");
  bool ones = true;
  for (long long n = 1; n <= 10000; ++n) ones = ones && rains_fidelity_ceiling(bell, {n, 1.0}).ceiling == 1.0;
  o.require(ones, "r=1 gives 1 for n <= 1e4");
  double worst = 0.0;
  for (long long n = 1; n <= 10000; ++n)
    worst = std::max(worst, std::abs(rains_fidelity_ceiling(bell, {n, 1.2}).log2_ceiling + 0.2 * double(n)));
  o.require(worst <= 1e-12, "r=1.2 gives log2 ceiling -0.2 n within 1e-12");
  o.detail << "r=1.2 max log2 deviation " << worst;
}

// 7. Property suites
void properties(Outcome& o) {
  std::mt19937_64 rng(7);

  double pmm_worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> dims;
    std::vector<std::string> labels;
    const int nf = 2 + static_cast<int>(rng() % 2);
    for (int f = 0; f < nf; ++f) {
      dims.push_back(2 + static_cast<int>(rng() % 2));
      labels.push_back(f == 0 ? "A" : (rng() % 2 ? "A" : "B"));
    }
    if (std::find(labels.begin(), labels.end(), "B") == labels.end()) labels.back() = "B";
    const auto split = PartySplit::from_assignment(labels, dims);
    const std::string party = rng() % 2 ? "A" : "B";
    const auto factors = split.factors_of(party);
    const int f = factors[rng() % factors.size()];
    ProtocolStep step;
    switch (rng() % 5) {
      case 0: step = ApplyLocalUnitary{party, random_unitary(split.party_dim(party), rng())}; break;
      case 1: step = AddMaxMixedAncilla{party, 2 + static_cast<int>(rng() % 2)}; break;
      case 2: step = TraceOut{party, f}; break;
      case 3: step = DephasedSend{f, random_unitary(dims[f], rng()), party, party == "A" ? "B" : "A"}; break;
      default: step = DephaseLocal{party, {f}, random_unitary(dims[f], rng())};
    }
    pmm_worst = std::max(pmm_worst, check_pmm(step, split).max_deviation);
  }
  o.require(pmm_worst <= 1e-10, "PMM deviation <= 1e-10 on 500 steps");

  double h_gap = 1e300, inf_gap = 1e300;
  for (int trial = 0; trial < 500; ++trial) {
    const int da = 2 + static_cast<int>(rng() % 2), db = 2 + static_cast<int>(rng() % 2);
    const int dim = da * db;
    const auto rho = validate(random_density(dim, 1 + static_cast<int>(rng() % dim), rng()),
                              PartySplit::one_per_factor({da, db}));
    const double s = von_neumann_entropy(rho);
    h_gap = std::min(h_gap, shannon_entropy_in_basis(rho, random_unitary(dim, rng())) - s);
    inf_gap = std::min(inf_gap, s - min_entropy(rho));
  }
  o.require(h_gap >= -1e-12, "H(rho,B) >= S(rho) on 500 states");
  o.require(inf_gap >= -1e-12, "S_inf <= S on 500 states");

  double id_worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto rho = validate(random_density(4, 1 + static_cast<int>(rng() % 4), rng()), PartySplit::one_per_factor({2, 2}));
    const auto b = random_unitary(4, rng());
    const double lhs = relative_entropy(rho, dephase(rho, b));
    const double rhs = shannon_entropy_in_basis(rho, b) - von_neumann_entropy(rho);
    id_worst = std::max(id_worst, std::abs(lhs - rhs));
  }
  o.require(id_worst <= 1e-8, "S(rho||dephased) = H - S within 1e-8 on 200 pairs");

  const auto t0 = Clock::now();
  const json scan = cli_json({"scan", "--trials", "1000", "--seed", "1"});
  const double secs = seconds_since(t0);
  o.require(scan["violations"].empty(), "0 unitary/partial-trace violations over 1000 scan trials");
  o.detail << "PMM max " << pmm_worst << "; min H-S " << h_gap << "; min S-S_inf " << inf_gap << "; identity max "
           << id_worst << "; scan violations " << scan["violations"].size() << ", candidates "
           << scan["candidate_counterexamples"].size() << " in " << secs << "s";
}

// 8. Domino-diagonal mixtures: reports produced and archived, width logged
void domino_reports(Outcome& o) {
  const auto vecs = domino_vectors();
  std::vector<std::pair<std::string, std::vector<double>>> mixtures{
      {"uniform", std::vector<double>(9, 1.0 / 9.0)},
      {"linear", {}},
      {"pair_0_1", {0.5, 0.5, 0, 0, 0, 0, 0, 0, 0}},
      {"tiles_1_to_4", {0, 0.25, 0.25, 0.25, 0.25, 0, 0, 0, 0}},
  };
  for (int k = 0; k < 9; ++k) mixtures[1].second.push_back((k + 1) / 45.0);
  std::mt19937_64 rng(11);
  for (int r = 0; r < 2; ++r) {
    std::vector<double> w(9);
    double total = 0.0;
    for (double& x : w) total += (x = std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    for (double& x : w) x /= total;
    mixtures.push_back({"random_" + std::to_string(r), w});
  }

  const std::filesystem::path dir = "acceptance_artifacts";
  std::filesystem::create_directories(dir);
  const OptimizerConfig cfg;
  for (const auto& [name, w] : mixtures) {
    ComplexMatrix m(9);
    for (int k = 0; k < 9; ++k) m += ComplexMatrix::outer(vecs[k]) * w[k];
    const auto rho = validate(m, PartySplit::one_per_factor({3, 3}));
    const auto report = deficit_interval(rho, cfg);
    std::ofstream(dir / ("domino_" + name + ".json")) << report_to_json(report, cfg).dump(2) << "\n";
    o.require(report_violations(report).empty(), name + " report invariants");
    o.detail << name << " width " << report.delta_upper - report.delta_lower << "; ";
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"1 bell deficit", bell_deficit},
      {"2 pure-state law", pure_state_law},
      {"3 ghz deficit", ghz_deficit},
      {"4 classically correlated", classical_tight},
      {"5 distillation thresholds", distillation},
      {"6 rains ceiling", rains},
      {"7 property suites", properties},
      {"8 domino mixtures (exploratory)", domino_reports},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
