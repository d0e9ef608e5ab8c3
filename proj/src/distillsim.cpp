#include "infoloc/distillsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "infoloc/errors.hpp"
#include "infoloc/measures.hpp"

namespace infoloc {

Spectrum::Spectrum(std::vector<double> probabilities) : probs_(std::move(probabilities)) {
  if (probs_.empty() || probs_.size() > 6)
    throw ValidationError("spectrum must have between 1 and 6 entries", {{"dim", double(probs_.size()), ""}});
  for (double p : probs_)
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("spectrum entries must lie in [0, 1]", {{"probability", p, ""}});
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("spectrum must sum to 1", {{"sum", total, ""}});
  std::sort(probs_.begin(), probs_.end(), std::greater<>());
}

Spectrum Spectrum::of(const DensityOperator& rho) {
  auto eigs = hermitian_eigenvalues(rho.matrix());
  for (auto& x : eigs) x = std::max(x, 0.0);
  const double total = std::accumulate(eigs.begin(), eigs.end(), 0.0);
  for (auto& x : eigs) x /= total;
  return Spectrum(std::move(eigs));
}

int Spectrum::support() const noexcept {
  return static_cast<int>(std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
}

double Spectrum::entropy_bits() const { return shannon_entropy(probs_); }

long long max_copies(int support) {
  switch (support) {
    case 1:
      return 1'000'000'000LL;
    case 2:
      return 1'000'000LL;
    case 3:
    case 4:
      return 200;
    case 5:
      return 60;
    default:
      return 40;
  }
}

namespace {

// Strings of one composition (k_1..k_s) of n: all share the same probability.
struct TypeClass {
  double log_count;   // natural log of the multinomial coefficient
  double log_string;  // natural log of each string's probability
};

void enumerate(std::span<const double> log_p, long long n, std::size_t pos, long long left, double log_count,
               double log_string, std::vector<TypeClass>& out) {
  if (pos + 1 == log_p.size()) {
    out.push_back({log_count - std::lgamma(double(left) + 1.0), log_string + double(left) * log_p[pos]});
    return;
  }
  for (long long k = 0; k <= left; ++k)
    enumerate(log_p, n, pos + 1, left - k, log_count - std::lgamma(double(k) + 1.0), log_string + double(k) * log_p[pos],
              out);
}

std::vector<TypeClass> sorted_classes(const Spectrum& spectrum, long long n) {
  const int s = spectrum.support();
  if (n < 1) throw ValidationError("number of copies must be positive", {{"n", double(n), ""}});
  if (n > max_copies(s)) {
    throw CapacityError("type-class enumeration infeasible for support " + std::to_string(s) + " and n = " +
                        std::to_string(n) + " (limit " + std::to_string(max_copies(s)) + ")");
  }
  std::vector<double> log_p;
  for (double p : spectrum.probabilities())
    if (p > 0.0) log_p.push_back(std::log(p));
  std::vector<TypeClass> classes;
  enumerate(log_p, n, 0, n, std::lgamma(double(n) + 1.0), 0.0, classes);
  std::stable_sort(classes.begin(), classes.end(),
                   [](const TypeClass& a, const TypeClass& b) { return a.log_string > b.log_string; });
  return classes;
}

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// natural log of floor(2^bits)
double log_budget(double bits) {
  const double rounded = std::round(bits);
  if (std::abs(bits - rounded) < 1e-12) return rounded * std::log(2.0);
  if (bits < 52.0) {
    // snap values such as n*log2(3) that land a hair below an integer
    const double x = std::exp2(bits), nearest = std::round(x);
    return std::log(std::abs(x - nearest) <= 1e-9 * nearest ? nearest : std::floor(x));
  }
  return bits * std::log(2.0);
}

}  // namespace

double typical_fidelity(const Spectrum& spectrum, long long n, double noise_bits) {
  if (!(noise_bits >= 0.0)) throw ValidationError("noise_bits must be non-negative", {{"noise_bits", noise_bits, ""}});
  const auto classes = sorted_classes(spectrum, n);
  double remaining = log_budget(noise_bits);  // log of strings still allowed
  CompensatedSum mass;
  if (remaining < std::log(9.0e15)) {
    // small budgets: count strings exactly instead of subtracting in log space
    auto left = static_cast<long long>(std::llround(std::exp(remaining)));
    for (const auto& c : classes) {
      if (left == 0) break;
      const long long count = c.log_count < std::log(9.0e15) ? std::llround(std::exp(c.log_count)) : left;
      const long long take = std::min(count, left);
      mass.add(static_cast<double>(take) * std::exp(c.log_string));
      left -= take;
    }
    return std::clamp(mass.value(), 0.0, 1.0);
  }
  for (const auto& c : classes) {
    if (remaining >= c.log_count) {
      mass.add(std::exp(c.log_count + c.log_string));
      const double ratio = std::exp(c.log_count - remaining);
      if (ratio >= 1.0 - 1e-15) break;
      remaining += std::log1p(-ratio);
    } else {
      // the boundary class takes what is left; at this size the count is continuous
      mass.add(std::exp(remaining + c.log_string));
      break;
    }
  }
  return std::clamp(mass.value(), 0.0, 1.0);
}

std::vector<RatePoint> rate_curve(const Spectrum& spectrum, std::span<const long long> n_list, double target) {
  if (!(target > 0.0 && target <= 1.0)) throw ValidationError("target fidelity must lie in (0, 1]", {{"target", target, ""}});
  std::vector<RatePoint> out;
  for (long long n : n_list) {
    const auto classes = sorted_classes(spectrum, n);
    CompensatedSum mass;
    double log_total = -std::numeric_limits<double>::infinity();
    for (const auto& c : classes) log_total = log_add(log_total, c.log_count);

    double log_kept = -std::numeric_limits<double>::infinity();
    bool done = false;
    for (const auto& c : classes) {
      const double class_mass = std::exp(c.log_count + c.log_string);
      const double before = mass.value();
      if (before + class_mass >= target - 1e-12) {
        // smallest number of strings j from this class with before + j p >= target
        const double need = std::max(target - before, 0.0);
        double log_j = std::log(need) - c.log_string;
        if (log_j < std::log(9.0e15)) {
          double j = need / std::exp(c.log_string);
          const double nearest = std::round(j);
          j = std::abs(j - nearest) <= 1e-9 * std::max(1.0, nearest) ? nearest : std::ceil(j);
          j = std::max(j, 1.0);
          log_j = std::log(j);
        }
        log_j = std::min(log_j, c.log_count);
        log_kept = log_add(log_kept, log_j);
        mass.add(std::exp(log_j + c.log_string));
        done = true;
        break;
      }
      mass.add(class_mass);
      log_kept = log_add(log_kept, c.log_count);
    }
    if (!done) log_kept = log_total;  // target is the full mass up to rounding
    RatePoint p;
    p.n = n;
    p.noise_bits = std::max(0.0, log_kept / std::log(2.0));
    p.rate = p.noise_bits / static_cast<double>(n);
    p.fidelity = std::clamp(mass.value(), 0.0, 1.0);
    out.push_back(p);
  }
  return out;
}

CreationCost creation_cost(const DensityOperator& rho, long long n) {
  const double s = von_neumann_entropy(rho);
  return {static_cast<double>(n) * (rho.num_bits() - s), static_cast<double>(n) * s};
}

CreationCost creation_cost(const Spectrum& spectrum, long long n) {
  const double s = spectrum.entropy_bits();
  return {static_cast<double>(n) * (std::log2(double(spectrum.dim())) - s), static_cast<double>(n) * s};
}

}  // namespace infoloc
