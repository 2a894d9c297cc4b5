#include "core/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include "core/error.hpp"

namespace sdt {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Site a leaked atom ends up at: of the two ends of the shift during which it
// left the qubit space, the one that is a theta = 0 site (even index).
long leaked_final_site(long start, long end) { return (start % 2 == 0) ? start : end; }

// Shift direction of step k (1-based): odd steps forward, even backward.
long step_displacement(int step, Spin spin) {
  const bool forward = step % 2 == 1;
  const bool up = spin == Spin::up;
  return (forward == up) ? 1 : -1;
}

}  // namespace

void ErrorModel::validate() const {
  require(is_probability(p_ini), "p_ini must lie in [0, 1]");
  require(is_probability(p_flip), "p_flip must lie in [0, 1]");
  require(p_flip_spread >= 0.0 && p_flip_spread <= 1.0, "p_flip_spread must lie in [0, 1]");
  require(is_probability(p_leak_step), "p_leak_step must lie in [0, 1]");
  require(is_probability(leak_loss), "leak_loss must lie in [0, 1]");
  require(std::isfinite(theta_offset), "theta_offset must be finite");
}

double ErrorModel::mean_flip_probability() const {
  if (p_flip_spread == 0.0) return p_flip;
  // E[clamp(U(a, b), 0, 1)]
  const double a = p_flip - p_flip_spread;
  const double b = p_flip + p_flip_spread;
  auto antiderivative = [](double x) {
    if (x <= 0.0) return 0.0;
    if (x <= 1.0) return 0.5 * x * x;
    return 0.5 + (x - 1.0);
  };
  return (antiderivative(b) - antiderivative(a)) / (b - a);
}

TransportOutcome sample_atom(RandomStream& rng, int cycles, const ErrorModel& model) {
  TransportOutcome out;
  const int steps = 2 * cycles;
  long site = 0;
  Spin spin = Spin::up;

  if (!rng.bernoulli(model.p_ini)) {
    out.leaked = true;
    out.leak_step = 0;
  } else {
    for (int step = 1; step <= steps; ++step) {
      const long start = site;
      site += step_displacement(step, spin);
      if (rng.bernoulli(model.p_leak_step)) {
        out.leaked = true;
        out.leak_step = step;
        site = leaked_final_site(start, site);
        break;
      }
      double p = model.p_flip;
      if (model.p_flip_spread > 0.0) {
        p = std::clamp(p + model.p_flip_spread * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
      }
      if (rng.bernoulli(p)) spin = flipped(spin);
    }
  }

  out.final_displacement = site;
  if (out.leaked) {
    out.spin_final = FinalSpin::leaked;
    out.lost = rng.bernoulli(model.leak_loss);
  } else {
    out.spin_final = spin == Spin::up ? FinalSpin::up : FinalSpin::down;
  }
  return out;
}

double EnsembleResult::probability(long displacement) const {
  const auto it = counts.find(displacement);
  if (it == counts.end() || analyzed() == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(analyzed());
}

EnsembleResult run_ensemble(std::uint64_t atoms, int cycles, const ErrorModel& model,
                            std::uint64_t master_seed, const EnsembleOptions& opts) {
  require(atoms >= 1, "ensemble needs at least one atom");
  require(cycles >= 0, "number of cycles must be non-negative");
  model.validate();

  std::vector<TransportOutcome> outcomes(atoms);
  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      RandomStream rng(master_seed, i, static_cast<std::uint32_t>(cycles));
      outcomes[i] = sample_atom(rng, cycles, model);
    }
  };

  const std::uint64_t nw = std::clamp<std::uint64_t>(opts.workers, 1, atoms);
  if (nw == 1) {
    work(0, atoms);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nw);
    for (std::uint64_t w = 0; w < nw; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(atoms * w / nw, atoms * (w + 1) / nw);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  EnsembleResult result;
  result.cycles = cycles;
  result.atoms = atoms;
  for (const auto& o : outcomes) {
    if (o.lost) {
      ++result.lost;
    } else {
      ++result.counts[o.final_displacement];
    }
  }
  if (opts.keep_outcomes) result.outcomes = std::move(outcomes);
  return result;
}

ExactDistribution exact_distribution(int cycles, const ErrorModel& model) {
  require(cycles >= 0, "number of cycles must be non-negative");
  require(cycles <= 12, "exact distribution limited to L <= 12");
  model.validate();

  const int steps = 2 * cycles;
  const long offset = steps;
  const std::size_t width = 2 * steps + 1;
  std::vector<double> up(width, 0.0), down(width, 0.0);
  std::map<long, double> leaked;

  up[offset] = model.p_ini;
  if (model.p_ini < 1.0) leaked[0] += 1.0 - model.p_ini;

  const double flip = model.mean_flip_probability();
  const double stay = 1.0 - model.p_leak_step;
  for (int step = 1; step <= steps; ++step) {
    std::vector<double> nu(width, 0.0), nd(width, 0.0);
    for (std::size_t i = 0; i < width; ++i) {
      const long site = static_cast<long>(i) - offset;
      for (const Spin s : {Spin::up, Spin::down}) {
        const double mass = (s == Spin::up ? up : down)[i];
        if (mass == 0.0) continue;
        const long end = site + step_displacement(step, s);
        if (model.p_leak_step > 0.0) leaked[leaked_final_site(site, end)] += mass * model.p_leak_step;
        const double kept = mass * stay;
        auto& same = s == Spin::up ? nu : nd;
        auto& other = s == Spin::up ? nd : nu;
        same[end + offset] += kept * (1.0 - flip);
        other[end + offset] += kept * flip;
      }
    }
    up.swap(nu);
    down.swap(nd);
  }

  ExactDistribution out;
  double total_leaked = 0.0;
  for (const auto& [site, p] : leaked) total_leaked += p;
  out.lost = total_leaked * model.leak_loss;
  const double observed = 1.0 - out.lost;
  for (std::size_t i = 0; i < width; ++i) {
    const double p = up[i] + down[i];
    if (p > 0.0) out.probability[static_cast<long>(i) - offset] += p;
  }
  for (const auto& [site, p] : leaked) out.probability[site] += p * (1.0 - model.leak_loss);
  if (observed > 0.0) {
    for (auto& [site, p] : out.probability) p /= observed;
  }
  return out;
}

double total_variation(const EnsembleResult& mc, const ExactDistribution& exact) {
  std::set<long> support;
  for (const auto& [d, c] : mc.counts) support.insert(d);
  for (const auto& [d, p] : exact.probability) support.insert(d);
  double tv = 0.0;
  for (long d : support) {
    const auto it = exact.probability.find(d);
    const double pe = it == exact.probability.end() ? 0.0 : it->second;
    tv += std::abs(mc.probability(d) - pe);
  }
  return 0.5 * tv;
}

}  // namespace sdt
