#include "core/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/least_squares.hpp"
#include "core/units.hpp"

namespace sdt {

namespace {

constexpr int kDenseBinsPerSite = 10;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * units::pi); }

GaussianPeak moment_peak(long site, const std::vector<double>& centers,
                         const std::vector<double>& y, double bin_width, double total) {
  double mass = 0.0, mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mass += y[i];
    mean += y[i] * centers[i];
  }
  mean /= mass;
  for (std::size_t i = 0; i < y.size(); ++i) var += y[i] * (centers[i] - mean) * (centers[i] - mean);
  var /= mass;
  GaussianPeak p;
  p.site = site;
  p.center = mean;
  p.sigma = std::sqrt(var + bin_width * bin_width / 12.0);
  p.center_error = p.sigma / std::sqrt(mass);
  p.amplitude = mass / total;
  p.degenerate = true;
  return p;
}

}  // namespace

long classify_site(double x, double wavelength) {
  return static_cast<long>(std::round(x / (0.5 * wavelength)));
}

double classification_reliability(double sigma, double wavelength) {
  require(sigma > 0.0 && wavelength > 0.0, "sigma and wavelength must be positive");
  return std::erf(0.25 * wavelength / (sigma * std::sqrt(2.0)));
}

std::vector<double> detect_displacements(std::span<const TransportOutcome> outcomes,
                                         double wavelength, double sigma, std::uint64_t seed,
                                         std::uint32_t substream) {
  require(sigma >= 0.0, "detection noise must be non-negative");
  std::vector<double> x;
  x.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].lost) continue;
    RandomStream rng(seed, i, substream);
    const double truth = outcomes[i].final_displacement * 0.25 * wavelength;
    x.push_back(truth + (sigma > 0.0 ? sigma * rng.normal() : 0.0));
  }
  return x;
}

double Histogram::probability(long i) const {
  const auto it = counts.find(i);
  if (it == counts.end() || total == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total);
}

DisplacementHistograms make_histograms(std::span<const double> samples, double wavelength) {
  if (samples.empty()) fail(ErrorKind::invalid_argument, "cannot histogram an empty sample");
  DisplacementHistograms h;
  h.digitized.bin_width = 0.5 * wavelength;
  h.digitized.centered = true;
  h.dense.bin_width = wavelength / 20.0;
  h.dense.centered = false;
  for (double x : samples) {
    require(std::isfinite(x), "non-finite displacement sample");
    ++h.digitized.counts[classify_site(x, wavelength)];
    ++h.dense.counts[static_cast<long>(std::floor(x / h.dense.bin_width))];
  }
  h.digitized.total = h.dense.total = samples.size();
  return h;
}

PeakFitResult fit_gaussian_peaks(const Histogram& dense, double wavelength) {
  require(!dense.centered, "peak fitting expects the edge-aligned dense histogram");
  require(dense.total > 0, "empty histogram");
  const double w = dense.bin_width;
  const double total = static_cast<double>(dense.total);

  // Site j's window holds dense bins 10j - 5 ... 10j + 4, i.e. [-lambda/4, lambda/4).
  std::map<long, bool> candidates;
  for (const auto& [bin, count] : dense.counts) {
    if (count > 5) {
      const long site = static_cast<long>(std::floor((bin + 5.0) / kDenseBinsPerSite));
      candidates[site] = true;
    }
  }
  if (candidates.empty()) fail(ErrorKind::invalid_argument, "no histogram bin above 5 counts");

  PeakFitResult out;
  for (const auto& [site, unused] : candidates) {
    const long first = site * kDenseBinsPerSite - kDenseBinsPerSite / 2;
    std::vector<double> edges, centers, y;
    int populated = 0;
    for (long b = first; b < first + kDenseBinsPerSite; ++b) {
      const auto it = dense.counts.find(b);
      const double c = it == dense.counts.end() ? 0.0 : static_cast<double>(it->second);
      edges.push_back(b * w);
      centers.push_back((b + 0.5) * w);
      y.push_back(c);
      if (c > 0.0) ++populated;
    }
    edges.push_back((first + kDenseBinsPerSite) * w);

    const GaussianPeak guess = moment_peak(site, centers, y, w, total);
    if (populated < 4) {
      out.peaks.push_back(guess);
      continue;
    }

    // Params: (mass in counts, centre, sigma), model = mass * [Phi(b) - Phi(a)].
    const std::size_t n = y.size();
    auto residual = [&](const Eigen::VectorXd& p) {
      Eigen::VectorXd r(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double m = p(0) * (normal_cdf((edges[i + 1] - p(1)) / p(2)) -
                                 normal_cdf((edges[i] - p(1)) / p(2)));
        r(i) = (y[i] - m) / std::sqrt(std::max(y[i], 1.0));
      }
      return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& p) {
      Eigen::MatrixXd jac(n, 3);
      for (std::size_t i = 0; i < n; ++i) {
        const double a = (edges[i] - p(1)) / p(2);
        const double b = (edges[i + 1] - p(1)) / p(2);
        const double sd = std::sqrt(std::max(y[i], 1.0));
        jac(i, 0) = -(normal_cdf(b) - normal_cdf(a)) / sd;
        jac(i, 1) = p(0) * (normal_pdf(b) - normal_pdf(a)) / p(2) / sd;
        jac(i, 2) = p(0) * (normal_pdf(b) * b - normal_pdf(a) * a) / p(2) / sd;
      }
      return jac;
    };
    auto project = [&](Eigen::VectorXd& p) {
      p(0) = std::max(p(0), 1e-12);
      p(2) = std::clamp(p(2), 1e-3 * w, wavelength);
    };
    Eigen::VectorXd p0(3);
    p0 << guess.amplitude * total, guess.center, std::max(guess.sigma, 0.5 * w);
    const auto fit = levenberg_marquardt(residual, jacobian, p0, project);

    GaussianPeak peak;
    peak.site = site;
    peak.amplitude = fit.params(0) / total;
    peak.center = fit.params(1);
    peak.sigma = fit.params(2);
    peak.center_error = std::sqrt(std::max(fit.covariance(1, 1), 0.0));
    peak.sigma_error = std::sqrt(std::max(fit.covariance(2, 2), 0.0));
    out.peaks.push_back(peak);
  }

  double wsum = 0.0, acc = 0.0;
  for (const auto& p : out.peaks) {
    const double err = p.center_error > 0.0 ? p.center_error : w;
    const double weight = 1.0 / (err * err);
    acc += weight * (p.center - p.site * 0.5 * wavelength);
    wsum += weight;
  }
  out.drift = acc / wsum;
  out.drift_error = 1.0 / std::sqrt(wsum);
  return out;
}

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  require(n > 0, "Wilson interval needs at least one trial");
  require(k <= n, "successes exceed trials");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double transport_efficiency_model(int steps, double p_ini, double p_flip) {
  return p_ini * std::pow(p_flip, steps - 1);
}

EfficiencyFit fit_transport_efficiency(std::span<const EfficiencyPoint> points, double p_ini,
                                       bool free_p_ini) {
  require(points.size() >= 3, "efficiency fit needs at least 3 points");
  require(p_ini > 0.0 && p_ini <= 1.0, "p_ini must lie in (0, 1]");
  for (const auto& pt : points) {
    require(pt.steps >= 1 && pt.atoms > 0, "each point needs steps >= 1 and atoms > 0");
    require(pt.probability >= 0.0 && pt.probability <= 1.0, "P_2L must lie in [0, 1]");
  }

  const std::size_t n = points.size();
  std::vector<double> sd(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Binomial variance with a half-count continuity term so 0 and 1 stay weighted.
    const double atoms = static_cast<double>(points[i].atoms);
    const double pt = (points[i].probability * atoms + 0.5) / (atoms + 1.0);
    sd[i] = std::sqrt(pt * (1.0 - pt) / atoms);
  }

  const int np = free_p_ini ? 2 : 1;
  auto unpack = [&](const Eigen::VectorXd& p) {
    return std::pair{p(0), free_p_ini ? p(1) : p_ini};
  };
  auto residual = [&](const Eigen::VectorXd& p) {
    const auto [flip, ini] = unpack(p);
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) {
      r(i) = (points[i].probability - transport_efficiency_model(points[i].steps, ini, flip)) / sd[i];
    }
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& p) {
    const auto [flip, ini] = unpack(p);
    Eigen::MatrixXd jac(n, np);
    for (std::size_t i = 0; i < n; ++i) {
      const int e = points[i].steps - 1;
      jac(i, 0) = -ini * e * std::pow(flip, e - 1) / sd[i];
      if (free_p_ini) jac(i, 1) = -std::pow(flip, e) / sd[i];
    }
    return jac;
  };
  auto project = [&](Eigen::VectorXd& p) {
    p(0) = std::clamp(p(0), 1e-9, 1.0);
    if (free_p_ini) p(1) = std::clamp(p(1), 1e-9, 1.0);
  };

  // Start from the log-linear slope of the data.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& pt : points) {
    if (pt.probability <= 0.0) continue;
    const double x = pt.steps - 1.0, yv = std::log(pt.probability);
    sx += x; sy += yv; sxx += x * x; sxy += x * yv; ++m;
  }
  double start = 0.9;
  if (m >= 2 && m * sxx - sx * sx > 0.0) {
    start = std::clamp(std::exp((m * sxy - sx * sy) / (m * sxx - sx * sx)), 0.05, 0.999999);
  }
  Eigen::VectorXd p0(np);
  p0(0) = start;
  if (free_p_ini) p0(1) = p_ini;

  const auto fit = levenberg_marquardt(residual, jacobian, p0, project);

  EfficiencyFit out;
  out.p_flip = fit.params(0);
  out.p_flip_sigma = std::sqrt(std::max(fit.covariance(0, 0), 0.0));
  out.p_ini_free = free_p_ini;
  out.p_ini = free_p_ini ? fit.params(1) : p_ini;
  out.p_ini_sigma = free_p_ini ? std::sqrt(std::max(fit.covariance(1, 1), 0.0)) : 0.0;
  out.chi2 = fit.chi2;
  out.dof = static_cast<int>(n) - np;
  out.converged = fit.converged;
  for (std::size_t i = 0; i < n; ++i) {
    out.residuals.push_back(points[i].probability -
                            transport_efficiency_model(points[i].steps, out.p_ini, out.p_flip));
    const auto k = static_cast<std::uint64_t>(std::llround(points[i].probability * points[i].atoms));
    out.wilson.push_back(wilson_interval(std::min(k, points[i].atoms), points[i].atoms));
  }
  if (!out.converged) {
    fail(ErrorKind::numerical, "efficiency fit did not converge (chi2 = " + std::to_string(out.chi2) + ")");
  }
  return out;
}

}  // namespace sdt
