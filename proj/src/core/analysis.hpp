#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "core/ensemble.hpp"
#include "core/rng.hpp"

namespace sdt {

/// Nearest lattice site in lambda/2 units; ties round away from zero.
long classify_site(double x, double wavelength);

/// Probability that Gaussian detection noise of width sigma stays within
/// +-lambda/4 of the true site: erf((lambda/4) / (sigma sqrt 2)).
double classification_reliability(double sigma, double wavelength);

/// Detected displacements (m): true site displacement plus Gaussian noise.
/// Lost atoms are skipped. Noise for atom i comes from Philox stream
/// (seed, i, substream).
std::vector<double> detect_displacements(std::span<const TransportOutcome> outcomes,
                                         double wavelength, double sigma, std::uint64_t seed,
                                         std::uint32_t substream);

struct Histogram {
  double bin_width = 0.0;  // m
  bool centered = false;   // bin i spans (i -+ 1/2) w if centered, else [i w, (i+1) w)
  std::uint64_t total = 0;
  std::map<long, std::uint64_t> counts;

  double bin_center(long i) const { return centered ? i * bin_width : (i + 0.5) * bin_width; }
  double probability(long i) const;
};

struct DisplacementHistograms {
  Histogram digitized;  // lambda/2 bins centred on sites (classify_site)
  Histogram dense;      // lambda/20 bins with edges on multiples of lambda/20
};

DisplacementHistograms make_histograms(std::span<const double> samples, double wavelength);

struct GaussianPeak {
  long site = 0;
  double center = 0.0;  // m
  double center_error = 0.0;
  double sigma = 0.0;
  double sigma_error = 0.0;
  double amplitude = 0.0;  // fraction of all analyzed atoms in the peak
  bool degenerate = false; // < 4 populated bins; moment estimates reported
};

struct PeakFitResult {
  std::vector<GaussianPeak> peaks;
  double drift = 0.0;  // weighted mean of (centre - site), m
  double drift_error = 0.0;
};

/// Bin-integrated Gaussian fits on +-lambda/4 windows around every site whose
/// window holds a bin with more than 5 counts.
PeakFitResult fit_gaussian_peaks(const Histogram& dense, double wavelength);

struct Interval {
  double lower;
  double upper;
};

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.0);

struct EfficiencyPoint {
  int steps;             // 2L
  double probability;    // measured P_2L
  std::uint64_t atoms;   // analyzed atoms behind the point
};

struct EfficiencyFit {
  double p_flip = 0.0;
  double p_flip_sigma = 0.0;
  double p_ini = 0.0;
  double p_ini_sigma = 0.0;  // 0 when p_ini is fixed
  bool p_ini_free = false;
  double chi2 = 0.0;
  int dof = 0;
  bool converged = false;
  std::vector<double> residuals;  // measured - model
  std::vector<Interval> wilson;
};

/// P_2L = p_ini * p_flip^(2L - 1).
double transport_efficiency_model(int steps, double p_ini, double p_flip);

/// Weighted least squares of the decay law with inverse binomial variances.
/// p_ini is held at `p_ini` unless `free_p_ini`.
EfficiencyFit fit_transport_efficiency(std::span<const EfficiencyPoint> points, double p_ini = 0.97,
                                       bool free_p_ini = false);

}  // namespace sdt
