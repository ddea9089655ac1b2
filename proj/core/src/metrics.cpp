// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/metrics.hpp"

#include <cmath>

namespace forknet {

double si_sdr(const AudioBuffer& est, const AudioBuffer& ref) {
  require(est.size() == ref.size(), "si_sdr: lengths differ");
  require(est.size() > 0, "si_sdr: empty buffers");
  const long n = est.size();

  double mean_e = 0.0, mean_r = 0.0;
  for (long i = 0; i < n; ++i) {
    mean_e += est.samples[static_cast<size_t>(i)];
    mean_r += ref.samples[static_cast<size_t>(i)];
  }
  mean_e /= static_cast<double>(n);
  mean_r /= static_cast<double>(n);

  double dot = 0.0, rr = 0.0;
  for (long i = 0; i < n; ++i) {
    double e = est.samples[static_cast<size_t>(i)] - mean_e;
    double r = ref.samples[static_cast<size_t>(i)] - mean_r;
    dot += e * r;
    rr += r * r;
  }
  require(rr > 0.0, "si_sdr: silent reference");

  const double a = dot / rr;
  double target = 0.0, resid = 0.0;
  for (long i = 0; i < n; ++i) {
    double e = est.samples[static_cast<size_t>(i)] - mean_e;
    double r = ref.samples[static_cast<size_t>(i)] - mean_r;
    double t = a * r;
    target += t * t;
    resid += (e - t) * (e - t);
  }
  if (resid < 1e-20 * target) return 100.0;
  if (target < 1e-20 * resid) return -100.0;  // degenerate near-orthogonal estimate
  return 10.0 * std::log10(target / resid);
}

}  // namespace forknet
