// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/spectral.hpp"

namespace forknet {

/// Scale-invariant SDR in dB. Means are removed, the estimate is projected
/// onto the reference, and the ratio of target to residual energy is
/// reported; capped at +100 dB when the residual underflows.
double si_sdr(const AudioBuffer& est, const AudioBuffer& ref);

}  // namespace forknet
