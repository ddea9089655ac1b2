// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/spectral.hpp"

#include <string>

namespace forknet {

/// Reads a RIFF/WAVE file. Accepts 16-bit PCM (decoded by division by 32768)
/// or 32-bit IEEE float, mono, 16 kHz; anything else is rejected with a
/// diagnostic naming the offending field.
AudioBuffer wav_read(const std::string& path);

/// Writes 16-bit PCM with saturating conversion. Samples must be finite.
void wav_write(const std::string& path, const AudioBuffer& audio);

}  // namespace forknet
