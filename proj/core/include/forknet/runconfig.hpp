// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/loss.hpp"
#include "forknet/model.hpp"
#include "forknet/training.hpp"

#include <string>
#include <utility>
#include <vector>

namespace forknet {

/// Everything a run needs, merged from a config file plus `--set key=value`
/// overrides. File grammar: one `key = value` per line, `#` starts a comment
/// line, blank lines ignored, unknown keys rejected. echo() emits the full
/// effective config in the same grammar; feeding the echo back reproduces the
/// run bitwise.
struct RunConfig {
  ForkNetConfig model;
  TrainConfig train;
  LossConfig loss;
  DatasetSpec data;
  std::string out_dir;
  std::string resume;

  /// Applies one key=value assignment. `model.preset` switches the whole
  /// model config and should come before per-field model keys.
  void apply(const std::string& key, const std::string& value);
  /// Final consistency pass; call after the last apply().
  void finalize();

  static RunConfig from_file(const std::string& path, const std::vector<std::string>& overrides);
  static RunConfig from_text(const std::string& text, const std::vector<std::string>& overrides);

  std::string echo() const;

  // Bookkeeping: finalize() keeps segmentation and the loss sample rate in
  // step with the STFT unless those keys were assigned explicitly.
  bool seg_set_ = false;
  bool loss_sr_set_ = false;
};

/// Splits "key=value" (first '=' wins); throws when '=' is missing.
std::pair<std::string, std::string> split_assignment(const std::string& s);

}  // namespace forknet
