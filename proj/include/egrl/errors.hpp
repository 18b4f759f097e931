// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace egrl {

// Bad user input: malformed config files, unknown keys, inconsistent presets.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed data files: workload graphs, mappings, checkpoints, buffer dumps.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace egrl
