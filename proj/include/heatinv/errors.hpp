// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace heatinv {

// Invalid geometry, configuration, or argument combinations.
struct validation_error : std::invalid_argument {
  explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Out-of-range grid or vector index.
struct index_error : std::out_of_range {
  explicit index_error(const std::string& msg) : std::out_of_range(msg) {}
};

// Linear system is singular or numerically rank deficient.
struct singular_error : std::runtime_error {
  explicit singular_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Problem size exceeds what the chosen algorithm supports.
struct size_error : std::runtime_error {
  explicit size_error(const std::string& msg) : std::runtime_error(msg) {}
};

// No candidate sensor set yields an identifiable system.
struct placement_error : std::runtime_error {
  explicit placement_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Training diverged or produced non-finite values.
struct training_error : std::runtime_error {
  explicit training_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File or format problems on import/export.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace heatinv
