// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pwifs {

/// Malformed arguments: dimension mismatch, non-finite entries, bad weights.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The averaged contraction factor r is not below one.
class NotContractive : public std::domain_error {
 public:
  NotContractive(const std::string& what, double r)
      : std::domain_error(what), factor_(r) {}
  double factor() const noexcept { return factor_; }

 private:
  double factor_;
};

/// An iterative method stopped before meeting its tolerance.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double last_residual)
      : std::runtime_error(what), residual_(last_residual) {}
  double last_residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Problem too large for the requested solver.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// File read/write failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pwifs
