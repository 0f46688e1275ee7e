// Copyright 2026 The QNAS Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace qnas {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration, or a file that fails validation.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Text or binary input that does not follow its declared format.
class FormatError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

/// A domain object violates one of its invariants.
class ValidationError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

/// NaN/Inf encountered, or an argument outside a mathematical domain.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Problem size exceeds what a backend can hold.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// More logical qubits than the device offers.
class InfeasibleError : public CapacityError {
  public:
    using CapacityError::CapacityError;
};

/// Wire or slot index outside its container.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// Wrong number of angles or wires for a gate kind.
class ArityError : public Error {
  public:
    using Error::Error;
};

/// Gate kind not handled by the requested operation.
class UnsupportedGateError : public Error {
  public:
    using Error::Error;
};

/// Two-qubit interaction between physical qubits that cannot be connected.
class RoutingError : public Error {
  public:
    using Error::Error;
};

/// SubCircuit description not legal for its design space.
class SpecError : public Error {
  public:
    using Error::Error;
};

} // namespace qnas
