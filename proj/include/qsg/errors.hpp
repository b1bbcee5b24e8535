#pragma once

#include <stdexcept>
#include <string>

namespace qsg {

// Invalid arguments or ill-formed inputs (bad site index, dimension mismatch, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed or produced an out-of-tolerance result
// (eigensolver non-convergence, imaginary residue above threshold, ...).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Resource caps: system size, term count.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed configuration / command line.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qsg
