#pragma once

#include <cstdint>
#include <iosfwd>

/// Quick invariant checks on random instances. Prints one line per check and
/// returns the number of failures.
int run_validate_suite(std::ostream& out, std::uint64_t seed);
