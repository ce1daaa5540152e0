#pragma once

#include "transfusion/core_types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tfusion {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based stream key: hashes a base seed together with stream coordinates
/// (trial index, task index, purpose tag, ...). Distinct coordinate tuples give
/// unrelated seeds.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords);

Vector standard_normal(Rng& rng, Index n);
Matrix standard_normal(Rng& rng, Index rows, Index cols);

}  // namespace tfusion
