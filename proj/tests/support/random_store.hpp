// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include "horus/facts.hpp"

namespace horus::testing {

/// Small fact store over tiny domains (three transactions, three addresses,
/// a handful of steps and amounts) so that rule joins hit often.
FactStore random_store(std::mt19937_64& rng);

/// Transactions whose hashes no other random store uses, for monotonicity
/// checks.
FactStore random_unrelated_store(std::mt19937_64& rng);

}  // namespace horus::testing
