#pragma once

#include <string>
#include <vector>

namespace cbsql {

// A discrete observation: one symbol per factor. The chain walk exposes a
// single factor (state index); the grid exposes (x, y).
using Observation = std::vector<int>;

// Canonical text key for an observation: factors joined by ':' ("3", "1:2").
std::string state_key(const Observation& obs);

// Inverse of state_key. Throws InvalidObservation on malformed input.
Observation parse_state_key(const std::string& key);

}  // namespace cbsql
