#include "cbsql/observation.hpp"

#include <charconv>

#include "cbsql/errors.hpp"

namespace cbsql {

std::string state_key(const Observation& obs) {
  std::string key;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i > 0) key += ':';
    key += std::to_string(obs[i]);
  }
  return key;
}

Observation parse_state_key(const std::string& key) {
  Observation obs;
  const char* first = key.data();
  const char* last = key.data() + key.size();
  while (true) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) throw InvalidObservation("malformed state key '" + key + "'");
    obs.push_back(value);
    if (ptr == last) break;
    if (*ptr != ':') throw InvalidObservation("malformed state key '" + key + "'");
    first = ptr + 1;
  }
  return obs;
}

}  // namespace cbsql
