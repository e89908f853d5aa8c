#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trapwalk {

struct OracleCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;  // headline measured quantity
  std::string detail;
};

// Exact-formula checks that need no long walks.
OracleCheck oracle_star_exit_law();
OracleCheck oracle_exit_law_vs_network(int instances, std::uint64_t seed);
OracleCheck oracle_half_excursions(std::int64_t samples, std::uint64_t seed);
OracleCheck oracle_crossing_bound(int networks, std::uint64_t seed);
OracleCheck oracle_regen_hand_trace();
OracleCheck oracle_kernel_contracts(std::int64_t vertices, std::uint64_t seed);

std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed);

}  // namespace trapwalk
