// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <stdexcept>
#include <string>

namespace dlcm {

enum class ErrorCode {
  non_rectangular,
  negative_code,
  bad_cell,
  empty_set,
  pattern_out_of_range,
  all_classes_zero_mass,
  dimension_mismatch,
  too_many_domains,
  sizes_dont_sum_to_j,
  too_few_distinct_rows,
  no_valid_proposal,
  config_invalid,
  empty_matrix,
  too_few_chains,
  io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dlcm
