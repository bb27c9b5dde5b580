// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/error.hpp"

namespace dlcm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::non_rectangular: return "NonRectangular";
    case ErrorCode::negative_code: return "NegativeCode";
    case ErrorCode::bad_cell: return "BadCell";
    case ErrorCode::empty_set: return "EmptySet";
    case ErrorCode::pattern_out_of_range: return "PatternOutOfRange";
    case ErrorCode::all_classes_zero_mass: return "AllClassesZeroMass";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::too_many_domains: return "TooManyDomains";
    case ErrorCode::sizes_dont_sum_to_j: return "SizesDontSumToJ";
    case ErrorCode::too_few_distinct_rows: return "TooFewDistinctRows";
    case ErrorCode::no_valid_proposal: return "NoValidProposal";
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::empty_matrix: return "EmptyMatrix";
    case ErrorCode::too_few_chains: return "TooFewChains";
    case ErrorCode::io: return "IoError";
  }
  return "Unknown";
}

}  // namespace dlcm
