// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/types.hpp"

#include <algorithm>
#include <cmath>

#include "dlcm/error.hpp"

namespace dlcm {

const char* to_string(StructureMode mode) {
  switch (mode) {
    case StructureMode::homogeneous: return "homogeneous";
    case StructureMode::heterogeneous: return "heterogeneous";
    case StructureMode::partial: return "partial";
  }
  return "?";
}

const char* to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::uniform: return "uniform";
    case PriorKind::bucket: return "bucket";
    case PriorKind::pattern_adjusted: return "pattern_adjusted";
  }
  return "?";
}

StructureMode parse_mode(const std::string& s) {
  if (s == "homogeneous") return StructureMode::homogeneous;
  if (s == "heterogeneous") return StructureMode::heterogeneous;
  if (s == "partial") return StructureMode::partial;
  throw Error(ErrorCode::config_invalid, "unknown structure mode '" + s + "'");
}

PriorKind parse_prior_kind(const std::string& s) {
  if (s == "uniform") return PriorKind::uniform;
  if (s == "bucket") return PriorKind::bucket;
  if (s == "pattern_adjusted" || s == "pattern-adjusted" || s == "patternadjusted")
    return PriorKind::pattern_adjusted;
  throw Error(ErrorCode::config_invalid, "unknown prior kind '" + s + "'");
}

void Hyperparams::resolve(int J, int C, long total_iters) {
  if (alpha_c.empty()) alpha_c.assign(C, 1.0);
  if (D <= 0) D = std::max(J * J - 1, J);  // J=1 would otherwise leave no slot
  if (n_domain_iters <= 0) n_domain_iters = J;
  if (n_homo_iters < 0)
    n_homo_iters = static_cast<int>(std::min<long>(static_cast<long>(std::ceil(0.05 * total_iters)), 1000));
}

void Hyperparams::validate(int J, int C) const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::config_invalid, m); };
  if (static_cast<int>(alpha_c.size()) != C) bad("alpha_c must have one entry per class");
  for (double a : alpha_c)
    if (!(a > 0)) bad("alpha_c entries must be positive");
  if (!(alpha_theta > 0)) bad("alpha_theta must be positive");
  if (D < J) bad("D must be at least J");
  if (!(p_empty > 0 && p_empty < 1)) bad("p_empty must lie strictly between 0 and 1");
  if (n_domain_iters < 0) bad("nDomainIters must be nonnegative");
  if (max_items < 1) bad("MaxItems must be at least 1");
  if (n_homo_iters < 0) bad("nHomoItrs must be nonnegative");
  if (prior_kind == PriorKind::pattern_adjusted && alpha_theta != 1.0)
    bad("the pattern adjusted prior requires alpha_theta = 1");
}

}  // namespace dlcm
