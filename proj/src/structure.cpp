// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/structure.hpp"

#include <algorithm>
#include <map>

#include "dlcm/error.hpp"

namespace dlcm {

std::vector<int> normalize_equivalence(StructureMode mode, std::vector<int> equivalence, int C) {
  switch (mode) {
    case StructureMode::homogeneous: return std::vector<int>(C, 0);
    case StructureMode::heterogeneous: {
      std::vector<int> e(C);
      for (int c = 0; c < C; ++c) e[c] = c;
      return e;
    }
    case StructureMode::partial:
      if (static_cast<int>(equivalence.size()) != C)
        throw Error(ErrorCode::config_invalid, "E must have one entry per class");
      // relabel groups by first appearance so equal groupings compare equal
      std::map<int, int> ids;
      for (int& e : equivalence) {
        auto it = ids.try_emplace(e, static_cast<int>(ids.size())).first;
        e = it->second;
      }
      return equivalence;
  }
  return equivalence;
}

DomainStructure::DomainStructure(int items, int classes, int slots, StructureMode mode,
                                 std::vector<int> equivalence)
    : J_(items), C_(classes), D_(slots), mode_(mode) {
  if (J_ < 1 || C_ < 1) throw Error(ErrorCode::config_invalid, "need J >= 1 and C >= 1");
  if (D_ < J_) throw Error(ErrorCode::config_invalid, "need at least J domain slots");
  equivalence_ = normalize_equivalence(mode, std::move(equivalence), C_);
  delta_.resize(static_cast<size_t>(J_) * C_);
  for (int c = 0; c < C_; ++c)
    for (int j = 0; j < J_; ++j) delta_[static_cast<size_t>(c) * J_ + j] = j;
}

DomainStructure DomainStructure::from_partitions(const std::vector<Partition>& per_class, int items,
                                                 int classes, int slots, StructureMode mode,
                                                 std::vector<int> equivalence) {
  if (per_class.size() != 1 && static_cast<int>(per_class.size()) != classes)
    throw Error(ErrorCode::dimension_mismatch, "need one partition or one per class");
  const int C = classes;
  DomainStructure s(items, C, slots, mode, std::move(equivalence));
  for (int c = 0; c < C; ++c) {
    const Partition& p = per_class[per_class.size() == 1 ? 0 : c];
    std::vector<int> col(items, -1);
    int d = 0;
    for (const auto& block : p) {
      if (block.empty()) continue;
      if (d >= slots) throw Error(ErrorCode::too_many_domains, "partition has more blocks than slots");
      for (int j : block) {
        if (j < 0 || j >= items || col[j] != -1)
          throw Error(ErrorCode::config_invalid, "partition blocks must cover each item exactly once");
        col[j] = d;
      }
      ++d;
    }
    if (std::count(col.begin(), col.end(), -1))
      throw Error(ErrorCode::config_invalid, "partition does not cover every item");
    s.set_column(c, col);
  }
  s.check();
  return s;
}

void DomainStructure::set_column(int cls, std::span<const int> column) {
  if (static_cast<int>(column.size()) != J_) throw Error(ErrorCode::dimension_mismatch, "column length");
  std::copy(column.begin(), column.end(), delta_.begin() + static_cast<long>(cls) * J_);
}

void DomainStructure::set_group_column(int cls, std::span<const int> column) {
  const int g = equivalence_[cls];
  for (int c = 0; c < C_; ++c)
    if (equivalence_[c] == g) set_column(c, column);
}

std::vector<std::vector<int>> DomainStructure::groups() const {
  std::vector<std::vector<int>> out;
  std::map<int, size_t> where;
  for (int c = 0; c < C_; ++c) {
    auto [it, fresh] = where.try_emplace(equivalence_[c], out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(c);
  }
  return out;
}

Partition DomainStructure::partition(int cls) const { return partition_of(column(cls)); }

std::vector<int> DomainStructure::nonempty_domains(int cls) const {
  std::vector<int> sizes = domain_sizes(cls);
  std::vector<int> out;
  for (int d = 0; d < D_; ++d)
    if (sizes[d] > 0) out.push_back(d);
  return out;
}

std::vector<int> DomainStructure::domain_sizes(int cls) const {
  std::vector<int> sizes(D_, 0);
  for (int v : column(cls)) ++sizes[v];
  return sizes;
}

int DomainStructure::max_domain_size() const {
  int best = 0;
  for (int c = 0; c < C_; ++c) {
    auto s = domain_sizes(c);
    best = std::max(best, *std::max_element(s.begin(), s.end()));
  }
  return best;
}

void DomainStructure::set_mode(StructureMode mode, std::vector<int> equivalence) {
  auto e = normalize_equivalence(mode, std::move(equivalence), C_);
  std::swap(mode_, mode);
  std::swap(equivalence_, e);
  try {
    check();
  } catch (...) {
    std::swap(mode_, mode);
    std::swap(equivalence_, e);
    throw;
  }
}

void DomainStructure::check() const {
  for (int v : delta_)
    if (v < 0 || v >= D_) throw Error(ErrorCode::config_invalid, "domain id outside 0..D-1");
  for (int c = 1; c < C_; ++c)
    for (int c0 = 0; c0 < c; ++c0)
      if (equivalence_[c] == equivalence_[c0]) {
        if (partition(c) != partition(c0))
          throw Error(ErrorCode::config_invalid, "classes sharing a group must share a partition");
        break;
      }
}

std::vector<int> canonical_column(std::span<const int> column) {
  std::map<int, int> relabel;
  std::vector<int> out(column.size());
  for (size_t j = 0; j < column.size(); ++j) {
    auto it = relabel.try_emplace(column[j], static_cast<int>(relabel.size())).first;
    out[j] = it->second;
  }
  return out;
}

DomainStructure canonicalize(const DomainStructure& s) {
  DomainStructure out = s;
  for (int c = 0; c < s.classes(); ++c) out.set_column(c, canonical_column(s.column(c)));
  return out;
}

bool structures_equal(const DomainStructure& a, const DomainStructure& b) {
  if (a.items() != b.items() || a.classes() != b.classes())
    throw Error(ErrorCode::dimension_mismatch, "structures differ in J or C");
  for (int c = 0; c < a.classes(); ++c)
    if (canonical_column(a.column(c)) != canonical_column(b.column(c))) return false;
  return true;
}

bool structures_match(const DomainStructure& a, const DomainStructure& b) {
  if (a.items() != b.items() || a.classes() != b.classes())
    throw Error(ErrorCode::dimension_mismatch, "structures differ in J or C");
  const int C = a.classes();
  std::vector<std::vector<int>> ca, cb;
  for (int c = 0; c < C; ++c) {
    ca.push_back(canonical_column(a.column(c)));
    cb.push_back(canonical_column(b.column(c)));
  }
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  return ca == cb;
}

Partition partition_of(std::span<const int> column) {
  std::map<int, std::vector<int>> blocks;
  for (size_t j = 0; j < column.size(); ++j) blocks[column[j]].push_back(static_cast<int>(j));
  Partition p;
  for (auto& [d, items] : blocks) p.push_back(std::move(items));
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace dlcm
