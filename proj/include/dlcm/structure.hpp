// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <span>
#include <vector>

#include "dlcm/types.hpp"

namespace dlcm {

// Blocks sorted by their smallest item, items ascending within a block.
using Partition = std::vector<std::vector<int>>;

class DomainStructure {
 public:
  DomainStructure() = default;
  // Starts with every item alone in slot j (identical in every class).
  DomainStructure(int items, int classes, int slots, StructureMode mode,
                  std::vector<int> equivalence = {});

  // A single partition is shared by every class.
  static DomainStructure from_partitions(const std::vector<Partition>& per_class, int items,
                                         int classes, int slots, StructureMode mode,
                                         std::vector<int> equivalence = {});

  int items() const { return J_; }
  int classes() const { return C_; }
  int slots() const { return D_; }
  StructureMode mode() const { return mode_; }
  const std::vector<int>& equivalence() const { return equivalence_; }

  int domain(int item, int cls) const { return delta_[static_cast<size_t>(cls) * J_ + item]; }
  std::span<const int> column(int cls) const {
    return {delta_.data() + static_cast<size_t>(cls) * J_, static_cast<size_t>(J_)};
  }
  // Raw write of one class. Grouping is not checked until check().
  void set_column(int cls, std::span<const int> column);
  // Writes the column to every class sharing cls's group.
  void set_group_column(int cls, std::span<const int> column);

  // Classes per group, groups ordered by their first class.
  std::vector<std::vector<int>> groups() const;
  Partition partition(int cls) const;
  std::vector<int> nonempty_domains(int cls) const;
  std::vector<int> domain_sizes(int cls) const;
  int max_domain_size() const;

  // Switches grouping; throws ConfigInvalid if the columns violate the new grouping.
  void set_mode(StructureMode mode, std::vector<int> equivalence = {});
  void check() const;

  const std::vector<int>& raw() const { return delta_; }
  bool operator==(const DomainStructure&) const = default;

 private:
  int J_ = 0, C_ = 0, D_ = 0;
  StructureMode mode_ = StructureMode::homogeneous;
  std::vector<int> equivalence_;
  std::vector<int> delta_;  // class-major, [c * J + j]
};

std::vector<int> normalize_equivalence(StructureMode mode, std::vector<int> equivalence, int C);

// Relabels every class column: nonempty domains 0,1,2,... by smallest member.
DomainStructure canonicalize(const DomainStructure& s);
std::vector<int> canonical_column(std::span<const int> column);
bool structures_equal(const DomainStructure& a, const DomainStructure& b);
// Like structures_equal but also allows any permutation of the class labels.
bool structures_match(const DomainStructure& a, const DomainStructure& b);

Partition partition_of(std::span<const int> column);

}  // namespace dlcm
