// Copyright 2026 The Optprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace optprobe {

/// One named parameter group: a matrix (rows x cols) or a plain vector
/// (rows entries, cols == 0) occupying a contiguous slice of the flat
/// parameter vector.  Matrices are stored row-major.
struct Group {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;  // 0 marks a vector group

  bool is_matrix() const { return cols != 0; }
  std::size_t size() const { return is_matrix() ? rows * cols : rows; }
};

/// Partition of the flat parameter vector into disjoint, covering groups laid
/// out in declaration order.
class GroupLayout {
 public:
  GroupLayout() = default;
  explicit GroupLayout(std::vector<Group> groups);

  static GroupLayout single_vector(std::size_t n, std::string name = "params");

  std::size_t dim() const { return dim_; }
  std::size_t group_count() const { return groups_.size(); }
  const Group& group(std::size_t i) const { return groups_[i]; }
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  const std::vector<Group>& groups() const { return groups_; }

  bool operator==(const GroupLayout& other) const;

 private:
  std::vector<Group> groups_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_ = 0;
};

}  // namespace optprobe
