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

#include "optprobe/layout.hpp"

#include "optprobe/errors.hpp"

namespace optprobe {

GroupLayout::GroupLayout(std::vector<Group> groups) : groups_(std::move(groups)) {
  offsets_.reserve(groups_.size());
  for (const Group& g : groups_) {
    if (g.size() == 0) throw contract_error("layout group '" + g.name + "' is empty");
    offsets_.push_back(dim_);
    dim_ += g.size();
  }
  if (dim_ == 0) throw contract_error("layout has no groups");
}

GroupLayout GroupLayout::single_vector(std::size_t n, std::string name) {
  return GroupLayout({Group{std::move(name), n, 0}});
}

bool GroupLayout::operator==(const GroupLayout& other) const {
  if (groups_.size() != other.groups_.size()) return false;
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    const Group& a = groups_[i];
    const Group& b = other.groups_[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols) return false;
  }
  return true;
}

}  // namespace optprobe
