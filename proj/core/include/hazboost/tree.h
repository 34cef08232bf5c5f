// Copyright 2026 The hazboost Authors.
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

#ifndef HAZBOOST_TREE_H_
#define HAZBOOST_TREE_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hazboost/preprocess.h"

namespace hazboost {

enum class MissingDirection : std::uint8_t { kLeft = 0, kRight = 1 };

struct TreeNode {
  // Children are indices into Tree::nodes; -1 marks a leaf.
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t axis = 0;
  // Codes <= threshold go left.
  std::uint16_t threshold = 0;
  MissingDirection missing = MissingDirection::kLeft;
  // Split score of an internal node.
  double score = 0.0;
  // Leaf value gamma; the model subtracts learning_rate * value.
  double value = 0.0;

  bool is_leaf() const { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  // code_of(axis) returns the bin code of the point on that axis.
  template <typename CodeOf>
  std::size_t Route(CodeOf&& code_of) const {
    std::size_t node = 0;
    while (!nodes[node].is_leaf()) {
      const TreeNode& n = nodes[node];
      const BinCode code = code_of(n.axis);
      const bool go_left =
          code == kMissingCode ? n.missing == MissingDirection::kLeft : code <= n.threshold;
      node = static_cast<std::size_t>(go_left ? n.left : n.right);
    }
    return node;
  }

  std::size_t num_leaves() const;
  std::size_t num_internal() const { return nodes.size() - num_leaves(); }
  int depth() const;
  bool operator==(const Tree&) const = default;
};

}  // namespace hazboost

#endif  // HAZBOOST_TREE_H_
