// Copyright 2026 The lodem Authors
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

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace lodem {

// (origin scanner, destination scanner, link), all dense indices.
struct TensorKey {
  std::size_t origin = 0;
  std::size_t destination = 0;
  std::size_t link = 0;

  auto operator<=>(const TensorKey&) const = default;
};

struct TensorEntry {
  TensorKey key;
  double value = 0.0;
};

// Sparse nonnegative link-origin-destination tensor. Entries are kept sorted
// by (origin, destination, link); only nonzero values are stored, so the
// support is exactly the set of positive entries.
class LodTensor {
 public:
  LodTensor() = default;
  LodTensor(std::size_t scanner_count, std::size_t link_count)
      : scanner_count_(scanner_count), link_count_(link_count) {}

  // Sums duplicate keys and drops zeros. Throws kArgument on out-of-range
  // indices or negative / non-finite values.
  static LodTensor FromEntries(std::size_t scanner_count,
                               std::size_t link_count,
                               std::vector<TensorEntry> entries);

  std::size_t scanner_count() const { return scanner_count_; }
  std::size_t link_count() const { return link_count_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const TensorEntry> entries() const { return entries_; }

  double At(const TensorKey& key) const;
  double At(std::size_t o, std::size_t d, std::size_t l) const {
    return At(TensorKey{o, d, l});
  }
  std::span<const TensorEntry> OdSlice(std::size_t origin,
                                       std::size_t destination) const;
  std::vector<TensorEntry> LinkSlice(std::size_t link) const;
  double Sum() const;
  LodTensor Scaled(double factor) const;

  bool operator==(const LodTensor& other) const;

 private:
  std::size_t scanner_count_ = 0;
  std::size_t link_count_ = 0;
  std::vector<TensorEntry> entries_;
};

}  // namespace lodem
