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

#include "tensor.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace lodem {

LodTensor LodTensor::FromEntries(std::size_t scanner_count,
                                 std::size_t link_count,
                                 std::vector<TensorEntry> entries) {
  for (const auto& e : entries) {
    if (e.key.origin >= scanner_count || e.key.destination >= scanner_count ||
        e.key.link >= link_count) {
      Fail(ErrorKind::kArgument, "tensor index out of range");
    }
    if (!std::isfinite(e.value) || e.value < 0.0) {
      Fail(ErrorKind::kArgument, "tensor values must be finite and >= 0");
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const TensorEntry& a, const TensorEntry& b) {
                     return a.key < b.key;
                   });
  LodTensor t(scanner_count, link_count);
  for (const auto& e : entries) {
    if (!t.entries_.empty() && t.entries_.back().key == e.key) {
      t.entries_.back().value += e.value;
    } else {
      t.entries_.push_back(e);
    }
  }
  std::erase_if(t.entries_, [](const TensorEntry& e) { return e.value == 0.0; });
  return t;
}

double LodTensor::At(const TensorKey& key) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), key,
      [](const TensorEntry& e, const TensorKey& k) { return e.key < k; });
  return it != entries_.end() && it->key == key ? it->value : 0.0;
}

std::span<const TensorEntry> LodTensor::OdSlice(std::size_t origin,
                                                std::size_t destination) const {
  TensorKey lo{origin, destination, 0};
  auto first = std::lower_bound(
      entries_.begin(), entries_.end(), lo,
      [](const TensorEntry& e, const TensorKey& k) { return e.key < k; });
  auto last = first;
  while (last != entries_.end() && last->key.origin == origin &&
         last->key.destination == destination) {
    ++last;
  }
  return {entries_.data() + (first - entries_.begin()),
          static_cast<std::size_t>(last - first)};
}

std::vector<TensorEntry> LodTensor::LinkSlice(std::size_t link) const {
  std::vector<TensorEntry> out;
  for (const auto& e : entries_) {
    if (e.key.link == link) out.push_back(e);
  }
  return out;
}

double LodTensor::Sum() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value;
  return s;
}

LodTensor LodTensor::Scaled(double factor) const {
  std::vector<TensorEntry> out(entries_.begin(), entries_.end());
  for (auto& e : out) e.value *= factor;
  return FromEntries(scanner_count_, link_count_, std::move(out));
}

bool LodTensor::operator==(const LodTensor& other) const {
  if (scanner_count_ != other.scanner_count_ ||
      link_count_ != other.link_count_ || nnz() != other.nnz()) {
    return false;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].key != other.entries_[i].key ||
        entries_[i].value != other.entries_[i].value) {
      return false;
    }
  }
  return true;
}

}  // namespace lodem
