// Copyright 2026 The Episode Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EPISODE_FORGE_EMBEDDINGS_H_
#define EPISODE_FORGE_EMBEDDINGS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "episode_forge/geometry.h"

namespace episode_forge {

// Dense class index. Labels are assigned in insertion order starting at 0,
// so a table built over a pool of C classes covers ids 0..C-1.
using ClassId = std::int32_t;

// Class label -> d-dimensional feature vector.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  // Appends at the next free id. Throws kDuplicateClass or
  // kDimensionMismatch.
  ClassId Add(std::string label, Vector embedding);
  // Places an entry at a caller-chosen id, e.g. to mirror a pool that
  // covers only part of a world. Throws as Add, or kDuplicateClass when the
  // id is taken.
  void Insert(ClassId id, std::string label, Vector embedding);

  std::size_t dim() const { return dim_; }
  // Number of entries present.
  std::size_t size() const { return count_; }
  // One past the largest id in use.
  std::size_t id_bound() const { return vectors_.size(); }
  bool empty() const { return count_ == 0; }
  bool Contains(ClassId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < vectors_.size() &&
           present_[static_cast<std::size_t>(id)];
  }
  // Present ids in ascending order.
  std::vector<ClassId> ids() const;

  // Throws kMissingEmbedding for ids outside the table.
  const Vector& at(ClassId id) const;
  const std::string& label(ClassId id) const;
  std::optional<ClassId> Find(const std::string& label) const;

  // Every embedding multiplied by `factor`.
  EmbeddingTable Scaled(double factor) const;

 private:
  std::size_t dim_;
  std::vector<std::string> labels_;
  std::vector<Vector> vectors_;
  std::vector<bool> present_;
  std::size_t count_ = 0;
  std::unordered_map<std::string, ClassId> by_label_;
};

// CSV with header `class_id,e0,...,e{d-1}` and one row per class.
// Errors carry the 1-based line number.
EmbeddingTable ParseEmbeddingsCsv(std::istream& in);
EmbeddingTable ReadEmbeddingsCsv(const std::filesystem::path& path);

// Shortest round-trip decimal literals, so Write -> Read is bit-exact.
void WriteEmbeddingsCsv(const EmbeddingTable& table, std::ostream& out);
void WriteEmbeddingsCsv(const EmbeddingTable& table,
                        const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly `v`.
std::string FormatDouble(double v);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_EMBEDDINGS_H_
