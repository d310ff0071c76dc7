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

#include "episode_forge/embeddings.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <system_error>
#include <utility>

#include "episode_forge/error.h"

namespace episode_forge {
namespace {

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void ParseFail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParse,
              "embeddings line " + std::to_string(line) + ": " + what);
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {}

ClassId EmbeddingTable::Add(std::string label, Vector embedding) {
  const auto id = static_cast<ClassId>(vectors_.size());
  Insert(id, std::move(label), std::move(embedding));
  return id;
}

void EmbeddingTable::Insert(ClassId id, std::string label, Vector embedding) {
  if (id < 0) {
    throw Error(ErrorCode::kInvalidArgument, "class id must be >= 0");
  }
  if (embedding.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding for '" + label + "' has dimension " +
                    std::to_string(embedding.size()) + ", table has " +
                    std::to_string(dim_));
  }
  if (by_label_.contains(label)) {
    throw Error(ErrorCode::kDuplicateClass, "duplicate class '" + label + "'");
  }
  if (Contains(id)) {
    throw Error(ErrorCode::kDuplicateClass,
                "class id " + std::to_string(id) + " already present");
  }
  const auto slot = static_cast<std::size_t>(id);
  if (slot >= vectors_.size()) {
    vectors_.resize(slot + 1);
    labels_.resize(slot + 1);
    present_.resize(slot + 1, false);
  }
  by_label_.emplace(label, id);
  labels_[slot] = std::move(label);
  vectors_[slot] = std::move(embedding);
  present_[slot] = true;
  ++count_;
}

std::vector<ClassId> EmbeddingTable::ids() const {
  std::vector<ClassId> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    if (present_[i]) out.push_back(static_cast<ClassId>(i));
  }
  return out;
}

const Vector& EmbeddingTable::at(ClassId id) const {
  if (!Contains(id)) {
    throw Error(ErrorCode::kMissingEmbedding,
                "no embedding for class id " + std::to_string(id));
  }
  return vectors_[static_cast<std::size_t>(id)];
}

const std::string& EmbeddingTable::label(ClassId id) const {
  if (!Contains(id)) {
    throw Error(ErrorCode::kMissingEmbedding,
                "no embedding for class id " + std::to_string(id));
  }
  return labels_[static_cast<std::size_t>(id)];
}

std::optional<ClassId> EmbeddingTable::Find(const std::string& label) const {
  const auto it = by_label_.find(label);
  if (it == by_label_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable EmbeddingTable::Scaled(double factor) const {
  EmbeddingTable out(dim_);
  for (ClassId id : ids()) {
    Vector v = at(id);
    for (double& x : v) x *= factor;
    out.Insert(id, label(id), std::move(v));
  }
  return out;
}

EmbeddingTable ParseEmbeddingsCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  std::optional<EmbeddingTable> table;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = Trim(line);
    if (row.empty()) continue;
    const auto fields = SplitCsv(row);
    if (!have_header) {
      if (Trim(fields[0]) != "class_id") {
        ParseFail(line_no, "expected header starting with 'class_id'");
      }
      dim = fields.size() - 1;
      if (dim == 0) ParseFail(line_no, "header declares no embedding columns");
      for (std::size_t i = 0; i < dim; ++i) {
        if (Trim(fields[i + 1]) != "e" + std::to_string(i)) {
          ParseFail(line_no, "expected column 'e" + std::to_string(i) + "'");
        }
      }
      have_header = true;
      table.emplace(dim);
      continue;
    }
    if (fields.size() != dim + 1) {
      throw Error(ErrorCode::kRaggedRow,
                  "embeddings line " + std::to_string(line_no) + ": " +
                      std::to_string(fields.size() - 1) + " values, expected " +
                      std::to_string(dim));
    }
    const std::string label(Trim(fields[0]));
    if (label.empty()) ParseFail(line_no, "empty class_id");
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const std::string_view f = Trim(fields[i + 1]);
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[i]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        ParseFail(line_no, "bad number '" + std::string(f) + "'");
      }
    }
    if (table->Find(label)) {
      throw Error(ErrorCode::kDuplicateClass,
                  "embeddings line " + std::to_string(line_no) +
                      ": duplicate class '" + label + "'");
    }
    table->Add(label, std::move(v));
  }
  if (!table || table->empty()) {
    throw Error(ErrorCode::kEmptyInput, "embedding file has no classes");
  }
  return std::move(*table);
}

EmbeddingTable ReadEmbeddingsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  return ParseEmbeddingsCsv(in);
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void WriteEmbeddingsCsv(const EmbeddingTable& table, std::ostream& out) {
  out << "class_id";
  for (std::size_t i = 0; i < table.dim(); ++i) out << ",e" << i;
  out << '\n';
  for (ClassId id : table.ids()) {
    out << table.label(id);
    for (double x : table.at(id)) out << ',' << FormatDouble(x);
    out << '\n';
  }
}

void WriteEmbeddingsCsv(const EmbeddingTable& table,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  WriteEmbeddingsCsv(table, out);
}

}  // namespace episode_forge
