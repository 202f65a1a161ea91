// Copyright 2026 The wordbot Authors.
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

// Command vectors: word2vec binary I/O, cosine similarity, synthesis of
// vectors with prescribed pairwise cosines, and the permuted control
// vectors.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wordbot/random.hpp"

namespace wordbot {

static_assert(std::numeric_limits<float>::is_iec559, "IEEE 754 floats required");

// Raised for malformed word2vec input. `offset` is the byte offset at which
// the problem was detected; `record` is the 0-based word index, or -1 for
// header problems.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset, long record = -1)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset),
        record_(record) {}
  std::size_t offset() const { return offset_; }
  long record() const { return record_; }

 private:
  std::size_t offset_;
  long record_;
};

class UnknownWordError : public std::out_of_range {
 public:
  explicit UnknownWordError(std::string word)
      : std::out_of_range("unknown word: '" + word + "'"), word_(std::move(word)) {}
  const std::string& word() const { return word_; }

 private:
  std::string word_;
};

enum class Provenance { kLoaded, kSynthesized, kPermuted };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kLoaded: return "loaded";
    case Provenance::kSynthesized: return "synthesized";
    case Provenance::kPermuted: return "permuted";
  }
  return "?";
}

struct CommandVector {
  std::string label;
  std::vector<double> values;
  Provenance provenance = Provenance::kLoaded;
  // For permuted vectors: values[i] == source[permutation[i]].
  std::vector<std::size_t> permutation;

  std::size_t dim() const { return values.size(); }
  bool operator==(const CommandVector&) const = default;
};

// Word -> fixed-length float vector, in insertion order.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("embedding dimension must be >= 1");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  std::span<const float> vector(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  bool contains(std::string_view word) const { return index_.count(std::string(word)) != 0; }

  void insert(std::string word, std::span<const float> values) {
    if (values.size() != dim_)
      throw std::invalid_argument("vector for '" + word + "' has length " +
                                  std::to_string(values.size()) + ", expected " +
                                  std::to_string(dim_));
    if (word.empty() || word.find(' ') != std::string::npos)
      throw std::invalid_argument("word must be non-empty and contain no spaces");
    if (contains(word)) throw std::invalid_argument("duplicate word '" + word + "'");
    index_.emplace(word, words_.size());
    words_.push_back(std::move(word));
    data_.insert(data_.end(), values.begin(), values.end());
  }

  std::size_t index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) throw UnknownWordError(std::string(word));
    return it->second;
  }

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline float load_f32_le(const unsigned char* p) {
  std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                       std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
  return std::bit_cast<float>(bits);
}

inline void store_f32_le(float f, std::string& out) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xffu));
}

inline std::size_t parse_header_field(std::string_view bytes, std::size_t& pos, char terminator) {
  const std::size_t start = pos;
  std::size_t value = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    const std::size_t digit = static_cast<std::size_t>(bytes[pos] - '0');
    if (value > (std::numeric_limits<std::size_t>::max() - digit) / 10)
      throw FormatError("malformed header: number too large", start);
    value = value * 10 + digit;
    ++pos;
  }
  if (pos == start) throw FormatError("malformed header: expected a decimal count", pos);
  if (pos >= bytes.size() || bytes[pos] != terminator)
    throw FormatError(std::string("malformed header: expected ") +
                          (terminator == ' ' ? "space" : "newline"),
                      pos);
  ++pos;
  return value;
}

}  // namespace detail

// Header "<count> <dim>\n", then per entry: word bytes, 0x20, dim
// little-endian float32 values, optionally 0x0A.
inline EmbeddingTable parse_word2vec_bin(std::string_view bytes) {
  std::size_t pos = 0;
  const std::size_t count = detail::parse_header_field(bytes, pos, ' ');
  const std::size_t dim = detail::parse_header_field(bytes, pos, '\n');
  if (dim == 0) throw FormatError("malformed header: dimension must be >= 1", pos - 1);

  EmbeddingTable table(dim);
  std::vector<float> values(dim);
  const std::size_t record_bytes = dim * sizeof(float);
  for (std::size_t i = 0; i < count; ++i) {
    if (pos < bytes.size() && bytes[pos] == '\n') ++pos;
    if (pos >= bytes.size())
      throw FormatError("declared count mismatch: header declares " + std::to_string(count) +
                            " words, stream holds " + std::to_string(i),
                        pos, static_cast<long>(i));
    const std::size_t word_start = pos;
    const auto space = bytes.find(' ', pos);
    if (space == std::string_view::npos)
      throw FormatError("truncated record " + std::to_string(i) + ": word not terminated",
                        bytes.size(), static_cast<long>(i));
    std::string word(bytes.substr(word_start, space - word_start));
    if (word.empty()) throw FormatError("empty word in record " + std::to_string(i), word_start,
                                        static_cast<long>(i));
    pos = space + 1;
    if (bytes.size() - pos < record_bytes)
      throw FormatError("truncated record " + std::to_string(i) + " ('" + word + "'): need " +
                            std::to_string(record_bytes) + " vector bytes, have " +
                            std::to_string(bytes.size() - pos),
                        bytes.size(), static_cast<long>(i));
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t d = 0; d < dim; ++d) values[d] = detail::load_f32_le(raw + 4 * d);
    pos += record_bytes;
    if (table.contains(word))
      throw FormatError("duplicate word '" + word + "' in record " + std::to_string(i),
                        word_start, static_cast<long>(i));
    table.insert(std::move(word), values);
  }
  if (pos < bytes.size() && bytes[pos] == '\n') ++pos;
  if (pos != bytes.size())
    throw FormatError("declared count mismatch: data continues after " + std::to_string(count) +
                          " declared words",
                      pos, static_cast<long>(count));
  return table;
}

inline std::string write_word2vec_bin(const EmbeddingTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  out.reserve(out.size() + table.size() * (table.dim() * 4 + 16));
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += table.words()[i];
    out.push_back(' ');
    for (float f : table.vector(i)) detail::store_f32_le(f, out);
    out.push_back('\n');
  }
  return out;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline EmbeddingTable load_word2vec_bin(const std::string& path) {
  return parse_word2vec_bin(read_file_bytes(path));
}

inline CommandVector lookup(const EmbeddingTable& table, std::string_view word) {
  const auto i = table.index_of(word);
  auto v = table.vector(i);
  return {std::string(word), std::vector<double>(v.begin(), v.end()), Provenance::kLoaded, {}};
}

inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine: length mismatch (" + std::to_string(u.size()) +
                                " vs " + std::to_string(v.size()) + ")");
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0 || vv == 0) throw std::invalid_argument("cosine: zero-norm input");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

inline double cosine(const CommandVector& a, const CommandVector& b) {
  return cosine(a.values, b.values);
}

struct GramSpec {
  std::vector<std::string> labels;
  Eigen::MatrixXd gram;

  std::size_t size() const { return labels.size(); }

  double at(std::string_view a, std::string_view b) const {
    auto find = [&](std::string_view w) {
      auto it = std::find(labels.begin(), labels.end(), w);
      if (it == labels.end()) throw UnknownWordError(std::string(w));
      return static_cast<Eigen::Index>(it - labels.begin());
    };
    return gram(find(a), find(b));
  }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (gram.rows() != n || gram.cols() != n)
      throw std::invalid_argument("Gram matrix must be " + std::to_string(n) + "x" +
                                  std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      if (gram(i, i) != 1.0) throw std::invalid_argument("Gram diagonal must be 1");
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(gram(i, j)) || gram(i, j) < -1 || gram(i, j) > 1)
          throw std::invalid_argument("Gram entries must lie in [-1, 1]");
        if (gram(i, j) != gram(j, i)) throw std::invalid_argument("Gram must be symmetric");
      }
    }
  }
};

// Word2vec cosine similarities among the six command words.
inline GramSpec reference_command_gram() {
  GramSpec spec;
  spec.labels = {"forward", "backward", "halt", "stop", "suspend", "cease"};
  spec.gram.resize(6, 6);
  // clang-format off
  spec.gram <<
      1.00,  0.42, 0.15, 0.13, 0.11,  0.02,
      0.42,  1.00, 0.17, 0.17, 0.09, -0.01,
      0.15,  0.17, 1.00, 0.61, 0.63,  0.56,
      0.13,  0.17, 0.61, 1.00, 0.38,  0.50,
      0.11,  0.09, 0.63, 0.38, 1.00,  0.57,
      0.02, -0.01, 0.56, 0.50, 0.57,  1.00;
  // clang-format on
  return spec;
}

// Reference Gram extended with `foward` and `backwards` for the
// per-task-balanced command set. Same-task pairs get `within_task`; the new
// words otherwise copy the similarities of the word they stand in for.
inline GramSpec balanced_command_gram(double within_task = 0.55) {
  const GramSpec ref = reference_command_gram();
  GramSpec spec;
  spec.labels = {"forward", "foward", "backward", "backwards", "halt", "stop", "suspend", "cease"};
  const std::vector<std::string> stands_for = {"forward", "forward",  "backward", "backward",
                                               "halt",    "stop",     "suspend",  "cease"};
  const auto n = static_cast<Eigen::Index>(spec.labels.size());
  spec.gram.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j)
        spec.gram(i, j) = 1.0;
      else if (stands_for[i] == stands_for[j])
        spec.gram(i, j) = within_task;
      else
        spec.gram(i, j) = ref.at(stands_for[i], stands_for[j]);
    }
  return spec;
}

struct PsdRepair {
  Eigen::MatrixXd gram;
  double min_eigenvalue = 0;   // of the input
  double max_abs_delta = 0;    // max entry-wise |output - input|
  bool repaired = false;
};

// Eigenvalue clipping at 0 followed by diagonal renormalization. Inputs that
// are already PSD come back unchanged.
inline PsdRepair repair_gram(const Eigen::MatrixXd& input) {
  const Eigen::MatrixXd sym = 0.5 * (input + input.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  PsdRepair out;
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  if (out.min_eigenvalue >= 0) {
    out.gram = sym;
  } else {
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd c = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    Eigen::VectorXd d = c.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt();
    c = d.cwiseInverse().asDiagonal() * c * d.cwiseInverse().asDiagonal();
    c = 0.5 * (c + c.transpose());
    c.diagonal().setOnes();
    out.gram = c;
    out.repaired = true;
  }
  out.max_abs_delta = (out.gram - input).cwiseAbs().maxCoeff();
  return out;
}

inline Eigen::MatrixXd nearest_psd_repair(const Eigen::MatrixXd& gram) {
  return repair_gram(gram).gram;
}

struct Synthesis {
  std::vector<CommandVector> vectors;
  PsdRepair repair;
};

// Unit vectors in R^dim whose pairwise cosines reproduce the (repaired)
// Gram matrix: rows of a Gram factor are embedded through a seeded random
// orthonormal map, which spreads them over all `dim` coordinates.
inline Synthesis synthesize_from_gram(const GramSpec& spec, std::size_t dim, Seed seed) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  if (static_cast<Eigen::Index>(dim) < n)
    throw std::invalid_argument("synthesize_from_gram: dim (" + std::to_string(dim) +
                                ") must be >= number of commands (" + std::to_string(n) + ")");
  Synthesis out;
  out.repair = repair_gram(spec.gram);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.repair.gram);
  const Eigen::MatrixXd factor =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  Rng rng(derive_seed(seed, {stream::kSynthesis}));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gauss(static_cast<Eigen::Index>(dim), n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < gauss.rows(); ++r) gauss(r, c) = normal(rng);
  const Eigen::MatrixXd basis =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ() *
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), n);

  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = basis * factor.row(i).transpose();
    v.normalize();
    out.vectors.push_back({spec.labels[static_cast<std::size_t>(i)],
                           std::vector<double>(v.data(), v.data() + v.size()),
                           Provenance::kSynthesized,
                           {}});
  }
  return out;
}

// Reorders entries by a uniformly drawn permutation that depends only on
// `seed`. The value multiset is unchanged.
inline CommandVector permute(const CommandVector& v, Seed seed) {
  std::vector<std::size_t> perm(v.dim());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {stream::kPermutation}));
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  CommandVector out{v.label, std::vector<double>(v.dim()), Provenance::kPermuted, perm};
  for (std::size_t i = 0; i < perm.size(); ++i) out.values[i] = v.values[perm[i]];
  return out;
}

// Inverse of permute(): restores the source ordering.
inline std::vector<double> unpermute(const CommandVector& v) {
  if (v.permutation.size() != v.dim())
    throw std::invalid_argument("unpermute: vector carries no permutation");
  std::vector<double> out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[v.permutation[i]] = v.values[i];
  return out;
}

// Whitespace-separated text: first line holds the n labels, followed by n
// rows of n numbers. Lines starting with '#' are ignored.
inline GramSpec parse_gram_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  GramSpec spec;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    if (spec.labels.empty()) {
      for (std::string w; fields >> w;) spec.labels.push_back(w);
      continue;
    }
    std::vector<double> row;
    for (std::string tok; fields >> tok;) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw std::invalid_argument("Gram file: not a number: '" + tok + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const auto n = spec.labels.size();
  if (n == 0) throw std::invalid_argument("Gram file: missing label line");
  if (rows.size() != n) throw std::invalid_argument("Gram file: expected " + std::to_string(n) + " rows");
  spec.gram.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n)
      throw std::invalid_argument("Gram file: row " + std::to_string(i) + " has " +
                                  std::to_string(rows[i].size()) + " entries");
    for (std::size_t j = 0; j < n; ++j)
      spec.gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  spec.validate();
  return spec;
}

inline EmbeddingTable to_table(std::span<const CommandVector> vectors) {
  if (vectors.empty()) throw std::invalid_argument("to_table: no vectors");
  EmbeddingTable table(vectors.front().dim());
  std::vector<float> buf;
  for (const auto& v : vectors) {
    buf.assign(v.values.begin(), v.values.end());
    table.insert(v.label, buf);
  }
  return table;
}

}  // namespace wordbot
