// Copyright 2026 The Authors.
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

// Embedding files and selection output.
//
// Binary layout, all integers and floats little-endian:
//
//   offset  size  field
//   0       8     magic "SIFTEMB1"
//   8       4     version (u32, = 1)
//   12      4     count n (u32)
//   16      4     dim d (u32)
//   20      4*n*d row-major IEEE-754 binary32 payload
//
// CSV: one embedding per line, ',' separated, '.' decimal point, lines
// starting with '#' skipped. An optional header line is recognized when its
// fields are not all numbers; if its first field is "id", the first column of
// every row is a string id.
//
// Selection output is JSON Lines: one object per selected row
// {rank, row, id, objective, sigma_sq} followed by a summary object
// {method, lambda_prime, n, sigma0_sq, sigma_final_sq}.

#pragma once

#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sift/core.hpp"
#include "sift/selectors.hpp"

namespace sift::io {

enum class Format { kBinary, kCsv };

inline constexpr std::array<char, 8> kMagic = {'S', 'I', 'F', 'T', 'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 20;

struct EmbeddingFileHeader {
  std::array<char, 8> magic = kMagic;
  std::uint32_t version = kVersion;
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
};

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                 static_cast<char>((v >> 16) & 0xFF),
                                 static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                          : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Parses a whole field as a double; "nan"/"inf" parse and are caught later.
inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string float_text(float v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(std::numeric_limits<float>::max_digits10) << v;
  return os.str();
}

}  // namespace detail

inline void write_embeddings_binary(const EmbeddingSet& e, std::ostream& out) {
  if (e.rows() > std::numeric_limits<std::uint32_t>::max() ||
      e.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidParameter("embedding set too large for the binary format");
  }
  out.write(kMagic.data(), kMagic.size());
  detail::put_u32(out, kVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(e.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(e.dim()));
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t j = 0; j < e.dim(); ++j) {
      const auto bits = std::bit_cast<std::uint32_t>(
          static_cast<float>(e.data()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      detail::put_u32(out, bits);
    }
  }
}

inline void write_embeddings_csv(const EmbeddingSet& e, std::ostream& out) {
  out << "id";
  for (std::size_t j = 0; j < e.dim(); ++j) out << ",v" << j;
  out << '\n';
  for (std::size_t i = 0; i < e.rows(); ++i) {
    const std::string id = e.id(i);
    if (id.find_first_of(",\n\r") != std::string::npos || (!id.empty() && id.front() == '#')) {
      throw InvalidParameter("id \"" + id + "\" cannot be written to CSV");
    }
    out << id;
    for (std::size_t j = 0; j < e.dim(); ++j) {
      out << ',' << detail::float_text(static_cast<float>(
                        e.data()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    out << '\n';
  }
}

/// Path of the optional id sidecar of a binary embedding file: one id per
/// line, in row order.
inline std::string id_sidecar_path(const std::string& path) { return path + ".ids"; }

inline void write_embeddings(const EmbeddingSet& e, const std::string& path, Format format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  if (format == Format::kBinary) {
    write_embeddings_binary(e, out);
  } else {
    write_embeddings_csv(e, out);
  }
  out.flush();
  if (!out) throw IoError(path + ": write failed");

  if (format == Format::kBinary && e.has_ids()) {
    const std::string sidecar = id_sidecar_path(path);
    std::ofstream ids(sidecar, std::ios::binary);
    if (!ids) throw IoError(sidecar + ": cannot open for writing");
    for (const std::string& id : e.ids()) {
      if (id.find_first_of("\n\r") != std::string::npos) {
        throw InvalidParameter("id \"" + id + "\" cannot be written to an id sidecar");
      }
      ids << id << '\n';
    }
    ids.flush();
    if (!ids) throw IoError(sidecar + ": write failed");
  } else if (format == Format::kBinary) {
    std::error_code ec;  // a stale sidecar would attach the wrong ids
    std::filesystem::remove(id_sidecar_path(path), ec);
  }
}

inline EmbeddingSet read_embeddings_binary(std::istream& in, const std::string& path = "<stream>") {
  std::array<unsigned char, kHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got >= kMagic.size() && std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
    throw BadMagic(path);
  }
  if (got < kHeaderBytes) {
    if (got < kMagic.size()) throw BadMagic(path);
    throw TruncatedPayload(path, kHeaderBytes, got);
  }
  EmbeddingFileHeader h;
  h.version = detail::get_u32(header.data() + 8);
  h.count = detail::get_u32(header.data() + 12);
  h.dim = detail::get_u32(header.data() + 16);
  if (h.version != kVersion) {
    throw FormatError(path + ": unsupported version " + std::to_string(h.version));
  }

  const std::size_t n = h.count;
  const std::size_t d = h.dim;
  const std::size_t expected = n * d * 4;
  // Check the length up front on seekable streams so a corrupt header cannot
  // trigger a huge allocation.
  if (const auto here = in.tellg(); here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(here);
    if (end != std::streampos(-1)) {
      const auto available = static_cast<std::size_t>(end - here);
      if (available != expected) throw TruncatedPayload(path, expected, available);
    }
  }
  RowMatrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<unsigned char> buf(d * 4);
  std::size_t read_bytes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    read_bytes += static_cast<std::size_t>(in.gcount());
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
      throw TruncatedPayload(path, expected, read_bytes);
    }
    for (std::size_t j = 0; j < d; ++j) {
      const float v = std::bit_cast<float>(detail::get_u32(buf.data() + 4 * j));
      if (!std::isfinite(v)) throw NonFiniteValue(i, j);
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  // Anything after the payload means n * d disagrees with the file length.
  char extra[4096];
  std::size_t trailing = 0;
  while (in.read(extra, sizeof(extra)) || in.gcount() > 0) {
    trailing += static_cast<std::size_t>(in.gcount());
  }
  if (trailing != 0) throw TruncatedPayload(path, expected, read_bytes + trailing);
  return EmbeddingSet(std::move(data));
}

inline EmbeddingSet read_embeddings_csv(std::istream& in, const std::string& path = "<stream>") {
  std::vector<double> values;
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::size_t rows = 0;
  bool seen_first = false;
  bool has_id_column = false;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = detail::split(view);

    if (!seen_first) {
      seen_first = true;
      bool numeric = true;
      double tmp = 0.0;
      for (auto f : fields) numeric = numeric && detail::parse_double(f, tmp);
      if (!numeric) {
        has_id_column = fields.front() == "id";
        dim = fields.size() - (has_id_column ? 1 : 0);
        continue;
      }
      dim = fields.size();
    }

    const std::size_t offset = has_id_column ? 1 : 0;
    if (fields.size() != dim + offset) throw RaggedRow(path, rows);
    if (has_id_column) ids.emplace_back(fields.front());
    for (std::size_t j = 0; j < dim; ++j) {
      double v = 0.0;
      if (!detail::parse_double(fields[j + offset], v)) {
        throw FormatError(path + ": unparsable value at row " + std::to_string(rows) +
                          ", column " + std::to_string(j));
      }
      if (!std::isfinite(v)) throw NonFiniteValue(rows, j);
      values.push_back(v);
    }
    ++rows;
  }
  RowMatrix data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  if (rows > 0) {
    data = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(rows),
                                       static_cast<Eigen::Index>(dim));
  }
  return EmbeddingSet(std::move(data), std::move(ids));
}

inline EmbeddingSet read_embeddings(const std::string& path, Format format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  if (format == Format::kCsv) return read_embeddings_csv(in, path);

  EmbeddingSet e = read_embeddings_binary(in, path);
  const std::string sidecar = id_sidecar_path(path);
  std::ifstream ids_in(sidecar, std::ios::binary);
  if (!ids_in) return e;
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(ids_in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  if (ids.size() != e.rows()) {
    throw FormatError(sidecar + ": " + std::to_string(ids.size()) + " ids for " +
                      std::to_string(e.rows()) + " rows");
  }
  return EmbeddingSet(e.data(), std::move(ids));
}

struct SelectionLine {
  std::size_t rank = 0;
  std::size_t row = 0;
  std::string id;
  double objective = 0.0;
  double sigma_sq = 0.0;
};

struct SelectionSummary {
  std::string method;
  double lambda_prime = 0.0;
  std::size_t n = 0;
  double sigma0_sq = 0.0;
  double sigma_final_sq = 0.0;
};

/// Writes one JSON object per selected row, then the summary object.
/// `candidates` supplies ids and original row indices for result.order.
inline void write_selection(const SelectionResult& result, const EmbeddingSet& candidates,
                            std::ostream& out) {
  for (std::size_t i = 0; i < result.order.size(); ++i) {
    const std::size_t r = result.order[i];
    if (r >= candidates.rows()) throw InvalidParameter("selection index out of range");
    nlohmann::ordered_json line;
    line["rank"] = i + 1;
    line["row"] = candidates.source_row(r);
    line["id"] = candidates.id(r);
    line["objective"] = result.objective_trace[i];
    line["sigma_sq"] = result.sigma_trace[i + 1];
    out << line.dump() << '\n';
  }
  nlohmann::ordered_json summary;
  summary["method"] = method_name(result.method);
  summary["lambda_prime"] = result.lambda_prime;
  summary["n"] = result.order.size();
  summary["sigma0_sq"] = result.sigma0_sq();
  summary["sigma_final_sq"] = result.final_sigma_sq();
  out << summary.dump() << '\n';
}

inline void write_selection(const SelectionResult& result, const EmbeddingSet& candidates,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open for writing");
  write_selection(result, candidates, out);
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

struct ParsedSelection {
  std::vector<SelectionLine> lines;
  SelectionSummary summary;
};

inline ParsedSelection read_selection(std::istream& in) {
  ParsedSelection out;
  std::string text;
  bool have_summary = false;
  while (std::getline(in, text)) {
    if (detail::trim(text).empty()) continue;
    if (have_summary) throw FormatError("selection output continues after the summary line");
    const auto j = nlohmann::json::parse(text);
    if (j.contains("method")) {
      out.summary.method = j.at("method").get<std::string>();
      out.summary.lambda_prime = j.at("lambda_prime").get<double>();
      out.summary.n = j.at("n").get<std::size_t>();
      out.summary.sigma0_sq = j.at("sigma0_sq").get<double>();
      out.summary.sigma_final_sq = j.at("sigma_final_sq").get<double>();
      have_summary = true;
      continue;
    }
    SelectionLine line;
    line.rank = j.at("rank").get<std::size_t>();
    line.row = j.at("row").get<std::size_t>();
    line.id = j.at("id").get<std::string>();
    line.objective = j.at("objective").get<double>();
    line.sigma_sq = j.at("sigma_sq").get<double>();
    out.lines.push_back(std::move(line));
  }
  if (!have_summary) throw FormatError("selection output has no summary line");
  return out;
}

}  // namespace sift::io
