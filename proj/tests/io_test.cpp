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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sift/io.hpp"
#include "sift/selectors.hpp"
#include "test_util.hpp"

namespace sift::io {
namespace {

using testing::TempDir;

EmbeddingSet random_set(std::uint64_t seed, std::size_t n, std::size_t d, bool with_ids) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 3.0);
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  std::vector<std::string> ids;
  if (with_ids) {
    for (std::size_t i = 0; i < n; ++i) ids.push_back("doc-" + std::to_string(seed) + "-" + std::to_string(i));
  }
  return EmbeddingSet(m, ids);
}

void expect_same_at_float_precision(const EmbeddingSet& a, const EmbeddingSet& b) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.dim(), b.dim());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    EXPECT_EQ(a.id(i), b.id(i));
    for (std::size_t j = 0; j < a.dim(); ++j) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
      EXPECT_EQ(static_cast<float>(a.data()(r, c)), static_cast<float>(b.data()(r, c)));
    }
  }
}

std::string binary_bytes(const EmbeddingSet& e) {
  std::ostringstream out;
  write_embeddings_binary(e, out);
  return out.str();
}

TEST(Binary, RoundTripThroughFiles) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EmbeddingSet e = random_set(seed, 1 + seed * 3, 1 + seed % 7, seed % 2 == 0);
    const std::string path = dir.file("e" + std::to_string(seed) + ".bin");
    write_embeddings(e, path, Format::kBinary);
    expect_same_at_float_precision(e, read_embeddings(path, Format::kBinary));
  }
}

TEST(Binary, ReadValuesAreExactFloats) {
  const EmbeddingSet e = random_set(3, 5, 4, false);
  std::istringstream in(binary_bytes(e));
  const EmbeddingSet back = read_embeddings_binary(in);
  for (Eigen::Index i = 0; i < back.data().size(); ++i) {
    EXPECT_EQ(back.data().data()[i], static_cast<double>(static_cast<float>(e.data().data()[i])));
  }
}

TEST(Binary, LayoutIsLittleEndianAndFixed) {
  RowMatrix m(1, 2);
  m << 1.0, -2.0;
  const std::string bytes = binary_bytes(EmbeddingSet(m));
  const std::string expected("SIFTEMB1"
                             "\x01\x00\x00\x00"
                             "\x01\x00\x00\x00"
                             "\x02\x00\x00\x00"
                             "\x00\x00\x80\x3f"
                             "\x00\x00\x00\xc0",
                             28);
  EXPECT_EQ(bytes, expected);
}

TEST(Binary, BadMagic) {
  std::string bytes = binary_bytes(random_set(1, 2, 2, false));
  bytes.replace(0, 8, "XXXXXXXX");
  std::istringstream in(bytes);
  EXPECT_THROW(read_embeddings_binary(in), BadMagic);
  std::istringstream tiny("SIF");
  EXPECT_THROW(read_embeddings_binary(tiny), BadMagic);
}

TEST(Binary, TruncatedPayload) {
  const std::string bytes = binary_bytes(random_set(1, 3, 4, false));
  std::istringstream short_payload(bytes.substr(0, bytes.size() - 5));
  try {
    read_embeddings_binary(short_payload, "fixture.bin");
    FAIL() << "expected TruncatedPayload";
  } catch (const TruncatedPayload& e) {
    EXPECT_EQ(e.expected(), 48u);
    EXPECT_EQ(e.actual(), 43u);
  }
  std::istringstream short_header(bytes.substr(0, 14));
  EXPECT_THROW(read_embeddings_binary(short_header), TruncatedPayload);
  std::istringstream trailing(bytes + "abcd");
  EXPECT_THROW(read_embeddings_binary(trailing), TruncatedPayload);
}

TEST(Binary, HugeHeaderCountIsRejectedWithoutAllocating) {
  std::string bytes = binary_bytes(random_set(1, 1, 1, false));
  bytes[12] = bytes[13] = bytes[14] = bytes[15] = '\xff';
  bytes[16] = bytes[17] = bytes[18] = '\xff';
  std::istringstream in(bytes);
  EXPECT_THROW(read_embeddings_binary(in), TruncatedPayload);
}

TEST(Binary, UnsupportedVersion) {
  std::string bytes = binary_bytes(random_set(1, 1, 1, false));
  bytes[8] = '\x02';
  std::istringstream in(bytes);
  EXPECT_THROW(read_embeddings_binary(in), FormatError);
}

TEST(Binary, NonFiniteValue) {
  std::string bytes = binary_bytes(random_set(1, 2, 2, false));
  const std::uint32_t nan_bits = 0x7fc00000u;
  for (int b = 0; b < 4; ++b) bytes[20 + 12 + b] = static_cast<char>((nan_bits >> (8 * b)) & 0xff);
  std::istringstream in(bytes);
  try {
    read_embeddings_binary(in);
    FAIL() << "expected NonFiniteValue";
  } catch (const NonFiniteValue& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.col(), 1u);
  }
}

TEST(Binary, StaleIdSidecarIsRemoved) {
  TempDir dir;
  const std::string path = dir.file("e.bin");
  write_embeddings(random_set(1, 3, 2, true), path, Format::kBinary);
  write_embeddings(random_set(2, 3, 2, false), path, Format::kBinary);
  EXPECT_EQ(read_embeddings(path, Format::kBinary).id(0), "0");
}

TEST(Binary, SidecarWithWrongCountIsAnError) {
  TempDir dir;
  const std::string path = dir.file("e.bin");
  write_embeddings(random_set(1, 3, 2, false), path, Format::kBinary);
  std::ofstream(id_sidecar_path(path)) << "only-one\n";
  EXPECT_THROW(read_embeddings(path, Format::kBinary), FormatError);
}

TEST(Csv, RoundTripThroughFiles) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EmbeddingSet e = random_set(seed, 1 + seed * 3, 1 + seed % 7, seed % 2 == 1);
    const std::string path = dir.file("e" + std::to_string(seed) + ".csv");
    write_embeddings(e, path, Format::kCsv);
    expect_same_at_float_precision(e, read_embeddings(path, Format::kCsv));
  }
}

TEST(Csv, HeaderCommentsAndIds) {
  std::istringstream in(
      "# exported embeddings\n"
      "id,x,y\n"
      "alpha, 1.5, -2\n"
      "\n"
      "# mid-file comment\n"
      "beta,3e-1,+4\n");
  const EmbeddingSet e = read_embeddings_csv(in);
  ASSERT_EQ(e.rows(), 2u);
  ASSERT_EQ(e.dim(), 2u);
  EXPECT_EQ(e.id(0), "alpha");
  EXPECT_EQ(e.id(1), "beta");
  EXPECT_DOUBLE_EQ(e.data()(1, 0), 0.3);
  EXPECT_DOUBLE_EQ(e.data()(1, 1), 4.0);
}

TEST(Csv, NoHeaderMeansDefaultIds) {
  std::istringstream in("1,2,3\r\n4,5,6\r\n");
  const EmbeddingSet e = read_embeddings_csv(in);
  ASSERT_EQ(e.rows(), 2u);
  EXPECT_EQ(e.dim(), 3u);
  EXPECT_EQ(e.id(1), "1");
}

TEST(Csv, HeaderWithoutIdColumn) {
  std::istringstream in("v0,v1\n1,2\n");
  const EmbeddingSet e = read_embeddings_csv(in);
  EXPECT_EQ(e.dim(), 2u);
  EXPECT_FALSE(e.has_ids());
}

TEST(Csv, RaggedRow) {
  std::istringstream in("id,v0,v1,v2\na,1,2,3\nb,1,2\n");
  try {
    read_embeddings_csv(in, "fixture.csv");
    FAIL() << "expected RaggedRow";
  } catch (const RaggedRow& e) {
    EXPECT_EQ(e.row(), 1u);
  }
}

TEST(Csv, NonFiniteAndGarbage) {
  std::istringstream nan_in("1,2\n3,nan\n");
  EXPECT_THROW(read_embeddings_csv(nan_in), NonFiniteValue);
  std::istringstream inf_in("1,inf\n");
  EXPECT_THROW(read_embeddings_csv(inf_in), NonFiniteValue);
  std::istringstream bad("1,2\n3,four\n");
  EXPECT_THROW(read_embeddings_csv(bad), FormatError);
}

TEST(Csv, RejectsUnwritableIds) {
  RowMatrix m(1, 1);
  m << 1;
  std::ostringstream out;
  EXPECT_THROW(write_embeddings_csv(EmbeddingSet(m, {"a,b"}), out), InvalidParameter);
}

TEST(Files, MissingFileIsAnIoError) {
  EXPECT_THROW(read_embeddings("/nonexistent/dir/e.bin", Format::kBinary), IoError);
}

TEST(Selection, WorkedInstanceFirstLine) {
  const auto w = testing::worked_instance();
  const SelectionResult r = sift_select(w.rows, w.q, 2, testing::kernel(1.0));
  std::stringstream out;
  write_selection(r, w.rows, out);
  std::string first;
  std::getline(out, first);
  const auto j = nlohmann::json::parse(first);
  EXPECT_EQ(j.size(), 5u);
  EXPECT_EQ(j.at("rank"), 1);
  EXPECT_EQ(j.at("row"), 0);
  EXPECT_EQ(j.at("id"), "a");
  EXPECT_NEAR(j.at("objective").get<double>(), 0.5, 1e-15);
  EXPECT_NEAR(j.at("sigma_sq").get<double>(), 0.5, 1e-15);
  EXPECT_EQ(first.substr(0, 8), "{\"rank\":");
}

TEST(Selection, RoundTripIsExact) {
  const auto inst = testing::random_instance(4);
  const SelectionResult r =
      sift_select(inst.rows, inst.q, inst.n_select, testing::kernel(inst.lambda_prime));
  std::stringstream out;
  write_selection(r, inst.rows, out);
  const ParsedSelection parsed = read_selection(out);
  ASSERT_EQ(parsed.lines.size(), r.order.size());
  for (std::size_t i = 0; i < r.order.size(); ++i) {
    EXPECT_EQ(parsed.lines[i].rank, i + 1);
    EXPECT_EQ(parsed.lines[i].row, r.order[i]);
    EXPECT_EQ(parsed.lines[i].objective, r.objective_trace[i]);
    EXPECT_EQ(parsed.lines[i].sigma_sq, r.sigma_trace[i + 1]);
  }
  EXPECT_EQ(parsed.summary.method, "sift");
  EXPECT_EQ(parsed.summary.n, r.order.size());
  EXPECT_EQ(parsed.summary.lambda_prime, inst.lambda_prime);
  EXPECT_EQ(parsed.summary.sigma0_sq, r.sigma_trace.front());
  EXPECT_EQ(parsed.summary.sigma_final_sq, r.sigma_trace.back());
}

TEST(Selection, ReportsOriginalRowsAfterPreselection) {
  const auto w = testing::worked_instance();
  const EmbeddingSet pool = preselect_candidates(w.rows, w.q, 2);  // {a, c}
  const SelectionResult r = nn_select(pool, w.q, 2, false);
  std::stringstream out;
  write_selection(r, pool, out);
  const ParsedSelection parsed = read_selection(out);
  EXPECT_EQ(parsed.lines[1].row, 2u);
  EXPECT_EQ(parsed.lines[1].id, "c");
}

TEST(Selection, MissingSummaryIsAnError) {
  std::istringstream in("{\"rank\":1,\"row\":0,\"id\":\"a\",\"objective\":0.5,\"sigma_sq\":0.5}\n");
  EXPECT_THROW(read_selection(in), FormatError);
}

}  // namespace
}  // namespace sift::io
