#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "modalign/embedding_store.hpp"
#include "test_support.hpp"

using namespace modalign;
using testing_support::TempDir;

namespace {

// Builds EMB1 bytes field by field, independent of the library encoder.
struct RawEmb {
  std::string bytes;

  template <typename T>
  RawEmb& put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes.append(buf, sizeof(T));
    return *this;
  }
  RawEmb& header(std::uint32_t dim, std::uint64_t count, std::uint16_t version = 1, const char* magic = "EMB1") {
    bytes.append(magic, 4);
    return put(version).put(dim).put(count);
  }
  RawEmb& record(const std::string& id, std::initializer_list<float> values) {
    put(static_cast<std::uint16_t>(id.size()));
    bytes += id;
    for (float v : values) put(v);
    return *this;
  }
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no modalign::Error thrown";
  return ErrorCode::Internal;
}

EmbeddingSet small_set(const std::string& name, Modality m, std::vector<std::string> ids, Eigen::Index dim) {
  EmbeddingSet s(name, m, dim);
  float base = 0.25f;
  for (const auto& id : ids) {
    std::vector<float> v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = (base += 0.5f);
    s.add(id, v);
  }
  return s;
}

}  // namespace

TEST(EmbeddingSet, AddEnforcesInvariants) {
  EmbeddingSet s("m", Modality::Graph, 2);
  const float ok[2] = {1, 2};
  s.add("A", ok);
  EXPECT_EQ(code_of([&] { s.add("A", ok); }), ErrorCode::DuplicateId);
  EXPECT_EQ(code_of([&] { s.add("", ok); }), ErrorCode::InvalidId);
  const float three[3] = {1, 2, 3};
  EXPECT_EQ(code_of([&] { s.add("B", three); }), ErrorCode::DimMismatch);
  const float bad[2] = {1, std::numeric_limits<float>::quiet_NaN()};
  EXPECT_EQ(code_of([&] { s.add("C", bad); }), ErrorCode::NonFiniteValue);
  const float inf[2] = {std::numeric_limits<float>::infinity(), 0};
  EXPECT_EQ(code_of([&] { s.add("D", inf); }), ErrorCode::NonFiniteValue);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.find("A"), Eigen::Index{0});
  EXPECT_FALSE(s.find("B").has_value());
}

TEST(EmbeddingSet, GatherWidensAndRejectsUnknownIds) {
  auto s = small_set("m", Modality::Text, {"X", "Y"}, 3);
  const std::vector<std::string> ids{"Y", "X"};
  const auto m = s.gather<double>(ids);
  ASSERT_EQ(m.rows(), 3);
  ASSERT_EQ(m.cols(), 2);
  EXPECT_EQ(m(0, 0), static_cast<double>(s.vector(1)(0)));
  EXPECT_EQ(m(2, 1), static_cast<double>(s.vector(0)(2)));
  const std::vector<std::string> missing{"Z"};
  EXPECT_EQ(code_of([&] { s.gather<double>(missing); }), ErrorCode::UnknownId);
}

TEST(EmbeddingFile, DecodesHandBuiltBytes) {
  RawEmb raw;
  raw.header(2, 2).record("P1", {1.5f, -2.0f}).record("P22", {0.0f, 3.25f});
  const auto s = decode_embedding_set(raw.bytes, "gearnet", Modality::Graph);
  EXPECT_EQ(s.model_name(), "gearnet");
  EXPECT_EQ(s.modality(), Modality::Graph);
  EXPECT_EQ(s.dim(), 2);
  ASSERT_EQ(s.ids(), (std::vector<std::string>{"P1", "P22"}));
  EXPECT_EQ(s.vector(0)(0), 1.5f);
  EXPECT_EQ(s.vector(0)(1), -2.0f);
  EXPECT_EQ(s.vector(1)(1), 3.25f);
}

TEST(EmbeddingFile, EncoderMatchesHandBuiltBytes) {
  RawEmb raw;
  raw.header(2, 2).record("P1", {1.5f, -2.0f}).record("P22", {0.0f, 3.25f});
  const auto s = decode_embedding_set(raw.bytes, "x", Modality::Text);
  EXPECT_EQ(encode_embedding_set(s), raw.bytes);
}

TEST(EmbeddingFile, RoundTripIsBitwise) {
  TempDir dir;
  EmbeddingSet s("esm", Modality::Text, 3);
  const float a[3] = {std::numeric_limits<float>::denorm_min(), -0.0f, 1e30f};
  const float b[3] = {std::nextafter(1.0f, 2.0f), -1e-30f, 7.0f};
  s.add("ALPHA", a);
  s.add("β-id", b);
  const auto path = dir.file("esm.emb");
  write_embedding_file(s, path);
  const auto back = read_embedding_file(path, Modality::Text);
  EXPECT_EQ(back.model_name(), "esm");
  EXPECT_TRUE(back == s);
  EXPECT_TRUE(std::signbit(back.vector(0)(1)));
}

TEST(EmbeddingFile, ZeroRecordsIsValid) {
  RawEmb raw;
  raw.header(4, 0);
  const auto s = decode_embedding_set(raw.bytes, "m", Modality::Graph);
  EXPECT_EQ(s.size(), 0u);
  EXPECT_EQ(s.dim(), 4);
}

TEST(EmbeddingFile, RejectsBadHeaders) {
  RawEmb magic;
  magic.header(2, 0, 1, "EMB2");
  EXPECT_EQ(code_of([&] { decode_embedding_set(magic.bytes, "m", Modality::Graph); }), ErrorCode::BadMagic);
  RawEmb version;
  version.header(2, 0, 2);
  EXPECT_EQ(code_of([&] { decode_embedding_set(version.bytes, "m", Modality::Graph); }),
            ErrorCode::VersionUnsupported);
  EXPECT_EQ(code_of([&] { decode_embedding_set("EMB", "m", Modality::Graph); }), ErrorCode::BadMagic);
  EXPECT_EQ(code_of([&] { decode_embedding_set(std::string("EMB1\x01\x00\x02", 7), "m", Modality::Graph); }),
            ErrorCode::TruncatedFile);
  EXPECT_EQ(code_of([&] { read_embedding_file("/nonexistent/file.emb", Modality::Graph); }),
            ErrorCode::FileNotFound);
}

TEST(EmbeddingFile, TruncationAndTrailingBytes) {
  RawEmb raw;
  raw.header(2, 2).record("A", {1, 2}).record("B", {3, 4});
  const std::string cut = raw.bytes.substr(0, raw.bytes.size() - 3);
  EXPECT_EQ(code_of([&] { decode_embedding_set(cut, "m", Modality::Graph); }), ErrorCode::TruncatedFile);
  const std::string extra = raw.bytes + "zz";
  EXPECT_EQ(code_of([&] { decode_embedding_set(extra, "m", Modality::Graph); }), ErrorCode::TruncatedFile);
}

TEST(EmbeddingFile, HeaderDimDisagreeingWithRecordsIsDimMismatch) {
  RawEmb raw;
  raw.header(2, 2).record("A", {1, 2, 3}).record("B", {4, 5, 6});
  EXPECT_EQ(code_of([&] { decode_embedding_set(raw.bytes, "m", Modality::Graph); }), ErrorCode::DimMismatch);
}

TEST(EmbeddingFile, PayloadValidation) {
  RawEmb dup;
  dup.header(1, 2).record("A", {1}).record("A", {2});
  EXPECT_EQ(code_of([&] { decode_embedding_set(dup.bytes, "m", Modality::Graph); }), ErrorCode::DuplicateId);
  RawEmb nan;
  nan.header(1, 1).record("A", {std::numeric_limits<float>::quiet_NaN()});
  EXPECT_EQ(code_of([&] { decode_embedding_set(nan.bytes, "m", Modality::Graph); }), ErrorCode::NonFiniteValue);
  RawEmb empty_id;
  empty_id.header(1, 1).record("", {1});
  EXPECT_EQ(code_of([&] { decode_embedding_set(empty_id.bytes, "m", Modality::Graph); }), ErrorCode::InvalidId);
}

TEST(EmbeddingManifest, DescribesSet) {
  const auto s = small_set("gvp", Modality::Graph, {"A", "B", "C"}, 5);
  const auto m = make_manifest(s, "/data/gvp.emb");
  EXPECT_EQ(m.model_name, "gvp");
  EXPECT_EQ(m.modality, Modality::Graph);
  EXPECT_EQ(m.dim, 5);
  EXPECT_EQ(m.count, 3);
  EXPECT_EQ(m.source, "/data/gvp.emb");
  EXPECT_EQ(parse_modality(to_string(Modality::Text)), Modality::Text);
}

TEST(PairDatasets, SortedIntersection) {
  auto g = small_set("g", Modality::Graph, {"C", "A", "B", "Q"}, 2);
  auto t = small_set("t", Modality::Text, {"B", "C", "Z", "A"}, 3);
  const auto p = pair_datasets(std::move(g), std::move(t));
  EXPECT_EQ(p.ids, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(p.graph.dim(), 2);
  EXPECT_EQ(p.text.dim(), 3);
}

TEST(PairDatasets, Errors) {
  auto g = small_set("g", Modality::Graph, {"A", "B"}, 2);
  auto t = small_set("t", Modality::Text, {"A", "C"}, 2);
  EXPECT_EQ(code_of([&] { pair_datasets(g, t); }), ErrorCode::EmptyIntersection);
  auto wrong = small_set("t", Modality::Graph, {"A", "B"}, 2);
  EXPECT_EQ(code_of([&] { pair_datasets(g, wrong); }), ErrorCode::WrongModality);
}

TEST(Split, SizesDisjointAndSeeded) {
  std::vector<std::string> ids;
  for (int i = 0; i < 123; ++i) ids.push_back("ID" + std::to_string(1000 + i));
  const auto a = split_ids(ids, 42);
  EXPECT_EQ(a.train.size(), 98u);
  EXPECT_EQ(a.validation.size(), 12u);
  EXPECT_EQ(a.test.size(), 13u);
  std::set<std::string> all(a.train.begin(), a.train.end());
  all.insert(a.validation.begin(), a.validation.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), ids.size());

  auto reversed = ids;
  std::reverse(reversed.begin(), reversed.end());
  const auto b = split_ids(reversed, 42);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(split_ids(ids, 43).train, a.train);
}

TEST(Split, MatchesReferenceShuffle) {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back(std::string(1, static_cast<char>('a' + i)));
  // independent Fisher-Yates from the back with the same generator
  auto expected = ids;
  SplitMix64 rng(7);
  for (std::size_t i = expected.size(); i > 1; --i) std::swap(expected[i - 1], expected[rng.next() % i]);
  const auto s = split_ids(ids, 7);
  EXPECT_EQ(s.train, std::vector<std::string>(expected.begin(), expected.begin() + 8));
  EXPECT_EQ(s.validation, std::vector<std::string>{expected[8]});
  EXPECT_EQ(s.test, std::vector<std::string>{expected[9]});
}

TEST(Split, TooFewIds) {
  std::vector<std::string> ids{"a", "b", "c"};
  EXPECT_EQ(code_of([&] { split_ids(ids, 1); }), ErrorCode::TooFewIds);
}
