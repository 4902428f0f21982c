#include "modalign/embedding_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "binary_io.hpp"
#include "modalign/rng.hpp"

namespace modalign {

namespace {

constexpr std::string_view kMagic = "EMB1";
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 8;

// Walks record boundaries assuming `floats` values per record; true when the
// records consume the payload exactly. Used only to classify a malformed file.
bool parses_exactly(std::string_view payload, std::uint64_t count, std::uint64_t floats) {
  std::size_t pos = 0;
  for (std::uint64_t r = 0; r < count; ++r) {
    if (payload.size() - pos < 2) return false;
    const auto len = static_cast<std::size_t>(static_cast<unsigned char>(payload[pos])) |
                     (static_cast<std::size_t>(static_cast<unsigned char>(payload[pos + 1])) << 8);
    pos += 2;
    const std::size_t body = len + floats * 4;
    if (payload.size() - pos < body) return false;
    pos += body;
  }
  return pos == payload.size();
}

}  // namespace

std::string_view to_string(Modality m) noexcept {
  return m == Modality::Graph ? "graph" : "text";
}

Modality parse_modality(std::string_view text) {
  if (text == "graph") return Modality::Graph;
  if (text == "text") return Modality::Text;
  fail(ErrorCode::WrongModality, "unknown modality: " + std::string(text));
}

EmbeddingSet::EmbeddingSet(std::string model_name, Modality modality, Eigen::Index dim)
    : model_name_(std::move(model_name)), modality_(modality), dim_(dim) {
  if (dim <= 0) fail(ErrorCode::BadDims, "embedding dimension must be positive");
}

void EmbeddingSet::add(std::string id, std::span<const float> values) {
  if (id.empty()) fail(ErrorCode::InvalidId, "empty protein ID");
  if (id.size() > 0xFFFF) fail(ErrorCode::InvalidId, "protein ID longer than 65535 bytes");
  if (static_cast<Eigen::Index>(values.size()) != dim_) {
    fail(ErrorCode::DimMismatch, "record " + id + " has " + std::to_string(values.size()) +
                                     " values, expected " + std::to_string(dim_));
  }
  for (float v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "non-finite value in record " + id);
  }
  if (index_.contains(id)) fail(ErrorCode::DuplicateId, "duplicate protein ID " + id);
  index_.emplace(id, static_cast<Eigen::Index>(ids_.size()));
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), values.begin(), values.end());
}

std::optional<Eigen::Index> EmbeddingSet::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::Index EmbeddingSet::require(const std::string& id) const {
  auto found = find(id);
  if (!found) fail(ErrorCode::UnknownId, "protein " + id + " not in " + model_name_);
  return *found;
}

bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
  return a.model_name_ == b.model_name_ && a.modality_ == b.modality_ && a.dim_ == b.dim_ &&
         a.ids_ == b.ids_ && a.values_.size() == b.values_.size() &&
         std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(float)) == 0;
}

std::string encode_embedding_set(const EmbeddingSet& set) {
  detail::ByteWriter out;
  out.raw(kMagic);
  out.uint<std::uint16_t>(kVersion);
  out.uint<std::uint32_t>(static_cast<std::uint32_t>(set.dim()));
  out.uint<std::uint64_t>(set.size());
  for (std::size_t r = 0; r < set.size(); ++r) {
    const auto& id = set.ids()[r];
    out.uint<std::uint16_t>(static_cast<std::uint16_t>(id.size()));
    out.raw(id);
    for (float v : set.vector(static_cast<Eigen::Index>(r))) out.f32(v);
  }
  return out.bytes();
}

EmbeddingSet decode_embedding_set(std::string_view bytes, std::string model_name, Modality modality) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic) fail(ErrorCode::BadMagic, "missing EMB1 magic");
  detail::ByteReader in(bytes, ErrorCode::TruncatedFile);
  in.raw(4);
  const auto version = in.uint<std::uint16_t>();
  if (version != kVersion) {
    fail(ErrorCode::VersionUnsupported, "EMB1 version " + std::to_string(version) + " not supported");
  }
  const auto dim = in.uint<std::uint32_t>();
  const auto count = in.uint<std::uint64_t>();
  if (dim == 0) fail(ErrorCode::DimMismatch, "EMB1 header declares dim 0");

  // A length mismatch between header and payload is either a wrong
  // per-record vector length or a cut-off file; tell them apart by checking
  // whether some other uniform record width explains the payload exactly.
  const std::string_view payload = bytes.substr(kHeaderBytes <= bytes.size() ? kHeaderBytes : bytes.size());
  if (!parses_exactly(payload, count, dim)) {
    const std::uint64_t limit = 2ULL * dim + 1;
    for (std::uint64_t floats = 0; floats <= limit && count > 0; ++floats) {
      if (floats != dim && parses_exactly(payload, count, floats)) {
        fail(ErrorCode::DimMismatch, "records hold " + std::to_string(floats) +
                                         " values but header declares dim " + std::to_string(dim));
      }
    }
  }

  EmbeddingSet set(std::move(model_name), modality, static_cast<Eigen::Index>(dim));
  std::vector<float> values(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto len = in.uint<std::uint16_t>();
    std::string id(in.raw(len));
    for (auto& v : values) v = in.f32();
    set.add(std::move(id), values);
  }
  if (in.remaining() != 0) fail(ErrorCode::TruncatedFile, "trailing bytes after last record");
  return set;
}

EmbeddingSet read_embedding_file(const std::string& path, Modality modality,
                                 std::optional<std::string> model_name) {
  const std::string bytes = detail::read_file(path);
  std::string name = model_name ? *model_name : std::filesystem::path(path).stem().string();
  return decode_embedding_set(bytes, std::move(name), modality);
}

void write_embedding_file(const EmbeddingSet& set, const std::string& path) {
  detail::write_file(path, encode_embedding_set(set));
}

EmbeddingManifest make_manifest(const EmbeddingSet& set, std::string source) {
  return {set.model_name(), set.modality(), static_cast<std::int64_t>(set.dim()),
          static_cast<std::int64_t>(set.size()), std::move(source)};
}

PairedDataset pair_datasets(EmbeddingSet graph, EmbeddingSet text) {
  if (graph.modality() != Modality::Graph) {
    fail(ErrorCode::WrongModality, "first set must be graph modality, got " + std::string(to_string(graph.modality())));
  }
  if (text.modality() != Modality::Text) {
    fail(ErrorCode::WrongModality, "second set must be text modality, got " + std::string(to_string(text.modality())));
  }
  std::vector<std::string> ids;
  for (const auto& id : graph.ids()) {
    if (text.find(id)) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  if (ids.size() < 2) {
    fail(ErrorCode::EmptyIntersection,
         "need at least 2 shared protein IDs, found " + std::to_string(ids.size()));
  }
  return {std::move(graph), std::move(text), std::move(ids)};
}

DatasetSplit split_ids(std::vector<std::string> ids, std::uint64_t seed) {
  if (ids.size() < 10) fail(ErrorCode::TooFewIds, "need at least 10 IDs to split, got " + std::to_string(ids.size()));
  std::sort(ids.begin(), ids.end());
  SplitMix64 rng(seed);
  fisher_yates(ids, rng);
  const std::size_t n = ids.size();
  const std::size_t n_train = (n * 8) / 10;
  const std::size_t n_val = n / 10;
  DatasetSplit split;
  split.seed = seed;
  split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                          ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  return split;
}

DatasetSplit split_dataset(const PairedDataset& paired, std::uint64_t seed) {
  return split_ids(paired.ids, seed);
}

}  // namespace modalign
