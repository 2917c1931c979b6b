#include "lirlab/embedding_store.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lirlab {

EmbeddingStore::EmbeddingStore(std::vector<std::string> ids, std::vector<TokenMatrix> matrices)
    : ids_(std::move(ids)), matrices_(std::move(matrices)) {
  if (ids_.empty()) raise(ErrorCode::InvalidArgument, "embedding store needs at least one item");
  if (ids_.size() != matrices_.size()) {
    raise(ErrorCode::InvalidArgument, "embedding store has " + std::to_string(ids_.size()) +
                                          " ids but " + std::to_string(matrices_.size()) +
                                          " matrices");
  }
  const auto p = matrices_.front().tokens();
  const auto d = matrices_.front().dim();
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) raise(ErrorCode::InvalidArgument, "empty id at position " + std::to_string(i));
    if (!index_.emplace(ids_[i], i).second) {
      raise(ErrorCode::InvalidArgument, "duplicate id '" + ids_[i] + "'");
    }
    if (matrices_[i].tokens() != p || matrices_[i].dim() != d) {
      raise(ErrorCode::InvalidArgument, "item '" + ids_[i] + "' has a shape different from item 0");
    }
  }
}

std::optional<std::size_t> EmbeddingStore::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool EmbeddingStore::normalized() const noexcept {
  for (const auto& m : matrices_) {
    if (!m.normalized()) return false;
  }
  return true;
}

EmbeddingStore normalize_store(const EmbeddingStore& store) {
  std::vector<TokenMatrix> out;
  out.reserve(store.size());
  for (const auto& m : store.matrices()) out.push_back(normalize_tokens(m));
  return EmbeddingStore(store.ids(), std::move(out));
}

namespace {

constexpr unsigned char kMagic[4] = {'T', 'E', 'M', 'B'};

class Writer {
 public:
  explicit Writer(std::vector<unsigned char>& out) : out_(out) {}

  template <typename U>
  void put(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
    }
  }
  void put_f32(float value) { put(std::bit_cast<std::uint32_t>(value)); }
  void put_bytes(const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  std::vector<unsigned char>& out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& in) : in_(in) {}

  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>("payload")); }
  std::string get_string(std::size_t n) {
    need(n, "id bytes");
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) raise(ErrorCode::FormatError, std::string("TEMB truncated while reading ") + what);
  }

  const std::vector<unsigned char>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_temb(const EmbeddingStore& store) {
  std::vector<unsigned char> out;
  Writer w(out);
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kTembVersion);
  w.put<std::uint64_t>(store.size());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(store.tokens()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(store.dim()));
  w.put<std::uint32_t>(kTembDtypeF32);
  for (const auto& id : store.ids()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(id.size()));
    w.put_bytes(id.data(), id.size());
  }
  for (const auto& m : store.matrices()) {
    for (float x : m.values()) w.put_f32(x);
  }
  return out;
}

EmbeddingStore decode_temb(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    raise(ErrorCode::FormatError, "bad TEMB magic");
  }
  Reader r(bytes);
  (void)r.get_string(4);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kTembVersion) raise(ErrorCode::FormatError, "unsupported TEMB version " + std::to_string(version));
  const auto n = r.get<std::uint64_t>("item count");
  const auto p = r.get<std::uint32_t>("token count");
  const auto d = r.get<std::uint32_t>("dimension");
  const auto dtype = r.get<std::uint32_t>("dtype");
  if (dtype != kTembDtypeF32) raise(ErrorCode::FormatError, "unsupported TEMB dtype " + std::to_string(dtype));
  if (n == 0 || p == 0 || d == 0) raise(ErrorCode::FormatError, "TEMB shape has a zero extent");
  // Each id costs at least 4 bytes; reject absurd counts before allocating.
  if (n > r.remaining() / 4) raise(ErrorCode::FormatError, "TEMB item count exceeds file size");

  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len = r.get<std::uint32_t>("id length");
    ids.push_back(r.get_string(len));
  }
  const std::uint64_t per_item = static_cast<std::uint64_t>(p) * d;
  if (r.remaining() != n * per_item * sizeof(float)) {
    raise(ErrorCode::FormatError, "TEMB payload holds " + std::to_string(r.remaining()) +
                                      " bytes, expected " + std::to_string(n * per_item * sizeof(float)));
  }
  try {
    std::vector<TokenMatrix> matrices;
    matrices.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::vector<float> values(per_item);
      for (auto& x : values) x = r.get_f32();
      matrices.emplace_back(p, d, std::move(values));
    }
    return EmbeddingStore(std::move(ids), std::move(matrices));
  } catch (const Error& e) {
    raise(ErrorCode::FormatError, std::string("invalid TEMB content: ") + e.what());
  }
}

EmbeddingStore load_embedding_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorCode::IoError, "read failed for '" + path.string() + "'");
  return decode_temb(bytes);
}

void save_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  const auto bytes = encode_temb(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) raise(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace lirlab
