#include "euclid/nn/archive.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "euclid/common/error.h"

namespace euclid {
namespace {

static_assert(std::endian::native == std::endian::little,
              "archive format assumes a little-endian host");

void AppendU64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

void AppendF64(std::string& out, double v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view Take(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointError("archive truncated");
    }
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t U64() {
    std::uint64_t v;
    std::memcpy(&v, Take(8).data(), 8);
    return v;
  }
  double F64() {
    double v;
    std::memcpy(&v, Take(8).data(), 8);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void TensorArchive::Put(std::string name, Matrix value) {
  for (auto& e : entries_) {
    if (e.name == name) {
      e.value = std::move(value);
      return;
    }
  }
  entries_.push_back({std::move(name), std::move(value)});
}

void TensorArchive::PutScalar(std::string name, double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  Put(std::move(name), std::move(m));
}

void TensorArchive::PutString(std::string name, std::string_view value) {
  Matrix m(1, static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    m(0, static_cast<Eigen::Index>(i)) =
        static_cast<unsigned char>(value[i]);
  }
  Put(std::move(name), std::move(m));
}

bool TensorArchive::Has(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

const Matrix& TensorArchive::Get(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.value;
  }
  throw CheckpointError("archive has no tensor named '" + std::string(name) +
                        "'");
}

double TensorArchive::GetScalar(std::string_view name) const {
  const Matrix& m = Get(name);
  if (m.size() != 1) {
    throw CheckpointError("tensor '" + std::string(name) + "' is not scalar");
  }
  return m(0, 0);
}

std::string TensorArchive::GetString(std::string_view name) const {
  const Matrix& m = Get(name);
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    out.push_back(static_cast<char>(static_cast<int>(m(0, i))));
  }
  return out;
}

std::string TensorArchive::Serialize() const {
  std::string out(kMagic);
  AppendU64(out, entries_.size());
  for (const auto& e : entries_) {
    AppendU64(out, e.name.size());
    out += e.name;
    AppendU64(out, 2);
    AppendU64(out, static_cast<std::uint64_t>(e.value.rows()));
    AppendU64(out, static_cast<std::uint64_t>(e.value.cols()));
    for (Eigen::Index r = 0; r < e.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < e.value.cols(); ++c) {
        AppendF64(out, e.value(r, c));
      }
    }
  }
  return out;
}

TensorArchive TensorArchive::Deserialize(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < kMagic.size() || in.Take(kMagic.size()) != kMagic) {
    throw CheckpointError("bad archive version string (expected " +
                          std::string(kMagic) + ")");
  }
  TensorArchive archive;
  const std::uint64_t count = in.U64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t name_len = in.U64();
    std::string name(in.Take(name_len));
    const std::uint64_t rank = in.U64();
    if (rank != 2) throw CheckpointError("unsupported tensor rank");
    const auto rows = static_cast<Eigen::Index>(in.U64());
    const auto cols = static_cast<Eigen::Index>(in.U64());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = in.F64();
    }
    archive.entries_.push_back({std::move(name), std::move(m)});
  }
  if (!in.done()) throw CheckpointError("trailing bytes in archive");
  return archive;
}

void TensorArchive::Write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
  const std::string bytes = Serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for '" + path + "'");
}

TensorArchive TensorArchive::Read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return Deserialize(ss.str());
}

}  // namespace euclid
