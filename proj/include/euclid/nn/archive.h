#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "euclid/nn/types.h"

namespace euclid {

// Ordered collection of named dense tensors with a versioned binary layout:
//
//   "EUCLID1"                       7 bytes, no terminator
//   uint64 entry_count
//   per entry:
//     uint64 name_length, name bytes
//     uint64 rank (always 2), uint64 rows, uint64 cols
//     rows*cols float64 values, row-major
//
// All integers and doubles are little-endian.
class TensorArchive {
 public:
  static constexpr std::string_view kMagic = "EUCLID1";

  struct Entry {
    std::string name;
    Matrix value;
  };

  void Put(std::string name, Matrix value);
  void PutScalar(std::string name, double value);
  // Strings are carried as a 1 x n tensor of character codes.
  void PutString(std::string name, std::string_view value);

  bool Has(std::string_view name) const;
  const Matrix& Get(std::string_view name) const;
  double GetScalar(std::string_view name) const;
  std::string GetString(std::string_view name) const;

  const std::vector<Entry>& entries() const { return entries_; }

  void Write(const std::string& path) const;
  static TensorArchive Read(const std::string& path);

  std::string Serialize() const;
  static TensorArchive Deserialize(std::string_view bytes);

 private:
  std::vector<Entry> entries_;
};

}  // namespace euclid
