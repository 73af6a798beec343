#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hfl/fuzz.hpp"

namespace hfl {

// On-disk queue layout: <root>/queue holds one raw-byte file per seed
// named `id-<n>,src-<m>,<origin>[,+cov]`; <root>/witnesses holds one file
// per triggered label named `label-<id>`.
class SeedStore {
public:
  explicit SeedStore(std::filesystem::path root);

  std::filesystem::path writeSeed(const Seed &s) const;
  // One CSV line per concolic seed: id,src,provenance.
  void appendProvenance(const Seed &s) const;
  std::filesystem::path writeWitness(int labelId,
                                     const std::vector<uint8_t> &bytes) const;
  const std::filesystem::path &root() const { return root_; }

private:
  std::filesystem::path root_;
};

std::vector<uint8_t> readBytesFile(const std::filesystem::path &p);
void writeBytesFile(const std::filesystem::path &p,
                    const std::vector<uint8_t> &bytes);

} // namespace hfl
