#include "hfl/seedstore.hpp"

#include <fstream>

namespace hfl {

SeedStore::SeedStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_ / "queue");
  std::filesystem::create_directories(root_ / "witnesses");
}

std::filesystem::path SeedStore::writeSeed(const Seed &s) const {
  std::string name = "id-" + std::to_string(s.id) + ",src-" +
                     std::to_string(s.parentId < 0 ? 0 : s.parentId) + "," +
                     originName(s.origin);
  if (s.plusCov) name += ",+cov";
  auto path = root_ / "queue" / name;
  writeBytesFile(path, s.bytes);
  return path;
}

void SeedStore::appendProvenance(const Seed &s) const {
  std::ofstream out(root_ / "provenance.csv", std::ios::app);
  out << s.id << "," << s.parentId << "," << s.provenance << "\n";
}

std::filesystem::path
SeedStore::writeWitness(int labelId, const std::vector<uint8_t> &bytes) const {
  auto path = root_ / "witnesses" / ("label-" + std::to_string(labelId));
  writeBytesFile(path, bytes);
  return path;
}

std::vector<uint8_t> readBytesFile(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void writeBytesFile(const std::filesystem::path &p,
                    const std::vector<uint8_t> &bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

} // namespace hfl
