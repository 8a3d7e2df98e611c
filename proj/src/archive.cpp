#include "swarmforge/archive.hpp"

#include <zlib.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace swarmforge::archive {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kBlock = 512;

// Minimal ustar header for a regular file.
std::array<char, kBlock> tar_header(const std::string& name,
                                    std::uint64_t size) {
  std::array<char, kBlock> hdr{};
  if (name.size() > 99) {
    throw ArchiveError("entry name too long for ustar: " + name);
  }
  std::memcpy(hdr.data(), name.c_str(), name.size());
  std::snprintf(hdr.data() + 100, 8, "%07o", 0644);
  std::snprintf(hdr.data() + 108, 8, "%07o", 0);
  std::snprintf(hdr.data() + 116, 8, "%07o", 0);
  std::snprintf(hdr.data() + 124, 12, "%011llo",
                static_cast<unsigned long long>(size));
  std::snprintf(hdr.data() + 136, 12, "%011o", 0);  // mtime fixed for determinism
  std::memset(hdr.data() + 148, ' ', 8);            // checksum placeholder
  hdr[156] = '0';                                   // regular file
  std::memcpy(hdr.data() + 257, "ustar", 6);
  std::memcpy(hdr.data() + 263, "00", 2);
  unsigned checksum = 0;
  for (char c : hdr) checksum += static_cast<unsigned char>(c);
  std::snprintf(hdr.data() + 148, 8, "%06o", checksum);
  hdr[155] = ' ';
  return hdr;
}

class GzFile {
 public:
  GzFile(const std::string& path, const char* mode)
      : file_(gzopen(path.c_str(), mode)) {
    if (!file_) throw ArchiveError("cannot open " + path);
  }
  ~GzFile() {
    if (file_) gzclose(file_);
  }
  GzFile(const GzFile&) = delete;

  void write(const void* data, std::size_t size) {
    if (gzwrite(file_, data, static_cast<unsigned>(size)) !=
        static_cast<int>(size)) {
      throw ArchiveError("gzwrite failed");
    }
  }
  int read(void* data, std::size_t size) {
    const int n = gzread(file_, data, static_cast<unsigned>(size));
    if (n < 0) throw ArchiveError("gzread failed");
    return n;
  }
  void close() {
    const int rc = gzclose(file_);
    file_ = nullptr;
    if (rc != Z_OK) throw ArchiveError("gzclose failed");
  }

 private:
  gzFile file_;
};

}  // namespace

void archive_and_delete(const std::vector<std::string>& files,
                        const std::string& archive_path) {
  if (files.empty()) throw ArchiveError("no files to archive");
  // Verify sources before writing anything.
  for (const auto& path : files) {
    if (!fs::is_regular_file(path)) {
      throw ArchiveError("missing file: " + path);
    }
  }
  const std::string tmp_path = archive_path + ".part";
  try {
    GzFile gz(tmp_path, "wb");
    std::vector<char> buf(1 << 16);
    for (const auto& path : files) {
      const std::uint64_t size = fs::file_size(path);
      const std::string entry = fs::path(path).filename().string();
      const auto hdr = tar_header(entry, size);
      gz.write(hdr.data(), hdr.size());
      std::ifstream in(path, std::ios::binary);
      if (!in) throw ArchiveError("cannot read " + path);
      std::uint64_t remaining = size;
      while (remaining > 0) {
        const std::size_t take = static_cast<std::size_t>(
            std::min<std::uint64_t>(buf.size(), remaining));
        in.read(buf.data(), static_cast<std::streamsize>(take));
        if (static_cast<std::size_t>(in.gcount()) != take) {
          throw ArchiveError("short read on " + path);
        }
        gz.write(buf.data(), take);
        remaining -= take;
      }
      const std::size_t pad = (kBlock - size % kBlock) % kBlock;
      if (pad > 0) {
        std::array<char, kBlock> zeros{};
        gz.write(zeros.data(), pad);
      }
    }
    std::array<char, 2 * kBlock> trailer{};
    gz.write(trailer.data(), trailer.size());
    gz.close();
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp_path, ec);
    throw;
  }
  std::error_code ec;
  fs::rename(tmp_path, archive_path, ec);
  if (ec) {
    fs::remove(tmp_path, ec);
    throw ArchiveError("cannot move archive into place: " + archive_path);
  }
  // Sources go only after the archive is durably in place.
  for (const auto& path : files) fs::remove(path);
}

std::vector<std::string> list_archive(const std::string& archive_path) {
  GzFile gz(archive_path, "rb");
  std::vector<std::string> names;
  std::array<char, kBlock> hdr{};
  while (true) {
    const int n = gz.read(hdr.data(), hdr.size());
    if (n == 0) break;
    if (n != static_cast<int>(kBlock)) throw ArchiveError("truncated header");
    if (hdr[0] == '\0') break;  // end-of-archive marker
    names.emplace_back(hdr.data());
    unsigned long long size = 0;
    std::sscanf(hdr.data() + 124, "%11llo", &size);
    std::uint64_t skip = (size + kBlock - 1) / kBlock * kBlock;
    std::vector<char> buf(1 << 16);
    while (skip > 0) {
      const std::size_t take =
          static_cast<std::size_t>(std::min<std::uint64_t>(buf.size(), skip));
      if (gz.read(buf.data(), take) != static_cast<int>(take)) {
        throw ArchiveError("truncated entry data");
      }
      skip -= take;
    }
  }
  return names;
}

}  // namespace swarmforge::archive
