#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace swarmforge::archive {

class ArchiveError : public std::runtime_error {
 public:
  explicit ArchiveError(const std::string& what) : std::runtime_error(what) {}
};

// Packs `files` into a gzip-compressed ustar archive at `archive_path`,
// then deletes the originals. Atomic: the archive is written to a
// temporary path and renamed before any source file is removed;
// on failure the partial archive is removed and no source is touched.
void archive_and_delete(const std::vector<std::string>& files,
                        const std::string& archive_path);

// Entry names as stored in an archive (for tests and extraction tools).
std::vector<std::string> list_archive(const std::string& archive_path);

}  // namespace swarmforge::archive
