/*
 * Copyright 2026 the nightlights authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NIGHTLIGHTS_IO_HPP
#define NIGHTLIGHTS_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nightlights/errors.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(IoError);

/// Random-access view of an immutable byte sequence. Implementations must
/// allow concurrent read_at calls from multiple threads.
class ByteSource {
public:
  virtual ~ByteSource() = default;

  virtual std::uint64_t size() const = 0;

  /// Fills `out` with the bytes at [offset, offset + out.size()).
  /// Throws IoError if the range extends past the end of the source.
  virtual void read_at(std::uint64_t offset, std::span<std::byte> out) const = 0;
};

/// In-memory byte source. Owns its buffer when constructed from a vector,
/// otherwise aliases caller-owned storage.
class MemorySource final : public ByteSource {
public:
  explicit MemorySource(std::vector<std::byte> bytes)
      : owned_(std::move(bytes)), view_(owned_) {}
  explicit MemorySource(std::span<const std::byte> bytes) : view_(bytes) {}

  std::uint64_t size() const override { return view_.size(); }
  void read_at(std::uint64_t offset, std::span<std::byte> out) const override;

private:
  std::vector<std::byte> owned_;
  std::span<const std::byte> view_;
};

/// File-backed byte source using positional reads; safe to share across
/// threads for the lifetime of the object.
class FileSource final : public ByteSource {
public:
  explicit FileSource(const std::filesystem::path& path);
  ~FileSource() override;

  FileSource(const FileSource&) = delete;
  FileSource& operator=(const FileSource&) = delete;

  std::uint64_t size() const override { return size_; }
  void read_at(std::uint64_t offset, std::span<std::byte> out) const override;

private:
  int fd_ = -1;
  std::uint64_t size_ = 0;
  std::string path_;
};

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_IO_HPP
