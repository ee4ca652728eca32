#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace polyscale::util {

/// Hex SHA-1 of `data`.
std::string sha1_hex(std::string_view data);

/// Git blob id of a byte string: sha1("blob <size>\0" + data).
std::string git_blob_hash(std::string_view data);

/// Git blob id of a file's contents.
std::string git_blob_hash_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace polyscale::util
