#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "proxyclust/token_table.hpp"
#include "proxyclust/types.hpp"

namespace proxyclust {

// Embedding-matrix binary file:
//   "MMAP" | 0x01 | rows:u32le | cols:u32le | rows*cols float32le, row-major.
// Values are stored at 32-bit precision; reading returns them widened to double.
void write_embedding_matrix(const std::filesystem::path& path, const RowMatrix& matrix);
RowMatrix read_embedding_matrix(const std::filesystem::path& path);

std::string encode_embedding_matrix(const RowMatrix& matrix);
RowMatrix decode_embedding_matrix(const std::string& bytes);

// One word per line, line i names row i.
void write_vocabulary(const std::filesystem::path& path, const std::vector<std::string>& words);
std::vector<std::string> read_vocabulary(const std::filesystem::path& path);

TokenTable load_token_table(const std::filesystem::path& matrix_path, const std::filesystem::path& vocab_path);
void save_token_table(const TokenTable& table, const std::filesystem::path& matrix_path,
                      const std::filesystem::path& vocab_path);

// Whole-file text/binary helpers. Writes go to a temporary sibling and are
// renamed into place.
std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace proxyclust
