#include "proxyclust/matrix_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "proxyclust/errors.hpp"

namespace proxyclust {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'A', 'P'};
constexpr unsigned char kVersion = 0x01;
constexpr std::size_t kHeaderSize = 4 + 1 + 4 + 4;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_embedding_matrix(const RowMatrix& matrix) {
  if (matrix.rows() > UINT32_MAX || matrix.cols() > UINT32_MAX) throw ConfigError("matrix too large for format");
  std::string out;
  out.reserve(kHeaderSize + static_cast<std::size_t>(matrix.size()) * 4);
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(matrix.rows()));
  put_u32(out, static_cast<std::uint32_t>(matrix.cols()));
  for (Index r = 0; r < matrix.rows(); ++r) {
    for (Index c = 0; c < matrix.cols(); ++c) {
      const double v = matrix(r, c);
      if (!std::isfinite(v)) {
        throw NumericalError("matrix entry (" + std::to_string(r) + ", " + std::to_string(c) + ") is not finite");
      }
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

RowMatrix decode_embedding_matrix(const std::string& bytes) {
  if (bytes.size() < 4) throw FormatError("truncated magic", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected \"MMAP\"", 0);
  if (bytes.size() < 5) throw FormatError("truncated version byte", bytes.size());
  if (static_cast<unsigned char>(bytes[4]) != kVersion) {
    throw FormatError("unsupported version " + std::to_string(static_cast<unsigned char>(bytes[4])), 4);
  }
  if (bytes.size() < kHeaderSize) throw FormatError("truncated header", bytes.size());
  const std::uint64_t rows = get_u32(bytes, 5);
  const std::uint64_t cols = get_u32(bytes, 9);
  const std::uint64_t expected = kHeaderSize + rows * cols * 4;
  if (bytes.size() < expected) {
    throw FormatError("truncated data: need " + std::to_string(expected) + " bytes, have " +
                          std::to_string(bytes.size()),
                      bytes.size());
  }
  if (bytes.size() > expected) throw FormatError("trailing bytes after matrix data", expected);
  RowMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::size_t offset = kHeaderSize;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c, offset += 4) m(r, c) = std::bit_cast<float>(get_u32(bytes, offset));
  }
  return m;
}

void write_embedding_matrix(const std::filesystem::path& path, const RowMatrix& matrix) {
  write_file_atomic(path, encode_embedding_matrix(matrix));
}

RowMatrix read_embedding_matrix(const std::filesystem::path& path) { return decode_embedding_matrix(read_file(path)); }

void write_vocabulary(const std::filesystem::path& path, const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (w.find('\n') != std::string::npos) throw ConfigError("vocabulary word contains a newline");
    out += w;
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<std::string> read_vocabulary(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    words.push_back(line);
  }
  return words;
}

TokenTable load_token_table(const std::filesystem::path& matrix_path, const std::filesystem::path& vocab_path) {
  return TokenTable(read_vocabulary(vocab_path), read_embedding_matrix(matrix_path));
}

void save_token_table(const TokenTable& table, const std::filesystem::path& matrix_path,
                      const std::filesystem::path& vocab_path) {
  write_embedding_matrix(matrix_path, table.embeddings());
  write_vocabulary(vocab_path, table.vocabulary());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace proxyclust
