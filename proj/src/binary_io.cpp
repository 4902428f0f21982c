#include "binary_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace modalign::detail {

std::string read_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) {
    fail(ErrorCode::FileNotFound, "no such file: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

}  // namespace modalign::detail
