#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace pic::csv {

// Shortest round-trip decimal form of v. Non-finite values map to the fixed
// tokens "inf", "-inf" and "nan" so downstream parsers see stable strings.
std::string num(double v);
std::string num(std::int64_t v);
std::string num(std::uint64_t v);
std::string num(int v);

// Line-oriented CSV emitter. Callers format cells themselves (usually via
// num()) so the writer never has to guess about precision or locale.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);

  // Writes "# text" ahead of the header. Intended for a single provenance
  // line carrying tool version, config hash and seed.
  void comment(const std::string& text);
  void row(const std::vector<std::string>& cells);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace pic::csv
